"""Build script for the compiled kernel extension.

The extension is optional: if compilation fails the package installs anyway
and falls back to the pure NumPy kernels at import time.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "spikecoding.kernels._native",
        ["src/spikecoding/kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

if cythonize is not None:
    ext_modules = cythonize(extensions, language_level="3")
else:
    ext_modules = []

setup(ext_modules=ext_modules)
