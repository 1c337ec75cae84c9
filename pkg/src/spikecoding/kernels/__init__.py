"""Hot numeric kernels with a compiled core and a pure fallback.

On import the package tries the compiled extension and falls back to the
pure NumPy implementation when it is unavailable.  Set the environment
variable ``SPIKECODING_KERNELS=pure`` (or ``native``) before import to force
a backend; asking for ``native`` when the extension is missing is an error.
Both backends produce bit identical results; the compiled one is just fast
enough for full-scale parameter sweeps.
"""

import os

from . import _pure

_requested = os.environ.get("SPIKECODING_KERNELS", "").strip().lower()

if _requested == "pure":
    _impl = _pure
    BACKEND = "pure"
elif _requested == "native":
    from . import _native as _impl  # noqa: F401

    BACKEND = "native"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

isc_encode = _impl.isc_encode
sod_encode = _impl.sod_encode
bsa_encode = _impl.bsa_encode
lif_encode = _impl.lif_encode
delay_block_counts = _impl.delay_block_counts


def available_backends() -> dict:
    """Map backend name to its module, for tests and benchmarks."""
    backends = {"pure": _pure}
    try:
        from . import _native

        backends["native"] = _native
    except ImportError:
        pass
    return backends
