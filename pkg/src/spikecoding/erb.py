"""Equivalent rectangular bandwidth (ERB) frequency scale.

The ERB-number scale spaces frequencies the way the cochlea does: equal
steps on this scale correspond to equal numbers of auditory filter
bandwidths.  All formulas use frequency in Hz.
"""

import numpy as np

from .errors import ParameterError

_EAR_Q_SLOPE = 4.37e-3  # per Hz
_ERB_SCALE = 21.4
_ERB_MIN_BW = 24.7


def erb_bandwidth(freq_hz):
    """Equivalent rectangular bandwidth in Hz at center frequency ``freq_hz``."""
    f = np.asarray(freq_hz, dtype=float)
    return _ERB_MIN_BW * (_EAR_Q_SLOPE * f + 1.0)


def erb_number(freq_hz):
    """Map frequency in Hz to its position on the ERB-number scale."""
    f = np.asarray(freq_hz, dtype=float)
    if np.any(f < 0):
        raise ParameterError("frequency must be nonnegative")
    return _ERB_SCALE * np.log10(_EAR_Q_SLOPE * f + 1.0)


def erb_number_to_hz(erbn):
    """Inverse of :func:`erb_number`."""
    e = np.asarray(erbn, dtype=float)
    return (np.power(10.0, e / _ERB_SCALE) - 1.0) / _EAR_Q_SLOPE


def erbspace(f_lo: float, f_hi: float, n: int):
    """``n`` frequencies from ``f_lo`` to ``f_hi``, equally spaced in ERB number.

    Endpoints are included.  A single frequency requires ``f_lo == f_hi``.
    """
    if n < 1:
        raise ParameterError("need at least one frequency")
    if f_lo <= 0 or f_hi <= 0 or f_lo > f_hi:
        raise ParameterError("need 0 < f_lo <= f_hi")
    if n == 1:
        if f_lo != f_hi:
            raise ParameterError("a single frequency requires f_lo == f_hi")
        return np.array([float(f_lo)])
    e = np.linspace(erb_number(f_lo), erb_number(f_hi), n)
    freqs = erb_number_to_hz(e)
    # pin the endpoints so round trips cannot drift
    freqs[0] = f_lo
    freqs[-1] = f_hi
    return freqs
