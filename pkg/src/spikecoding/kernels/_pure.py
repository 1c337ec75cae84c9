"""Pure NumPy/Python kernels, the fallback backend.

Every function here has a compiled twin in ``_native``.  The two backends
must agree exactly: encoder recurrences use the same floating point
operation order, and count tables are exact integers, so tests can require
bit identical results from both.
"""

import numpy as np


def isc_encode(z, gain, uniforms):
    """Independent spike coder: spike where ``uniform < z * gain``."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    u = np.ascontiguousarray(uniforms, dtype=np.float64)
    return (u < z * gain).astype(np.int8)


def sod_encode(z, delta):
    """Send-on-delta: track z with a baseline stepping by ``delta``.

    The baseline is maintained as ``z[0] + count * delta`` with an integer
    step count, so it equals the initial value plus ``delta`` times the sum
    of emitted spikes exactly, with no accumulated rounding.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    n = len(z)
    w = np.zeros(n, dtype=np.int8)
    if n == 0:
        return w
    z0 = z[0]
    count = 0
    for t in range(1, n):
        baseline = z0 + count * delta
        if z[t] - baseline > delta:
            w[t] = 1
            count += 1
        elif z[t] - baseline < -delta:
            w[t] = -1
            count -= 1
    return w


def bsa_encode(z, taps, theta):
    """Ben's spiker algorithm over a private copy of ``z``.

    At frame t (from ``len(taps) - 1`` on) the filter is laid over the
    preceding window; if subtracting it reduces the absolute residual by at
    least ``theta``, a spike is emitted and the filter is subtracted.
    """
    z = np.array(z, dtype=np.float64)  # private copy, the loop mutates it
    taps = np.ascontiguousarray(taps, dtype=np.float64)
    m = len(taps)
    n = len(z)
    w = np.zeros(n, dtype=np.int8)
    for t in range(m - 1, n):
        err_sub = 0.0
        err_keep = 0.0
        for k in range(m):
            v = z[t - k]
            err_sub += abs(v - taps[m - 1 - k])
            err_keep += abs(v)
        if err_sub <= err_keep - theta:
            w[t] = 1
            for k in range(m):
                z[t - k] -= taps[m - 1 - k]
    return w


def lif_encode(z, decay, theta):
    """Leaky integrate-and-fire: membrane starts at ``z[0]``, resets to 0."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    n = len(z)
    w = np.zeros(n, dtype=np.int8)
    if n == 0:
        return w
    u = z[0]
    for t in range(n):
        u = u * decay + z[t]
        if u >= theta:
            w[t] = 1
            u = 0.0
    return w


def delay_block_counts(x, w, n_x, n_w, delay, skip_x, skip_w, n_blocks):
    """Joint counts of ``(x[t + delay], w[t])`` over contiguous equal blocks.

    The overlap window is truncated to a multiple of ``n_blocks``; the
    result has shape ``(n_blocks, n_x, n_w)`` with int64 counts.  Symbols
    must already lie in ``[0, n_x)`` and ``[0, n_w)``.
    """
    x = np.ascontiguousarray(x, dtype=np.int64)
    w = np.ascontiguousarray(w, dtype=np.int64)
    counts = np.zeros((n_blocks, n_x, n_w), dtype=np.int64)
    t_lo = max(skip_w, skip_x - delay)
    t_hi = min(len(w), len(x) - delay)
    size = (t_hi - t_lo) // n_blocks if t_hi > t_lo else 0
    if size <= 0:
        return counts
    used = n_blocks * size
    xs = x[t_lo + delay : t_lo + delay + used]
    ws = w[t_lo : t_lo + used]
    flat = xs * n_w + ws
    for b in range(n_blocks):
        seg = flat[b * size : (b + 1) * size]
        counts[b] = np.bincount(seg, minlength=n_x * n_w).reshape(n_x, n_w)
    return counts
