"""Pure and compiled kernels must agree bit for bit."""

import numpy as np
import pytest

from spikecoding import kernels
from spikecoding.encoders import design_bsa_filter

BACKENDS = kernels.available_backends()
PAIRED = len(BACKENDS) == 2
needs_native = pytest.mark.skipif(
    not PAIRED, reason="compiled extension not built; nothing to compare"
)

rng = np.random.default_rng(99)
cases = [rng.random(rng.integers(1, 400)) for _ in range(25)]


def test_backend_is_reported():
    assert kernels.BACKEND in BACKENDS


@needs_native
@pytest.mark.parametrize("case", range(len(cases)))
def test_encoder_kernels_bit_equal_across_backends(case):
    z = cases[case]
    u = np.random.default_rng(case).random(len(z))
    pure, native = BACKENDS["pure"], BACKENDS["native"]

    for gain in (0.0, 0.7, 3.0):
        assert np.array_equal(
            pure.isc_encode(z, gain, u), native.isc_encode(z, gain, u)
        )
    for delta in (0.01, 0.2):
        assert np.array_equal(pure.sod_encode(z, delta), native.sod_encode(z, delta))
    for m in (1, 3, 9):
        h = design_bsa_filter(m)
        for theta in (0.0, 0.3):
            assert np.array_equal(
                pure.bsa_encode(z, h, theta), native.bsa_encode(z, h, theta)
            )
    for decay in (0.0, 0.6065306597126334):
        for theta in (0.2, 1.0):
            assert np.array_equal(
                pure.lif_encode(z, decay, theta), native.lif_encode(z, decay, theta)
            )


@needs_native
def test_count_kernel_bit_equal_across_backends():
    g = np.random.default_rng(5)
    x = g.integers(0, 8, size=5000)
    w = g.integers(0, 11, size=4800)
    pure, native = BACKENDS["pure"], BACKENDS["native"]
    for delay in (-70, -1, 0, 1, 70):
        for n_blocks in (1, 2, 4):
            a = pure.delay_block_counts(x, w, 8, 11, delay, 50, 50, n_blocks)
            b = native.delay_block_counts(x, w, 8, 11, delay, 50, 50, n_blocks)
            assert np.array_equal(a, b)


def brute_counts(x, w, n_x, n_w, delay, skip_x, skip_w, n_blocks):
    # quadratic-time oracle, pairs collected one by one
    t_lo = max(skip_w, skip_x - delay)
    t_hi = min(len(w), len(x) - delay)
    pairs = [(x[t + delay], w[t]) for t in range(t_lo, t_hi)]
    size = len(pairs) // n_blocks
    counts = np.zeros((n_blocks, n_x, n_w), dtype=np.int64)
    for b in range(n_blocks):
        for xv, wv in pairs[b * size : (b + 1) * size]:
            counts[b, xv, wv] += 1
    return counts


@pytest.mark.parametrize("delay", [-30, -3, 0, 3, 30])
@pytest.mark.parametrize("n_blocks", [1, 3, 4])
def test_count_kernel_matches_brute_force(delay, n_blocks):
    g = np.random.default_rng(delay + 100 * n_blocks)
    x = g.integers(0, 5, size=700)
    w = g.integers(0, 7, size=650)
    got = kernels.delay_block_counts(x, w, 5, 7, delay, 50, 50, n_blocks)
    ref = brute_counts(x, w, 5, 7, delay, 50, 50, n_blocks)
    assert np.array_equal(got, ref)


def test_count_kernel_empty_overlap_is_all_zero():
    x = np.zeros(60, dtype=np.int64)
    w = np.zeros(60, dtype=np.int64)
    got = kernels.delay_block_counts(x, w, 2, 2, 59, 50, 50, 4)
    assert got.shape == (4, 2, 2)
    assert got.sum() == 0
