"""ERB scale conversions and seeded stream derivation."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spikecoding.erb import erb_bandwidth, erb_number, erb_number_to_hz, erbspace
from spikecoding.errors import ParameterError
from spikecoding.rng import derive_seed, rng_for


def test_erb_bandwidth_reference_points():
    # closed form: 24.7 * (4.37 * f / 1000 + 1)
    assert erb_bandwidth(0.0) == pytest.approx(24.7)
    assert erb_bandwidth(1000.0) == pytest.approx(24.7 * 5.37)
    assert erb_bandwidth(10_000.0) == pytest.approx(24.7 * 44.7)


def test_erb_number_reference_points():
    assert erb_number(0.0) == pytest.approx(0.0)
    assert erb_number(1000.0) == pytest.approx(21.4 * np.log10(5.37))
    with pytest.raises(ParameterError):
        erb_number(-1.0)


@given(st.floats(0.0, 20_000.0))
def test_erb_number_round_trip(f):
    assert erb_number_to_hz(erb_number(f)) == pytest.approx(f, abs=1e-6)


def test_erb_number_is_monotone():
    f = np.linspace(0.0, 20_000.0, 1000)
    assert (np.diff(erb_number(f)) > 0).all()


def test_erbspace_endpoints_and_spacing():
    freqs = erbspace(100.0, 10_000.0, 8)
    assert freqs[0] == 100.0 and freqs[-1] == 10_000.0
    assert (np.diff(freqs) > 0).all()
    steps = np.diff(erb_number(freqs))
    assert np.allclose(steps, steps[0])


def test_erbspace_degenerate_cases():
    assert erbspace(500.0, 500.0, 1) == pytest.approx([500.0])
    with pytest.raises(ParameterError):
        erbspace(100.0, 200.0, 1)
    with pytest.raises(ParameterError):
        erbspace(200.0, 100.0, 4)
    with pytest.raises(ParameterError):
        erbspace(0.0, 100.0, 4)


def test_derive_seed_is_deterministic_and_tag_sensitive():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    assert derive_seed(1, "a", 2) != derive_seed(1, "a", 3)
    assert derive_seed(1, "a") != derive_seed(2, "a")
    assert derive_seed(1, "a", "b") != derive_seed(1, "ab")


def test_rng_streams_are_independent_of_consumption_order():
    a1 = rng_for(5, "one").normal(size=4)
    b1 = rng_for(5, "two").normal(size=4)
    b2 = rng_for(5, "two").normal(size=4)
    assert np.array_equal(b1, b2)
    assert not np.array_equal(a1, b1)
