"""Level-track generation and FM/AM synthesis."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.signal import butter, filtfilt

from spikecoding.erb import erb_number
from spikecoding.errors import ParameterError
from spikecoding.stimulus import (
    LevelTrack,
    generate_level_track,
    map_to_erb_frequency,
    map_to_log_amplitude,
    read_level_track_csv,
    read_raw_float32,
    read_wav,
    synthesize_am,
    synthesize_fm,
    write_level_track_csv,
    write_raw_float32,
    write_wav,
)

FS = 32_000


def track_300s():
    # module-level cache, the 300 s track is reused by several tests
    if not hasattr(track_300s, "value"):
        track_300s.value = generate_level_track(8, 300.0, seed=12)
    return track_300s.value


def test_track_samples_bounded_and_piecewise_linear():
    track = generate_level_track(8, 2.0, seed=3)
    assert track.samples.min() >= 0.0
    assert track.samples.max() <= 1.0
    # every sample between two vertices lies on the connecting line
    idx = (track.vertex_times * FS).round().astype(int)
    lvl = track.vertex_levels / 7
    k = 5  # spot-check the 5th segment
    a, b = idx[k], min(idx[k + 1], len(track.samples) - 1)
    seg = track.samples[a : b + 1]
    expect = lvl[k] + (lvl[k + 1] - lvl[k]) * (np.arange(b - a + 1) / (idx[k + 1] - a))
    assert np.allclose(seg, expect)


def test_track_vertex_count_matches_duration_bounds():
    track = track_300s()
    n = len(track.vertex_levels)
    assert 15_000 <= n <= 30_000


def test_track_vertex_gaps_within_segment_bounds():
    track = track_300s()
    gaps = np.diff((track.vertex_times * FS).round().astype(int))
    assert gaps.min() >= round(0.010 * FS)
    assert gaps.max() <= round(0.020 * FS)


def test_track_steps_stay_or_move_one_level():
    track = track_300s()
    lv = track.vertex_levels
    steps = np.diff(lv)
    assert set(np.unique(steps)) <= {-1, 0, 1}
    assert lv.min() == 0 and lv.max() == 7
    # blocked boundary moves are redirected inward, never out of range
    assert np.all((lv >= 0) & (lv <= 7))


def test_track_holds_level_about_a_third_of_segments():
    steps = np.diff(track_300s().vertex_levels)
    stay = np.mean(steps == 0)
    assert 0.30 < stay < 0.37


def test_track_visits_every_level():
    track = track_300s()
    counts = np.bincount(track.vertex_levels, minlength=8)
    assert (counts / counts.sum() > 0.01).all()


def test_two_level_walk_alternates_on_moves():
    track = generate_level_track(2, 1.0, seed=4)
    assert set(np.unique(track.vertex_levels)) <= {0, 1}


def test_track_determinism():
    a = generate_level_track(8, 1.0, seed=7)
    b = generate_level_track(8, 1.0, seed=7)
    c = generate_level_track(8, 1.0, seed=8)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.vertex_levels, c.vertex_levels)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_levels=1),
        dict(duration=0.0),
        dict(segment_min=0.0),
        dict(segment_min=0.03, segment_max=0.02),
    ],
)
def test_track_parameter_errors(kwargs):
    with pytest.raises(ParameterError):
        generate_level_track(**dict(dict(n_levels=8, duration=1.0), **kwargs))


@settings(max_examples=20, deadline=None)
@given(
    n_levels=st.integers(2, 10),
    duration=st.floats(0.5, 2.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_track_invariants_hold_for_any_seed(n_levels, duration, seed):
    track = generate_level_track(n_levels, duration, seed=seed)
    lv = track.vertex_levels
    assert lv.min() >= 0 and lv.max() <= n_levels - 1
    assert set(np.unique(np.diff(lv))) <= {-1, 0, 1}
    assert 0.0 <= track.samples.min() and track.samples.max() <= 1.0
    gaps = np.diff((track.vertex_times * FS).round().astype(int))
    assert gaps.min() >= round(0.010 * FS) and gaps.max() <= round(0.020 * FS)


def constant_track(x, n=FS):
    samples = np.full(n, float(x))
    return LevelTrack(samples, np.array([0]), np.array([0.0]), 8)


def test_erb_frequency_mapping_endpoints():
    assert map_to_erb_frequency(constant_track(0.0), 100.0, 10_000.0)[0] == pytest.approx(100.0)
    assert map_to_erb_frequency(constant_track(1.0), 100.0, 10_000.0)[0] == pytest.approx(10_000.0)


def test_erb_frequency_mapping_midpoint_by_bisection():
    got = map_to_erb_frequency(constant_track(0.5), 100.0, 10_000.0)[0]
    target = 0.5 * (erb_number(100.0) + erb_number(10_000.0))
    ref = brentq(lambda f: erb_number(f) - target, 100.0, 10_000.0, xtol=1e-9)
    assert got == pytest.approx(ref, rel=1e-9)


def test_log_amplitude_mapping():
    assert map_to_log_amplitude(constant_track(0.0), 0.1, 1.0)[0] == pytest.approx(0.1)
    assert map_to_log_amplitude(constant_track(1.0), 0.1, 1.0)[0] == pytest.approx(1.0)
    assert map_to_log_amplitude(constant_track(0.5), 0.1, 1.0)[0] == pytest.approx(10**-0.5)
    with pytest.raises(ParameterError):
        map_to_log_amplitude(constant_track(0.5), 0.1, 0.1)


def test_fm_constant_frequency_is_pure_tone():
    wave = synthesize_fm(np.full(FS, 1000.0))
    spectrum = np.abs(np.fft.rfft(wave.samples))
    peak_hz = np.fft.rfftfreq(FS, 1 / FS)[spectrum.argmax()]
    assert peak_hz == pytest.approx(1000.0, abs=1.0)
    assert wave.samples[0] == pytest.approx(1.0)


def test_fm_zero_frequency_is_dc():
    wave = synthesize_fm(np.zeros(1000))
    assert np.allclose(wave.samples, 1.0)


def test_fm_ramp_zero_crossing_count():
    f = np.linspace(100.0, 200.0, FS)
    wave = synthesize_fm(f)
    crossings = np.count_nonzero(np.diff(np.signbit(wave.samples)))
    assert abs(crossings - 300) <= 2


def test_fm_rejects_nyquist():
    with pytest.raises(ParameterError):
        synthesize_fm(np.array([16_000.0]))


def test_am_peak_tracks_amplitude():
    assert np.abs(synthesize_am(np.ones(FS)).samples).max() == pytest.approx(1.0)
    assert np.abs(synthesize_am(np.full(FS, 0.1)).samples).max() == pytest.approx(0.1)
    assert np.all(synthesize_am(np.zeros(FS)).samples == 0.0)


def test_am_envelope_recovers_trajectory():
    track = generate_level_track(8, 4.0, seed=9)
    amp = map_to_log_amplitude(track, 0.1, 1.0)
    wave = synthesize_am(amp)
    # independent envelope estimate: full-wave rectify, zero-phase low-pass,
    # scale by pi/2 (mean of |cos|)
    b, a = butter(4, 50.0, fs=FS)
    env = filtfilt(b, a, np.abs(wave.samples)) * np.pi / 2
    keep = slice(int(0.05 * FS), None)
    err = np.sqrt(np.mean((env[keep] - amp[keep]) ** 2))
    assert err / np.sqrt(np.mean(amp[keep] ** 2)) < 0.05


def test_waveform_io_round_trips(tmp_path):
    wave = synthesize_am(np.linspace(0.1, 1.0, 2048))
    write_wav(tmp_path / "a.wav", wave)
    back = read_wav(tmp_path / "a.wav")
    assert back.sample_rate == FS
    assert np.allclose(back.samples, wave.samples, atol=1e-7)

    write_raw_float32(tmp_path / "a.raw", wave)
    raw = read_raw_float32(tmp_path / "a.raw")
    assert np.allclose(raw.samples, wave.samples, atol=1e-7)


def test_level_track_csv_round_trip(tmp_path):
    track = generate_level_track(8, 0.05, seed=2)
    write_level_track_csv(tmp_path / "t.csv", track)
    back = read_level_track_csv(tmp_path / "t.csv")
    assert np.allclose(back.samples, track.samples, atol=1e-8)
