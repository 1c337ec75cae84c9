"""Synthetic FM and AM test sounds driven by a random level track.

The hidden characteristic of every stimulus is a piecewise linear track
x(t) in [0, 1]: a reflecting random walk over a small set of discrete
levels, holding each segment for a random 10 to 20 ms before ramping
linearly to the next level.  The track modulates either the instantaneous
frequency of a tone (frequency task) or the amplitude of a fixed carrier
(amplitude task).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.io.wavfile

from .erb import erb_number, erb_number_to_hz
from .errors import ParameterError
from .rng import rng_for

SAMPLE_RATE = 32_000


@dataclass
class LevelTrack:
    """Piecewise linear characteristic x(t) sampled at audio rate.

    Attributes
    ----------
    samples : ndarray
        x(t) in [0, 1], one value per audio sample.
    vertex_levels : ndarray
        Integer walk level at each vertex.
    vertex_times : ndarray
        Vertex positions in seconds; the last vertex may lie past the end.
    n_levels : int
        Number of discrete walk levels.
    """

    samples: np.ndarray
    vertex_levels: np.ndarray
    vertex_times: np.ndarray
    n_levels: int
    sample_rate: int = SAMPLE_RATE

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class Waveform:
    """Audio samples plus rate; ``kind`` records how it was synthesized."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE
    kind: str = "unknown"

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def generate_level_track(
    n_levels: int = 8,
    duration: float = 300.0,
    segment_min: float = 0.010,
    segment_max: float = 0.020,
    seed: int = 0,
    sample_rate: int = SAMPLE_RATE,
) -> LevelTrack:
    """Generate the random characteristic x(t).

    The walk starts at a uniformly random level and draws each step
    uniformly from {-1, 0, +1}, so about one third of the segments hold the
    current level; a blocked boundary move is replaced by the inward move.
    This keeps the stationary level occupancy proportional to
    (1, 2, ..., 2, 1).  Segment durations are uniform in
    ``[segment_min, segment_max]`` seconds, rounded to the nearest audio
    sample.  Levels are normalized to [0, 1] and neighbouring vertices are
    joined by linear interpolation.

    The same ``seed`` always yields the identical track.
    """
    if n_levels < 2:
        raise ParameterError("need at least two walk levels")
    if duration <= 0:
        raise ParameterError("duration must be positive")
    if not 0 < segment_min <= segment_max:
        raise ParameterError("need 0 < segment_min <= segment_max")
    rng = rng_for(seed, "level-track")
    n_samples = int(round(duration * sample_rate))

    level = int(rng.integers(n_levels))
    levels = [level]
    vertex_idx = [0]
    t = 0
    while t < n_samples:
        t += int(round(rng.uniform(segment_min, segment_max) * sample_rate))
        step = int(rng.integers(3)) - 1
        if level == 0 and step == -1:
            step = 1
        elif level == n_levels - 1 and step == 1:
            step = -1
        level += step
        vertex_idx.append(t)
        levels.append(level)

    levels = np.asarray(levels, dtype=np.int64)
    vertex_idx = np.asarray(vertex_idx, dtype=np.int64)
    samples = np.interp(
        np.arange(n_samples, dtype=float), vertex_idx, levels / (n_levels - 1)
    )
    return LevelTrack(
        samples=samples,
        vertex_levels=levels,
        vertex_times=vertex_idx / sample_rate,
        n_levels=n_levels,
        sample_rate=sample_rate,
    )


def map_to_erb_frequency(track: LevelTrack, f_min: float, f_max: float) -> np.ndarray:
    """Map x(t) to a frequency trajectory equally spaced on the ERB scale.

    x = 0 maps to ``f_min``, x = 1 to ``f_max``, intermediate values land at
    the proportional position in ERB number.
    """
    if not 0 < f_min < f_max:
        raise ParameterError("need 0 < f_min < f_max")
    e_lo = erb_number(f_min)
    e_hi = erb_number(f_max)
    return erb_number_to_hz(e_lo + track.samples * (e_hi - e_lo))


def map_to_log_amplitude(track: LevelTrack, a_min: float, a_max: float) -> np.ndarray:
    """Map x(t) to an amplitude trajectory spaced uniformly in log amplitude."""
    if not 0 < a_min < a_max:
        raise ParameterError("need 0 < a_min < a_max")
    return a_min * np.power(a_max / a_min, track.samples)


def synthesize_fm(
    freq_trajectory: np.ndarray, sample_rate: int = SAMPLE_RATE
) -> Waveform:
    """Unit-amplitude cosine whose instantaneous frequency follows the trajectory.

    The phase is the cumulative sum of the per-sample phase increments,
    starting from zero, so the waveform is continuous for any trajectory.
    """
    f = np.asarray(freq_trajectory, dtype=float)
    if np.any(f < 0) or np.any(f >= sample_rate / 2):
        raise ParameterError("frequencies must lie in [0, sample_rate / 2)")
    phase = np.zeros(len(f))
    if len(f) > 1:
        phase[1:] = np.cumsum(2.0 * np.pi * f[:-1] / sample_rate)
    return Waveform(np.cos(phase), sample_rate, kind="fm")


def synthesize_am(
    amp_trajectory: np.ndarray,
    carrier_freq: float = 1000.0,
    sample_rate: int = SAMPLE_RATE,
) -> Waveform:
    """Cosine carrier at ``carrier_freq`` multiplied by the amplitude trajectory."""
    a = np.asarray(amp_trajectory, dtype=float)
    if np.any(a < 0):
        raise ParameterError("amplitudes must be nonnegative")
    if not 0 <= carrier_freq < sample_rate / 2:
        raise ParameterError("carrier must lie in [0, sample_rate / 2)")
    n = np.arange(len(a), dtype=float)
    samples = a * np.cos(2.0 * np.pi * carrier_freq * n / sample_rate)
    return Waveform(samples, sample_rate, kind="am")


def write_wav(path, waveform: Waveform) -> None:
    """Write the waveform as 32-bit float WAV."""
    scipy.io.wavfile.write(
        path, waveform.sample_rate, waveform.samples.astype(np.float32)
    )


def read_wav(path) -> Waveform:
    rate, samples = scipy.io.wavfile.read(path)
    return Waveform(np.asarray(samples, dtype=float), int(rate), kind="file")


def write_raw_float32(path, waveform: Waveform) -> None:
    """Write bare little-endian float32 samples, no header."""
    waveform.samples.astype("<f4").tofile(path)


def read_raw_float32(path, sample_rate: int = SAMPLE_RATE) -> Waveform:
    samples = np.fromfile(path, dtype="<f4").astype(float)
    return Waveform(samples, sample_rate, kind="file")


def write_level_track_csv(path, track: LevelTrack) -> None:
    """Write the track as CSV with columns ``time_s, level_normalized``."""
    times = np.arange(len(track.samples)) / track.sample_rate
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "level_normalized"])
        for t, x in zip(times, track.samples):
            writer.writerow([f"{t:.9g}", f"{x:.9g}"])


def read_level_track_csv(path, n_levels: int = 8, sample_rate: int = SAMPLE_RATE):
    """Read back a track CSV; vertex information is not reconstructed."""
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    return LevelTrack(
        samples=data[:, 1].copy(),
        vertex_levels=np.array([], dtype=np.int64),
        vertex_times=np.array([]),
        n_levels=n_levels,
        sample_rate=sample_rate,
    )
