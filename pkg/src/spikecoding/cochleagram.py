"""Gammatone cochleagrams.

A waveform is passed through a bank of 4th-order gammatone filters spaced
on the ERB scale, then each channel is half-wave rectified, cube-root
compressed, low-pass filtered at 10 Hz and decimated to the 1 kHz frame
rate.  Each channel is normalized so its largest value is 1.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .erb import erb_bandwidth, erbspace
from .errors import DegenerateInputError, ParameterError
from .stimulus import SAMPLE_RATE, Waveform

FRAME_RATE = 1000.0
BANDWIDTH_FACTOR = 1.019
IHC_CUTOFF_HZ = 10.0

_MAGIC = b"CGRM"


@dataclass
class FilterBankSpec:
    """Center frequencies and shared parameters of a gammatone bank."""

    center_freqs: np.ndarray
    filter_order: int = 4
    sample_rate: int = SAMPLE_RATE

    @property
    def n_channels(self) -> int:
        return len(self.center_freqs)


@dataclass
class Cochleagram:
    """Channel-by-frame matrix of normalized cochlear activation in [0, 1]."""

    values: np.ndarray  # shape (n_channels, n_frames)
    frame_rate: float
    center_freqs: np.ndarray

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def design_filterbank(
    n_channels: int,
    f_lo: float,
    f_hi: float,
    sample_rate: int = SAMPLE_RATE,
    filter_order: int = 4,
) -> FilterBankSpec:
    """Place ``n_channels`` gammatone filters from ``f_lo`` to ``f_hi``.

    Center frequencies are equally spaced in ERB number with both endpoints
    included.  A single-channel bank requires ``f_lo == f_hi``.
    """
    if filter_order < 1:
        raise ParameterError("filter order must be at least 1")
    if f_hi >= sample_rate / 2:
        raise ParameterError("f_hi must be below the Nyquist frequency")
    cfs = erbspace(f_lo, f_hi, n_channels)
    return FilterBankSpec(
        center_freqs=cfs, filter_order=filter_order, sample_rate=sample_rate
    )


def _gammatone_pole(cf: float, sample_rate: float) -> complex:
    # impulse-invariant pole of one complex first-order resonator section
    bw = BANDWIDTH_FACTOR * float(erb_bandwidth(cf))
    radius = np.exp(-2.0 * np.pi * bw / sample_rate)
    return radius * np.exp(2j * np.pi * cf / sample_rate)


def _cascade_peak_gain(pole: complex, order: int, cf: float, sample_rate: float):
    # gain of the real part of the cascade at the center frequency
    w = 2.0 * np.pi * cf / sample_rate
    h_pos = (1.0 / (1.0 - pole * np.exp(-1j * w))) ** order
    h_neg = (1.0 / (1.0 - pole * np.exp(1j * w))) ** order
    return abs(h_pos + np.conj(h_neg)) / 2.0


def gammatone_response(
    waveform: Waveform, cf: float, filter_order: int = 4
) -> np.ndarray:
    """Band-pass the waveform with one gammatone filter, unit gain at ``cf``.

    The filter is a cascade of ``filter_order`` identical complex one-pole
    resonators; the real part of the cascade output is the band-passed
    signal.  The pole follows the impulse-invariant mapping of a gammatone
    with bandwidth 1.019 ERB at ``cf``.
    """
    if not 0 < cf < waveform.sample_rate / 2:
        raise ParameterError("center frequency must lie in (0, sample_rate / 2)")
    pole = _gammatone_pole(cf, waveform.sample_rate)
    b = np.array([1.0 + 0j])
    a = np.array([1.0 + 0j, -pole])
    y = np.asarray(waveform.samples, dtype=np.complex128)
    for _ in range(filter_order):
        y = lfilter(b, a, y)
    gain = _cascade_peak_gain(pole, filter_order, cf, waveform.sample_rate)
    return y.real / gain


def _ihc_smoothing_coeffs(sample_rate: float) -> tuple[list, list]:
    # One-pole exponential low-pass, unit DC gain.  First order settles much
    # faster than higher-order designs with the same cutoff, which matters
    # because the envelope has to track 10-20 ms stimulus segments.
    pole = np.exp(-2.0 * np.pi * IHC_CUTOFF_HZ / sample_rate)
    return [1.0 - pole], [1.0, -pole]


def inner_hair_cell(band_signal: np.ndarray, sample_rate: int = SAMPLE_RATE):
    """Half-wave rectify, cube-root compress and smooth one band signal.

    Rectification comes first, then the cube root, then a causal first-order
    low-pass at 10 Hz with unit DC gain.  The smoother's impulse response is
    nonnegative, so the envelope never undershoots zero.
    """
    x = np.asarray(band_signal, dtype=float)
    compressed = np.cbrt(np.maximum(x, 0.0))
    b, a = _ihc_smoothing_coeffs(sample_rate)
    return lfilter(b, a, compressed)


def extract_cochleagram(waveform: Waveform, spec: FilterBankSpec) -> Cochleagram:
    """Run the full filterbank and inner hair cell chain on a waveform.

    Each channel is decimated by plain sample picking down to the 1 kHz
    frame rate and normalized to a maximum of 1.  Normalization is per
    channel: residual carrier ripple passes the 10 Hz smoother much more
    strongly in low-frequency channels, and a shared scale would let that
    ripple deflate every other channel.  A channel with no energy has no
    scale and raises ``DegenerateInputError``.
    """
    if waveform.sample_rate != spec.sample_rate:
        raise ParameterError("waveform and filterbank sample rates differ")
    step = waveform.sample_rate / FRAME_RATE
    if step != int(step) or step < 1:
        raise ParameterError("sample rate must be an integer multiple of 1 kHz")
    step = int(step)
    rows = []
    for cf in spec.center_freqs:
        band = gammatone_response(waveform, cf, spec.filter_order)
        rows.append(inner_hair_cell(band, waveform.sample_rate)[::step])
    values = np.stack(rows)
    peaks = values.max(axis=1, keepdims=True)
    if (peaks <= 0.0).any():
        raise DegenerateInputError("silent channel, cochleagram has no scale")
    return Cochleagram(
        values=values / peaks,
        frame_rate=FRAME_RATE,
        center_freqs=np.asarray(spec.center_freqs, dtype=float),
    )


def write_cochleagram_csv(path, coch: Cochleagram) -> None:
    """Write frames as CSV rows: ``frame_index, ch0, ch1, ...``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["frame_index"] + [f"ch{i}" for i in range(coch.n_channels)]
        )
        for t in range(coch.n_frames):
            writer.writerow(
                [t] + [f"{v:.9g}" for v in coch.values[:, t]]
            )


def read_cochleagram_csv(path, frame_rate: float = FRAME_RATE) -> Cochleagram:
    data = np.atleast_2d(np.genfromtxt(path, delimiter=",", skip_header=1))
    return Cochleagram(
        values=data[:, 1:].T.copy(),
        frame_rate=frame_rate,
        center_freqs=np.array([]),
    )


def write_cochleagram(path, coch: Cochleagram) -> None:
    """Write the compact binary form (float32, row-major frames per channel)."""
    header = struct.pack(
        "<4sIIQd",
        _MAGIC,
        1,
        coch.n_channels,
        coch.n_frames,
        float(coch.frame_rate),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.asarray(coch.center_freqs, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(coch.values, dtype="<f4").tobytes())


def read_cochleagram(path) -> Cochleagram:
    head_fmt = "<4sIIQd"
    head_size = struct.calcsize(head_fmt)
    with open(path, "rb") as fh:
        head = fh.read(head_size)
        if len(head) < head_size:
            raise ParameterError("not a cochleagram file")
        magic, version, n_ch, n_frames, frame_rate = struct.unpack(head_fmt, head)
        if magic != _MAGIC:
            raise ParameterError("not a cochleagram file")
        if version != 1:
            raise ParameterError(f"unsupported cochleagram version {version}")
        cfs = np.frombuffer(fh.read(8 * n_ch), dtype="<f8").copy()
        data = np.frombuffer(fh.read(4 * n_ch * n_frames), dtype="<f4")
    if len(data) != n_ch * n_frames:
        raise ParameterError("truncated cochleagram file")
    values = data.reshape(n_ch, n_frames).astype(float)
    return Cochleagram(values=values, frame_rate=frame_rate, center_freqs=cfs)
