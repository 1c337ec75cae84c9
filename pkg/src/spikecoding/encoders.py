"""Four sound-to-spike encoders operating on cochleagram channels.

All encoders consume one nonnegative activation trace at the 1 kHz frame
rate and emit one spike symbol per frame: 0/1 for the unipolar encoders
(ISC, BSA, LIF) and -1/0/+1 for send-on-delta.  Input traces are never
mutated.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels
from .cochleagram import FRAME_RATE, Cochleagram
from .errors import ParameterError, SpikeCodingError
from .rng import derive_seed, rng_for

_MAGIC = b"SPKM"


@dataclass(frozen=True)
class IscConfig:
    """Independent spike coder: Bernoulli rate ``min(z * gain, 1)`` per frame."""

    gain: float

    family = "isc"
    polarity = "unipolar"

    def __post_init__(self):
        if self.gain < 0:
            raise ParameterError("isc gain must be nonnegative")

    def label(self) -> str:
        return f"isc(gain={self.gain:g})"


@dataclass(frozen=True)
class SodConfig:
    """Send-on-delta: signed spike when z leaves a +-delta band."""

    delta: float

    family = "sod"
    polarity = "bipolar"

    def __post_init__(self):
        if self.delta <= 0:
            raise ParameterError("sod delta must be positive")

    def label(self) -> str:
        return f"sod(delta={self.delta:g})"


@dataclass(frozen=True)
class BsaConfig:
    """Ben's spiker algorithm with an ``n_taps``-point low-pass FIR filter."""

    n_taps: int
    theta: float
    cutoff_hz: float = 10.0

    family = "bsa"
    polarity = "unipolar"

    def __post_init__(self):
        if self.n_taps < 1:
            raise ParameterError("bsa filter needs at least one tap")
        if self.theta < 0:
            raise ParameterError("bsa theta must be nonnegative")

    def label(self) -> str:
        return f"bsa(n_taps={self.n_taps}, theta={self.theta:g})"


@dataclass(frozen=True)
class LifConfig:
    """Leaky integrate-and-fire with time constant ``tau`` in frames."""

    tau: float
    theta: float

    family = "lif"
    polarity = "unipolar"

    def __post_init__(self):
        if self.tau < 0:
            raise ParameterError("lif tau must be nonnegative")
        if self.theta <= 0:
            raise ParameterError("lif theta must be positive")

    def label(self) -> str:
        return f"lif(tau={self.tau:g}, theta={self.theta:g})"


EncoderConfig = Union[IscConfig, SodConfig, BsaConfig, LifConfig]


@dataclass
class SpikeMatrix:
    """Spike symbols per channel and frame.

    ``values`` is int8 with entries in {0, 1} (unipolar) or {-1, 0, 1}
    (bipolar).
    """

    values: np.ndarray  # shape (n_channels, n_frames)
    frame_rate: float
    polarity: str
    encoder_label: str = ""

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def encode_isc(z, gain: float, seed: int = 0) -> np.ndarray:
    """Encode one trace with the independent spike coder.

    Each frame spikes independently with probability ``min(z[t] * gain, 1)``.
    The comparison ``uniform < z * gain`` realizes the clamp without ever
    computing it.
    """
    if gain < 0:
        raise ParameterError("isc gain must be nonnegative")
    z = np.ascontiguousarray(z, dtype=np.float64)
    uniforms = rng_for(seed, "isc").random(len(z))
    return kernels.isc_encode(z, gain, uniforms)


def encode_sod(z, delta: float) -> np.ndarray:
    """Encode one trace with send-on-delta.

    The baseline starts at ``z[0]`` and steps by exactly ``delta`` per
    emitted spike, so ``z[0] + delta * cumsum(w)`` reconstructs it.
    """
    if delta <= 0:
        raise ParameterError("sod delta must be positive")
    z = np.ascontiguousarray(z, dtype=np.float64)
    if len(z) == 0:
        raise ParameterError("cannot encode an empty trace")
    return kernels.sod_encode(z, delta)


def sod_baseline(z0: float, delta: float, train: np.ndarray) -> np.ndarray:
    """Baseline value after each frame implied by a send-on-delta train."""
    return z0 + delta * np.cumsum(train.astype(np.int64))


def verify_sod_reconstruction(z, delta: float, train: np.ndarray) -> None:
    """Check a send-on-delta train against its defining inequalities.

    Recomputes the baseline from the spike count identity and confirms every
    emitted symbol is forced by the strict threshold comparisons.  Raises
    ``SpikeCodingError`` on the first inconsistency; used as an online
    self-check wherever send-on-delta output is produced.
    """
    z = np.asarray(z, dtype=np.float64)
    steps = np.cumsum(train.astype(np.int64))
    before = z[0] + delta * (steps - train)  # baseline entering each frame
    diff = z - before
    bad_up = (train == 1) & ~(diff > delta)
    bad_down = (train == -1) & ~(diff < -delta)
    bad_zero = (train == 0) & ((diff > delta) | (diff < -delta))
    if bad_up.any() or bad_down.any() or bad_zero.any():
        t = int(np.flatnonzero(bad_up | bad_down | bad_zero)[0])
        raise SpikeCodingError(
            f"send-on-delta reconstruction check failed at frame {t}"
        )


def design_bsa_filter(
    n_taps: int, cutoff_hz: float = 10.0, frame_rate: float = FRAME_RATE
) -> np.ndarray:
    """Low-pass FIR filter for Ben's spiker algorithm.

    Hamming-windowed sinc with the given cutoff, clipped at zero and
    normalized to unit sum, so every tap is nonnegative and thresholds are
    directly comparable across filter lengths.
    """
    if n_taps < 1:
        raise ParameterError("bsa filter needs at least one tap")
    if not 0 < cutoff_hz < frame_rate / 2:
        raise ParameterError("cutoff must lie in (0, frame_rate / 2)")
    n = np.arange(n_taps, dtype=float) - (n_taps - 1) / 2.0
    fc = cutoff_hz / frame_rate
    taps = 2.0 * fc * np.sinc(2.0 * fc * n)
    taps = taps * np.hamming(n_taps)
    taps = np.clip(taps, 0.0, None)
    return taps / taps.sum()


def encode_bsa(z, taps, theta: float) -> np.ndarray:
    """Encode one trace with Ben's spiker algorithm."""
    taps = np.ascontiguousarray(taps, dtype=np.float64)
    if len(taps) < 1:
        raise ParameterError("bsa filter needs at least one tap")
    if theta < 0:
        raise ParameterError("bsa theta must be nonnegative")
    z = np.ascontiguousarray(z, dtype=np.float64)
    return kernels.bsa_encode(z, taps, theta)


def encode_lif(z, tau: float, theta: float) -> np.ndarray:
    """Encode one trace with a leaky integrate-and-fire unit.

    ``tau`` is the membrane time constant in frames; the per-frame decay is
    ``exp(-1 / tau)``, and ``tau = 0`` means no memory at all.  The membrane
    starts at ``z[0]``, accumulates the input each frame, and resets to zero
    whenever it reaches ``theta``.
    """
    if tau < 0:
        raise ParameterError("lif tau must be nonnegative")
    if theta <= 0:
        raise ParameterError("lif theta must be positive")
    z = np.ascontiguousarray(z, dtype=np.float64)
    if len(z) == 0:
        raise ParameterError("cannot encode an empty trace")
    decay = 0.0 if tau == 0 else math.exp(-1.0 / tau)
    return kernels.lif_encode(z, decay, theta)


def encode_channelwise(
    coch: Cochleagram,
    config: EncoderConfig,
    seed: int = 0,
    check: bool = True,
) -> SpikeMatrix:
    """Encode every cochleagram channel independently with one configuration.

    The stochastic encoder draws an independent stream per channel, derived
    from ``seed`` and the channel index.  With ``check`` enabled,
    send-on-delta output is verified against its reconstruction identity.
    """
    rows = []
    for c, z in enumerate(coch.values):
        if isinstance(config, IscConfig):
            train = encode_isc(z, config.gain, derive_seed(seed, "channel", c))
        elif isinstance(config, SodConfig):
            train = encode_sod(z, config.delta)
            if check:
                verify_sod_reconstruction(z, config.delta, train)
        elif isinstance(config, BsaConfig):
            taps = design_bsa_filter(config.n_taps, config.cutoff_hz, coch.frame_rate)
            train = encode_bsa(z, taps, config.theta)
        elif isinstance(config, LifConfig):
            train = encode_lif(z, config.tau, config.theta)
        else:
            raise ParameterError(f"unknown encoder configuration {config!r}")
        rows.append(train)
    return SpikeMatrix(
        values=np.stack(rows),
        frame_rate=coch.frame_rate,
        polarity=config.polarity,
        encoder_label=config.label(),
    )


def write_spike_events_csv(path, spikes: SpikeMatrix) -> None:
    """Write nonzero spikes as ``channel, frame, sign`` rows.

    A comment line carries the dimensions so the dense matrix can be
    rebuilt, including trailing silent frames.
    """
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# channels={spikes.n_channels} frames={spikes.n_frames}"
            f" frame_rate={spikes.frame_rate:g} polarity={spikes.polarity}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["channel", "frame", "sign"])
        chans, frames = np.nonzero(spikes.values)
        for c, t in zip(chans, frames):
            writer.writerow([c, t, int(spikes.values[c, t])])


def read_spike_events_csv(path) -> SpikeMatrix:
    with open(path, "r", newline="") as fh:
        meta_line = fh.readline()
        if not meta_line.startswith("#"):
            raise ParameterError("missing spike matrix metadata line")
        meta = dict(item.split("=") for item in meta_line[1:].split())
        reader = csv.reader(fh)
        next(reader)  # header row
        values = np.zeros(
            (int(meta["channels"]), int(meta["frames"])), dtype=np.int8
        )
        for row in reader:
            if not row:
                continue
            c, t, sign = int(row[0]), int(row[1]), int(row[2])
            values[c, t] = sign
    return SpikeMatrix(
        values=values,
        frame_rate=float(meta["frame_rate"]),
        polarity=meta["polarity"],
    )


def write_spike_matrix(path, spikes: SpikeMatrix) -> None:
    """Write the dense binary form (int8 symbols, row-major)."""
    polarity_flag = 1 if spikes.polarity == "bipolar" else 0
    header = struct.pack(
        "<4sIIQdB",
        _MAGIC,
        1,
        spikes.n_channels,
        spikes.n_frames,
        float(spikes.frame_rate),
        polarity_flag,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(spikes.values, dtype=np.int8).tobytes())


def read_spike_matrix(path) -> SpikeMatrix:
    head_fmt = "<4sIIQdB"
    head_size = struct.calcsize(head_fmt)
    with open(path, "rb") as fh:
        head = fh.read(head_size)
        if len(head) < head_size:
            raise ParameterError("not a spike matrix file")
        magic, version, n_ch, n_frames, frame_rate, polarity_flag = struct.unpack(
            head_fmt, head
        )
        if magic != _MAGIC:
            raise ParameterError("not a spike matrix file")
        if version != 1:
            raise ParameterError(f"unsupported spike matrix version {version}")
        data = np.frombuffer(fh.read(n_ch * n_frames), dtype=np.int8)
    if len(data) != n_ch * n_frames:
        raise ParameterError("truncated spike matrix file")
    return SpikeMatrix(
        values=data.reshape(n_ch, n_frames).copy(),
        frame_rate=frame_rate,
        polarity="bipolar" if polarity_flag else "unipolar",
    )
