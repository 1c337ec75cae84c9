"""Command line interface.

Exit codes: 0 success, 1 failed operating-point checks (reproduce),
2 usage errors, 3 runtime errors.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import kernels
from .cochleagram import (
    design_filterbank,
    extract_cochleagram,
    read_cochleagram,
    write_cochleagram,
    write_cochleagram_csv,
)
from .encoders import (
    BsaConfig,
    IscConfig,
    LifConfig,
    SodConfig,
    encode_channelwise,
    read_spike_matrix,
    write_spike_events_csv,
    write_spike_matrix,
)
from .errors import ParameterError, SpikeCodingError
from .harness import (
    DEFAULT_MASTER_SEED,
    TASKS,
    TaskSpec,
    build_stimulus,
    emit_outputs,
    filterbank_for,
    reproduce_task,
    run_sweep,
    run_task_point,
    sweep_spec_from_file,
)
from .infotheory import write_curve_csv, write_eval_json
from .stimulus import read_wav, write_level_track_csv, write_raw_float32, write_wav


def _runtime_error(exc) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(3)


def _encoder_config(encoder, gain, delta, taps, theta, tau):
    try:
        if encoder == "isc":
            return IscConfig(gain=gain)
        if encoder == "sod":
            return SodConfig(delta=delta)
        if encoder == "bsa":
            return BsaConfig(n_taps=taps, theta=theta)
        if encoder == "lif":
            return LifConfig(tau=tau, theta=theta)
    except ParameterError as exc:
        raise click.UsageError(str(exc))
    raise click.UsageError(f"unknown encoder {encoder!r}")


_encoder_options = [
    click.option("--encoder", type=click.Choice(["isc", "sod", "bsa", "lif"]), required=True),
    click.option("--gain", type=float, default=1.0, show_default=True, help="ISC rate gain."),
    click.option("--delta", type=float, default=0.05, show_default=True, help="SoD band half-width."),
    click.option("--taps", type=int, default=3, show_default=True, help="BSA filter length."),
    click.option("--theta", type=float, default=0.1, show_default=True, help="BSA/LIF threshold."),
    click.option("--tau", type=float, default=2.0, show_default=True, help="LIF time constant in frames."),
]


def _add_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return wrap


@click.group()
@click.version_option(package_name="spikecoding")
def main():
    """Sound-to-spike encoding and its information-theoretic evaluation."""


@main.command()
@click.option("--task", type=click.Choice(TASKS), default="frequency", show_default=True)
@click.option("--duration", type=float, default=10.0, show_default=True, help="Seconds.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="WAV output path.")
@click.option("--track-csv", type=click.Path(dir_okay=False), default=None, help="Also write the level track as CSV.")
@click.option("--raw", type=click.Path(dir_okay=False), default=None, help="Also write raw float32 samples.")
def stimulus(task, duration, seed, out, track_csv, raw):
    """Synthesize one stimulus waveform."""
    try:
        track, wave = build_stimulus(task, duration, seed)
        write_wav(out, wave)
        if track_csv:
            write_level_track_csv(track_csv, track)
        if raw:
            write_raw_float32(raw, wave)
    except (SpikeCodingError, OSError) as exc:
        _runtime_error(exc)
    click.echo(f"wrote {out} ({wave.duration:g} s, task={task}, seed={seed})")


@main.command()
@click.argument("wav_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--task", type=click.Choice(TASKS), default=None, help="Use this task's filterbank.")
@click.option("--channels", type=int, default=8, show_default=True)
@click.option("--f-lo", type=float, default=100.0, show_default=True)
@click.option("--f-hi", type=float, default=10000.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Binary cochleagram path.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Also write CSV.")
def cochleagram(wav_path, task, channels, f_lo, f_hi, out, csv_path):
    """Extract a cochleagram from a WAV file."""
    try:
        wave = read_wav(wav_path)
        if task is not None:
            bank = filterbank_for(task)
        else:
            bank = design_filterbank(channels, f_lo, f_hi, wave.sample_rate)
        coch = extract_cochleagram(wave, bank)
        write_cochleagram(out, coch)
        if csv_path:
            write_cochleagram_csv(csv_path, coch)
    except (SpikeCodingError, OSError) as exc:
        _runtime_error(exc)
    click.echo(
        f"wrote {out} ({coch.n_channels} channels x {coch.n_frames} frames)"
    )


@main.command()
@click.argument("cochleagram_path", type=click.Path(exists=True, dir_okay=False))
@_add_options(_encoder_options)
@click.option("--seed", type=int, default=0, show_default=True, help="ISC noise seed.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Binary spike matrix path.")
@click.option("--events-csv", type=click.Path(dir_okay=False), default=None, help="Also write spike events as CSV.")
def encode(cochleagram_path, encoder, gain, delta, taps, theta, tau, seed, out, events_csv):
    """Encode a cochleagram into spike trains."""
    config = _encoder_config(encoder, gain, delta, taps, theta, tau)
    try:
        coch = read_cochleagram(cochleagram_path)
        spikes = encode_channelwise(coch, config, seed=seed)
        write_spike_matrix(out, spikes)
        if events_csv:
            write_spike_events_csv(events_csv, spikes)
    except (SpikeCodingError, OSError) as exc:
        _runtime_error(exc)
    density = float(abs(spikes.values).mean())
    click.echo(f"wrote {out} ({config.label()}, density {density:.4f})")


@main.command()
@click.option("--task", type=click.Choice(TASKS), default="frequency", show_default=True)
@click.option("--duration", type=float, default=60.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Trial seed.")
@_add_options(_encoder_options)
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Evaluation JSON path.")
@click.option("--curve-csv", type=click.Path(dir_okay=False), default=None, help="Also write the delay curve.")
def evaluate(task, duration, seed, encoder, gain, delta, taps, theta, tau, cache_dir, out, curve_csv):
    """Run one end-to-end evaluation of a single encoder configuration."""
    config = _encoder_config(encoder, gain, delta, taps, theta, tau)
    try:
        spec = TaskSpec(task=task, duration=duration, n_trials=1, master_seed=seed)
        result = run_task_point(spec, config, seed, cache_dir)
        write_eval_json(out, result)
        if curve_csv:
            write_curve_csv(curve_csv, result.curve)
    except (SpikeCodingError, OSError) as exc:
        _runtime_error(exc)
    click.echo(
        f"wrote {out} (efficiency {result.efficiency:.4f}, "
        f"density {result.spike_density:.4f}, backend {kernels.BACKEND})"
    )


@main.command()
@click.option("--task", type=click.Choice(TASKS), required=True)
@click.option("--duration", type=float, default=300.0, show_default=True)
@click.option("--trials", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_MASTER_SEED, show_default=True)
@click.option("--grid-file", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON file overriding parameter grids.")
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--progress/--no-progress", default=True, show_default=True)
def sweep(task, duration, trials, seed, grid_file, out_dir, cache_dir, jobs, progress):
    """Sweep encoder parameter grids and write result tables."""
    try:
        spec = TaskSpec(task=task, duration=duration, n_trials=trials, master_seed=seed)
        grids = sweep_spec_from_file(grid_file) if grid_file else None
        result = run_sweep(
            spec, grids, cache_dir, jobs=jobs, progress=progress
        )
        emit_outputs(result, out_dir)
    except (SpikeCodingError, OSError) as exc:
        _runtime_error(exc)
    for family in ("isc", "sod", "bsa", "lif"):
        row = result.best_row(family)
        if row is None:
            click.echo(f"{family}: no successful rows")
        else:
            click.echo(
                f"{family}: best eps={row.eps_mean:.4f} at rho={row.rho_mean:.4f} ({row.label})"
            )
    click.echo(f"wrote {out_dir} in {result.elapsed_s:.1f} s (backend {result.backend})")


@main.command()
@click.argument("task", type=click.Choice(TASKS + ("all",)), default="all")
@click.option("--fast", is_flag=True, help="60 s, 3 trials, widened tolerances.")
@click.option("--seed", type=int, default=DEFAULT_MASTER_SEED, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--progress/--no-progress", default=False, show_default=True)
def reproduce(task, fast, seed, out_dir, cache_dir, jobs, progress):
    """Rerun the operating-point studies and check published targets."""
    tasks = TASKS if task == "all" else (task,)
    failed = False
    try:
        for t in tasks:
            report = reproduce_task(
                t,
                fast=fast,
                master_seed=seed,
                cache_dir=cache_dir,
                out_dir=out_dir,
                jobs=jobs,
                progress=progress,
            )
            for line in report.lines():
                click.echo(line)
            failed = failed or not report.passed
    except (SpikeCodingError, OSError) as exc:
        _runtime_error(exc)
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
