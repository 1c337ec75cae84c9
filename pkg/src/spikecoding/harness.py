"""End-to-end experiment orchestration.

Builds the frequency and amplitude coding tasks from scratch (stimulus,
cochleagram, encoders, information estimates), sweeps encoder parameter
grids over independent trials, aggregates operating points, and checks the
published operating-point targets.
"""

from __future__ import annotations

import json
import math
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .cochleagram import (
    Cochleagram,
    FilterBankSpec,
    design_filterbank,
    extract_cochleagram,
    read_cochleagram,
    write_cochleagram,
)
from .encoders import (
    BsaConfig,
    EncoderConfig,
    IscConfig,
    LifConfig,
    SodConfig,
    encode_channelwise,
)
from .errors import ParameterError, SpikeCodingError
from .infotheory import (
    EvalResult,
    SymbolSequence,
    build_history_words,
    build_population_words,
    evaluate_coding,
    quantize_characteristic,
)
from .rng import derive_seed
from .stimulus import (
    generate_level_track,
    map_to_erb_frequency,
    map_to_log_amplitude,
    synthesize_am,
    synthesize_fm,
)

DEFAULT_MASTER_SEED = 1729

N_LEVELS = 8
FREQ_CHANNELS = 8
FREQ_LO_HZ = 100.0
FREQ_HI_HZ = 10_000.0
AMP_LO = 0.1
AMP_HI = 1.0
AM_CARRIER_HZ = 1000.0
HISTORY_WINDOW = 8

TASKS = ("frequency", "amplitude")

FULL_DURATION_S = 300.0
FULL_TRIALS = 5
FAST_DURATION_S = 60.0
FAST_TRIALS = 3
FAST_SLACK = 0.08


def _log_grid(lo: float, hi: float, n: int) -> tuple:
    return tuple(float(v) for v in np.logspace(math.log10(lo), math.log10(hi), n))


def _lin_grid(lo: float, hi: float, n: int) -> tuple:
    return tuple(float(v) for v in np.linspace(lo, hi, n))


ISC_GAIN_GRID = _log_grid(0.05, 20.0, 15)
SOD_DELTA_GRID = _log_grid(0.005, 0.5, 15)
BSA_TAPS_GRID = (1, 3, 5, 7, 9, 13)
BSA_THETA_GRID = _lin_grid(0.0, 1.0, 15)  # filter taps sum to 1
LIF_TAU_GRID = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0)
LIF_THETA_SCALE_GRID = _log_grid(0.01, 1.0, 15)


@dataclass(frozen=True)
class TaskSpec:
    """Which coding task to run and at what scale."""

    task: str
    duration: float = FULL_DURATION_S
    n_trials: int = FULL_TRIALS
    master_seed: int = DEFAULT_MASTER_SEED
    delay_range: int = 100

    def __post_init__(self):
        if self.task not in TASKS:
            raise ParameterError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if self.duration <= 0:
            raise ParameterError("duration must be positive")
        if self.n_trials < 1:
            raise ParameterError("need at least one trial")
        if self.delay_range < 0:
            raise ParameterError("delay range must be nonnegative")

    @property
    def n_channels(self) -> int:
        # the frequency task reads the place code across 8 channels; the
        # amplitude task reads the temporal pattern of a single channel
        return FREQ_CHANNELS if self.task == "frequency" else 1


@dataclass(frozen=True)
class SweepSpec:
    """Parameter grids per encoder family; empty grids skip a family."""

    isc_gains: tuple = ISC_GAIN_GRID
    sod_deltas: tuple = SOD_DELTA_GRID
    bsa_taps: tuple = BSA_TAPS_GRID
    bsa_thetas: tuple = BSA_THETA_GRID
    lif_taus: tuple = LIF_TAU_GRID
    lif_theta_scales: tuple = LIF_THETA_SCALE_GRID

    def configs(self) -> list:
        """Expand the grids into one flat list of encoder configurations.

        LIF thresholds are specified as a scale on the steady-state membrane
        value reached for unit input, ``1 / (1 - exp(-1 / tau))``, so one
        grid spans comparable spike densities for every time constant.
        """
        out: list[EncoderConfig] = []
        out.extend(IscConfig(g) for g in self.isc_gains)
        out.extend(SodConfig(d) for d in self.sod_deltas)
        out.extend(
            BsaConfig(int(m), th) for m in self.bsa_taps for th in self.bsa_thetas
        )
        for tau in self.lif_taus:
            steady = 1.0 if tau == 0 else 1.0 / (1.0 - math.exp(-1.0 / tau))
            out.extend(
                LifConfig(tau, scale * steady) for scale in self.lif_theta_scales
            )
        if not out:
            raise ParameterError("all parameter grids are empty")
        return out


def sweep_spec_from_file(path) -> SweepSpec:
    """Load grids from a JSON object; missing keys keep their defaults."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ParameterError("grid file must hold a JSON object")
    known = {f.name for f in SweepSpec.__dataclass_fields__.values()}
    unknown = set(raw) - known
    if unknown:
        raise ParameterError(f"unknown grid keys {sorted(unknown)}")
    return SweepSpec(**{k: tuple(v) for k, v in raw.items()})


def build_stimulus(task: str, duration: float, seed: int):
    """Generate the level track and its task-specific waveform."""
    track = generate_level_track(N_LEVELS, duration, seed=seed)
    if task == "frequency":
        wave = synthesize_fm(map_to_erb_frequency(track, FREQ_LO_HZ, FREQ_HI_HZ))
    elif task == "amplitude":
        wave = synthesize_am(
            map_to_log_amplitude(track, AMP_LO, AMP_HI), AM_CARRIER_HZ
        )
    else:
        raise ParameterError(f"unknown task {task!r}")
    return track, wave


def filterbank_for(task: str) -> FilterBankSpec:
    if task == "frequency":
        return design_filterbank(FREQ_CHANNELS, FREQ_LO_HZ, FREQ_HI_HZ)
    if task == "amplitude":
        return design_filterbank(1, AM_CARRIER_HZ, AM_CARRIER_HZ)
    raise ParameterError(f"unknown task {task!r}")


def words_for(task: str, spikes) -> SymbolSequence:
    if task == "frequency":
        return build_population_words(spikes)
    if task == "amplitude":
        return build_history_words(spikes, window=HISTORY_WINDOW)
    raise ParameterError(f"unknown task {task!r}")


def trial_seed(spec: TaskSpec, trial: int) -> int:
    return derive_seed(spec.master_seed, spec.task, "trial", trial)


def _trial_key(spec: TaskSpec, stim_seed: int) -> str:
    return f"{spec.task}-{spec.duration:g}s-{stim_seed:016x}"


def prepare_trial(spec: TaskSpec, seed_trial: int, cache_dir=None):
    """Stimulus characteristic and cochleagram for one trial.

    With a cache directory the cochleagram and the quantized characteristic
    are stored on disk and reused; parameter sweeps only vary the encoding,
    so the filterbank runs once per trial.  Cochleagram frames are
    materialized at float32 either way, keeping cached and uncached runs bit
    identical.
    """
    stim_seed = derive_seed(seed_trial, "stimulus")
    coch_path = x_path = None
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        stem = _trial_key(spec, stim_seed)
        coch_path = cache_dir / f"{stem}.coch"
        x_path = cache_dir / f"{stem}.x.npy"
        if coch_path.exists() and x_path.exists():
            coch = read_cochleagram(coch_path)
            x = SymbolSequence(np.load(x_path), alphabet_size=N_LEVELS)
            return x, coch
    track, wave = build_stimulus(spec.task, spec.duration, stim_seed)
    coch = extract_cochleagram(wave, filterbank_for(spec.task))
    coch.values = coch.values.astype(np.float32).astype(np.float64)
    x = quantize_characteristic(track)
    if coch_path is not None:
        write_cochleagram(coch_path, coch)
        np.save(x_path, x.symbols)
    return x, coch


def run_task_point(
    spec: TaskSpec,
    config: EncoderConfig,
    seed_trial: int,
    cache_dir=None,
    *,
    validate: bool = True,
    _trial_data=None,
) -> EvalResult:
    """Evaluate one encoder configuration on one freshly seeded trial."""
    if _trial_data is not None:
        x, coch = _trial_data
    else:
        x, coch = prepare_trial(spec, seed_trial, cache_dir)
    spikes = encode_channelwise(
        coch, config, seed=derive_seed(seed_trial, "encoder"), check=validate
    )
    words = words_for(spec.task, spikes)
    return evaluate_coding(
        x,
        words,
        spikes,
        delay_min=-spec.delay_range,
        delay_max=spec.delay_range,
        shuffle_seed=derive_seed(seed_trial, "shuffle"),
        validate=validate,
    )


@dataclass
class TrialOutcome:
    """Scalar results of one trial at one grid point."""

    efficiency: float
    spike_density: float
    coding_power_bits: float
    entropy_bits: float
    argmax_delay_frames: int
    shuffle_error: float


@dataclass
class SweepRow:
    """One grid point aggregated over trials."""

    family: str
    label: str
    params: dict
    n_trials: int
    eps_mean: float = math.nan
    rho_mean: float = math.nan
    eps_sem: float = math.nan
    rho_sem: float = math.nan
    argmax_delay_mean: float = math.nan
    shuffle_mean: float = math.nan
    shuffle_max: float = math.nan
    best: bool = False
    error: str = ""
    trials: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass
class SweepResult:
    """All grid points of one task, sorted by mean spike density."""

    spec: TaskSpec
    rows: list
    elapsed_s: float = 0.0
    backend: str = kernels.BACKEND

    def family_rows(self, family: str, **param_filter) -> list:
        out = []
        for row in self.rows:
            if row.family != family or not row.ok:
                continue
            if all(row.params.get(k) == v for k, v in param_filter.items()):
                out.append(row)
        return out

    def best_row(self, family: str, **param_filter):
        rows = self.family_rows(family, **param_filter)
        if not rows:
            return None
        return max(rows, key=lambda r: r.eps_mean)


def _sem(values) -> float:
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(len(values)))


def _aggregate(config: EncoderConfig, outcomes) -> SweepRow:
    eps = [o.efficiency for o in outcomes]
    rho = [o.spike_density for o in outcomes]
    return SweepRow(
        family=config.family,
        label=config.label(),
        params={"family": config.family, **asdict(config)},
        n_trials=len(outcomes),
        eps_mean=float(np.mean(eps)),
        rho_mean=float(np.mean(rho)),
        eps_sem=_sem(eps),
        rho_sem=_sem(rho),
        argmax_delay_mean=float(np.mean([o.argmax_delay_frames for o in outcomes])),
        shuffle_mean=float(np.mean([o.shuffle_error for o in outcomes])),
        shuffle_max=float(np.max([o.shuffle_error for o in outcomes])),
        trials=list(outcomes),
    )


def _evaluate_config(spec, config, seeds, cache_dir, validate, trial_data):
    try:
        outcomes = []
        for i, seed in enumerate(seeds):
            data = trial_data[i] if trial_data is not None else None
            res = run_task_point(
                spec, config, seed, cache_dir, validate=validate, _trial_data=data
            )
            outcomes.append(
                TrialOutcome(
                    efficiency=res.efficiency,
                    spike_density=res.spike_density,
                    coding_power_bits=res.coding_power_bits,
                    entropy_bits=res.entropy_bits,
                    argmax_delay_frames=res.argmax_delay_frames,
                    shuffle_error=res.shuffle_error,
                )
            )
        return _aggregate(config, outcomes)
    except SpikeCodingError as exc:
        return SweepRow(
            family=config.family,
            label=config.label(),
            params={"family": config.family, **asdict(config)},
            n_trials=len(seeds),
            error=str(exc),
        )


def _sweep_job(args):
    spec, config, seeds, cache_dir, validate = args
    return _evaluate_config(spec, config, seeds, cache_dir, validate, None)


def _mark_best(rows) -> None:
    by_family: dict = {}
    for row in rows:
        if not row.ok:
            continue
        current = by_family.get(row.family)
        if current is None or row.eps_mean > current.eps_mean:
            by_family[row.family] = row
    for row in by_family.values():
        row.best = True


def run_sweep(
    spec: TaskSpec,
    sweep: SweepSpec | None = None,
    cache_dir=None,
    *,
    jobs: int = 1,
    progress: bool = False,
    validate: bool = True,
) -> SweepResult:
    """Evaluate every grid point over every trial and aggregate.

    A failing grid point is recorded with its error message and the sweep
    continues.  Rows come back sorted by mean spike density with each
    family's best point (maximum mean efficiency) marked.
    """
    sweep = sweep if sweep is not None else SweepSpec()
    configs = sweep.configs()
    seeds = [trial_seed(spec, t) for t in range(spec.n_trials)]
    started = time.monotonic()

    tmp = None
    if jobs > 1 and cache_dir is None:
        # workers cannot share in-memory trial data, so spill it to disk
        tmp = tempfile.TemporaryDirectory(prefix="spikecoding-cache-")
        cache_dir = tmp.name
    try:
        trial_data = None
        if cache_dir is not None:
            for seed in seeds:
                prepare_trial(spec, seed, cache_dir)
        else:
            trial_data = [prepare_trial(spec, seed, None) for seed in seeds]

        rows: list = []
        if jobs > 1:
            args = [(spec, c, seeds, cache_dir, validate) for c in configs]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for i, row in enumerate(pool.map(_sweep_job, args)):
                    rows.append(row)
                    if progress:
                        print(f"[{i + 1}/{len(configs)}] {row.label}", file=sys.stderr)
        else:
            for i, config in enumerate(configs):
                row = _evaluate_config(
                    spec, config, seeds, cache_dir, validate, trial_data
                )
                rows.append(row)
                if progress:
                    print(f"[{i + 1}/{len(configs)}] {row.label}", file=sys.stderr)
    finally:
        if tmp is not None:
            tmp.cleanup()

    rows.sort(key=lambda r: (math.inf if math.isnan(r.rho_mean) else r.rho_mean))
    _mark_best(rows)
    return SweepResult(
        spec=spec,
        rows=rows,
        elapsed_s=time.monotonic() - started,
        backend=kernels.BACKEND,
    )


def _row_dict(row: SweepRow) -> dict:
    def clean(v):
        return None if isinstance(v, float) and math.isnan(v) else v

    return {
        "family": row.family,
        "label": row.label,
        "params": row.params,
        "n_trials": row.n_trials,
        "eps_mean": clean(row.eps_mean),
        "rho_mean": clean(row.rho_mean),
        "eps_sem": clean(row.eps_sem),
        "rho_sem": clean(row.rho_sem),
        "argmax_delay_mean": clean(row.argmax_delay_mean),
        "shuffle_mean": clean(row.shuffle_mean),
        "shuffle_max": clean(row.shuffle_max),
        "best": row.best,
        "error": row.error,
        "trials": [asdict(t) for t in row.trials],
    }


def emit_outputs(result: SweepResult, out_dir) -> list:
    """Write results.json, curves.csv and per-family plot data files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    doc = {
        "task": asdict(result.spec),
        "backend": result.backend,
        "elapsed_s": result.elapsed_s,
        "rows": [_row_dict(r) for r in result.rows],
    }
    path = out_dir / "results.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)

    path = out_dir / "curves.csv"
    with open(path, "w", newline="") as fh:
        fh.write("family,label,rho_mean,eps_mean,rho_sem,eps_sem,best,error\n")
        for r in result.rows:
            fh.write(
                f"{r.family},\"{r.label}\",{r.rho_mean!r},{r.eps_mean!r},"
                f"{r.rho_sem!r},{r.eps_sem!r},{int(r.best)},\"{r.error}\"\n"
            )
    written.append(path)

    for family in ("isc", "sod", "bsa", "lif"):
        rows = [r for r in result.rows if r.family == family and r.ok]
        path = out_dir / f"points_{family}.csv"
        with open(path, "w", newline="") as fh:
            fh.write("rho,eps\n")
            for r in rows:
                fh.write(f"{r.rho_mean!r},{r.eps_mean!r}\n")
        written.append(path)
    return written


@dataclass
class TargetCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class ReproduceReport:
    task: str
    fast: bool
    result: SweepResult
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list:
        out = [
            f"task={self.task} scale={'fast' if self.fast else 'full'} "
            f"elapsed={self.result.elapsed_s:.1f}s backend={self.result.backend}"
        ]
        for c in self.checks:
            out.append(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
        out.append(f"RESULT {'PASS' if self.passed else 'FAIL'}")
        return out


# operating-point windows for the full-scale tasks; fast runs widen both
# axes by FAST_SLACK
FREQUENCY_TARGETS = {
    "lif_eps": (0.75, 0.85),
    "lif_rho": (0.13, 0.23),
    "bsa3_eps": (0.66, 0.76),
    "bsa3_rho": (0.09, 0.17),
    "sod_eps_margin": 0.06,
    "sod_rho": (0.26, 0.40),
}
AMPLITUDE_TARGETS = {
    "bsa9_eps": (0.66, 0.76),
    "bsa9_rho": (0.66, 0.80),
    "lif2_eps": (0.58, 0.68),
    "lif2_rho": (0.20, 0.32),
}


def _window_check(name, row, attr, window, slack) -> TargetCheck:
    if row is None:
        return TargetCheck(name, False, "no successful rows for this family")
    value = getattr(row, attr)
    lo, hi = window
    ok = (lo - slack) <= value <= (hi + slack)
    return TargetCheck(
        name,
        ok,
        f"{attr}={value:.4f} target [{lo:.2f}, {hi:.2f}]"
        + (f" slack {slack:.2f}" if slack else "")
        + f" at {row.label}",
    )


def check_targets(result: SweepResult, slack: float = 0.0) -> list:
    """Compare a sweep against the published operating-point targets."""
    task = result.spec.task
    checks: list[TargetCheck] = []
    lif_best = result.best_row("lif")
    isc_best = result.best_row("isc")
    sod_best = result.best_row("sod")

    if task == "frequency":
        t = FREQUENCY_TARGETS
        bsa3_best = result.best_row("bsa", n_taps=3)
        checks.append(_window_check("lif-best-eps", lif_best, "eps_mean", t["lif_eps"], slack))
        checks.append(_window_check("lif-best-rho", lif_best, "rho_mean", t["lif_rho"], slack))
        checks.append(_window_check("bsa3-best-eps", bsa3_best, "eps_mean", t["bsa3_eps"], slack))
        checks.append(_window_check("bsa3-best-rho", bsa3_best, "rho_mean", t["bsa3_rho"], slack))
        if sod_best is None or lif_best is None:
            checks.append(TargetCheck("sod-eps-near-lif", False, "missing rows"))
        else:
            gap = abs(sod_best.eps_mean - lif_best.eps_mean)
            margin = t["sod_eps_margin"] + slack
            checks.append(
                TargetCheck(
                    "sod-eps-near-lif",
                    gap <= margin,
                    f"|eps(sod) - eps(lif)| = {gap:.4f} target <= {margin:.2f}",
                )
            )
        checks.append(_window_check("sod-best-rho", sod_best, "rho_mean", t["sod_rho"], slack))
        if isc_best is None or lif_best is None:
            checks.append(TargetCheck("isc-below-lif", False, "missing rows"))
        else:
            checks.append(
                TargetCheck(
                    "isc-below-lif",
                    isc_best.eps_mean < lif_best.eps_mean + slack,
                    f"eps(isc)={isc_best.eps_mean:.4f} < eps(lif)={lif_best.eps_mean:.4f}",
                )
            )
    elif task == "amplitude":
        t = AMPLITUDE_TARGETS
        bsa9_best = result.best_row("bsa", n_taps=9)
        lif2_best = result.best_row("lif", tau=2.0)
        checks.append(_window_check("bsa9-best-eps", bsa9_best, "eps_mean", t["bsa9_eps"], slack))
        checks.append(_window_check("bsa9-best-rho", bsa9_best, "rho_mean", t["bsa9_rho"], slack))
        checks.append(_window_check("lif-tau2-best-eps", lif2_best, "eps_mean", t["lif2_eps"], slack))
        checks.append(_window_check("lif-tau2-best-rho", lif2_best, "rho_mean", t["lif2_rho"], slack))
        for name, row in (("isc-below-lif", isc_best), ("sod-below-lif", sod_best)):
            if row is None or lif_best is None:
                checks.append(TargetCheck(name, False, "missing rows"))
            else:
                checks.append(
                    TargetCheck(
                        name,
                        row.eps_mean < lif_best.eps_mean + slack,
                        f"eps({row.family})={row.eps_mean:.4f} < "
                        f"eps(lif)={lif_best.eps_mean:.4f}",
                    )
                )
    else:
        raise ParameterError(f"unknown task {task!r}")
    return checks


def reproduce_task(
    task: str,
    fast: bool = False,
    master_seed: int = DEFAULT_MASTER_SEED,
    cache_dir=None,
    out_dir=None,
    *,
    jobs: int = 1,
    progress: bool = False,
) -> ReproduceReport:
    """Run one task with default grids and check its operating points."""
    spec = TaskSpec(
        task=task,
        duration=FAST_DURATION_S if fast else FULL_DURATION_S,
        n_trials=FAST_TRIALS if fast else FULL_TRIALS,
        master_seed=master_seed,
    )
    result = run_sweep(spec, None, cache_dir, jobs=jobs, progress=progress)
    checks = check_targets(result, slack=FAST_SLACK if fast else 0.0)
    report = ReproduceReport(task=task, fast=fast, result=result, checks=checks)
    if out_dir is not None:
        out_dir = Path(out_dir) / task
        emit_outputs(result, out_dir)
        with open(out_dir / "report.txt", "w") as fh:
            fh.write("\n".join(report.lines()) + "\n")
    return report
