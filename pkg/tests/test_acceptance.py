"""End-to-end acceptance: operating points, stability, and estimator guarantees.

The first two tests run the full-scale studies (300 s stimuli, 5 trials)
once via a session fixture; the remaining checks read those results or run
independent oracles.  Every test prints the values it gated on, so a
verbose run gives one pass/fail line per requirement with its numbers
nearby on failure.
"""

import time

import numpy as np
import pytest
from click.testing import CliRunner
from reference_impls import (
    entropy_oracle,
    mi_oracle,
    reference_bsa,
    reference_isc,
    reference_lif,
    reference_sod,
)

from spikecoding.cli import main as cli_main
from spikecoding.encoders import (
    SodConfig,
    design_bsa_filter,
    encode_bsa,
    encode_channelwise,
    encode_isc,
    encode_lif,
    encode_sod,
    verify_sod_reconstruction,
)
from spikecoding.errors import DataError
from spikecoding.harness import (
    TaskSpec,
    prepare_trial,
    reproduce_task,
    trial_seed,
)
from spikecoding.infotheory import (
    SymbolSequence,
    _check_bounds,
    entropy,
    plugin_mutual_information,
)
from spikecoding.rng import rng_for

FULL_RUNTIME_BOUND_S = 30 * 60
FAST_RUNTIME_BOUND_S = 5 * 60
SEM_BOUND = 0.005
SHUFFLE_BOUNDS = {"isc": 0.0016, "sod": 0.016, "bsa": 0.0016, "lif": 0.0016}


@pytest.fixture(scope="session")
def shared_cache(tmp_path_factory):
    return tmp_path_factory.mktemp("cochleagram-cache")


@pytest.fixture(scope="session")
def full_reports(shared_cache, tmp_path_factory):
    out = tmp_path_factory.mktemp("full-scale-results")
    reports = {}
    for task in ("frequency", "amplitude"):
        reports[task] = reproduce_task(task, cache_dir=shared_cache, out_dir=out)
    return reports


def show(report):
    return "\n".join(report.lines())


def best_rows(report, *specs):
    """Yield (label, row) for each family/parameter pin, skipping misses."""
    for family, pins in specs:
        row = report.result.best_row(family, **pins)
        label = family + (f" {pins}" if pins else "")
        yield label, row


FREQ_PINS = [("isc", {}), ("sod", {}), ("bsa", {"n_taps": 3}), ("lif", {})]
AMP_PINS = [("isc", {}), ("sod", {}), ("bsa", {"n_taps": 9}), ("lif", {}),
            ("lif", {"tau": 2.0})]
PINS = {"frequency": FREQ_PINS, "amplitude": AMP_PINS}


def test_frequency_operating_points_full_scale(full_reports):
    report = full_reports["frequency"]
    print(show(report))
    assert report.result.elapsed_s < FULL_RUNTIME_BOUND_S
    assert report.passed, show(report)


def test_amplitude_operating_points_full_scale(full_reports):
    report = full_reports["amplitude"]
    print(show(report))
    assert report.passed, show(report)


def test_trial_stability_at_best_points(full_reports):
    failures = []
    for task, report in full_reports.items():
        for label, row in best_rows(report, *PINS[task]):
            assert row is not None, f"{task}/{label}: no rows"
            print(f"{task}/{label}: eps_sem={row.eps_sem:.5f} rho_sem={row.rho_sem:.5f}")
            if row.eps_sem > SEM_BOUND or row.rho_sem > SEM_BOUND:
                failures.append(f"{task}/{label}")
    assert not failures, failures


def test_shuffle_residuals_at_best_points(full_reports):
    failures = []
    for task, report in full_reports.items():
        for label, row in best_rows(report, *PINS[task]):
            assert row is not None, f"{task}/{label}: no rows"
            bound = SHUFFLE_BOUNDS[row.family]
            print(
                f"{task}/{label}: shuffle_mean={row.shuffle_mean:.6f} "
                f"shuffle_max={row.shuffle_max:.6f} bound={bound}"
            )
            if not row.shuffle_mean < bound:
                failures.append(f"{task}/{label}")
    assert not failures, failures


def test_estimator_matches_brute_force_oracle():
    g = np.random.default_rng(31337)
    worst = 0.0
    for _ in range(1000):
        n = int(g.integers(5, 51))
        ax = int(g.integers(2, 7))
        aw = int(g.integers(2, 7))
        xs = g.integers(0, ax, size=n)
        ws = g.integers(0, aw, size=n)
        got = plugin_mutual_information(
            SymbolSequence(xs, ax, onset_skip=0),
            SymbolSequence(ws, aw, onset_skip=0),
        )
        worst = max(worst, abs(got - max(mi_oracle(xs.tolist(), ws.tolist()), 0.0)))
    print(f"worst |plug-in - oracle| over 1000 sequences: {worst:.3e}")
    assert worst < 1e-12

    def h(symbols, alphabet):
        return entropy(SymbolSequence(np.array(symbols), alphabet, onset_skip=0))

    assert h(np.tile(np.arange(8), 10), 8) == 3.0
    assert h(np.zeros(40, dtype=int), 8) == 0.0
    assert h([0, 0, 1, 2], 3) == 1.5  # occupancy (1/2, 1/4, 1/4)


def test_encoders_match_reference_transliterations():
    g = np.random.default_rng(777)
    for case in range(100):
        z = g.random(50)
        a = float(g.uniform(0.0, 5.0))
        uniforms = rng_for(case, "isc").random(len(z))
        assert np.array_equal(
            encode_isc(z, a, seed=case), reference_isc(z, a, uniforms)
        )
        delta = float(g.uniform(0.01, 0.5))
        assert np.array_equal(encode_sod(z, delta), reference_sod(z, delta))
        m = int(g.choice([1, 3, 5, 9, 13]))
        theta_b = float(g.uniform(0.0, 1.0))
        taps = design_bsa_filter(m)
        assert np.array_equal(
            encode_bsa(z, taps, theta_b), reference_bsa(z, taps, theta_b)
        )
        tau = float(g.choice([0.0, 1.0, 2.0, 5.0, 20.0]))
        theta_l = float(g.uniform(0.1, 2.0))
        assert np.array_equal(
            encode_lif(z, tau, theta_l), reference_lif(z, tau, theta_l)
        )

    # hand-worked traces, one per deterministic encoder
    assert encode_sod([0.0, 0.3, 0.6, 0.2], 0.25).tolist() == [0, 1, 1, -1]
    assert encode_bsa(
        [0.0, 0.25, 0.5, 0.25, 0.0], [0.25, 0.5, 0.25], 0.1
    ).tolist() == [0, 0, 0, 1, 0]
    assert encode_lif(np.full(9, 0.6), 2.0, 1.0).tolist() == [0, 1, 0, 0, 1, 0, 0, 1, 0]
    print("100 random signals and 3 hand traces matched on all four encoders")


def test_sod_reconstruction_identity_holds(full_reports, shared_cache):
    for task, report in full_reports.items():
        rows = report.result.family_rows("sod")
        assert rows, f"{task}: no successful send-on-delta rows"
        assert all(r.ok for r in rows)

        best = report.result.best_row("sod")
        spec = TaskSpec(task=task)
        _, coch = prepare_trial(spec, trial_seed(spec, 0), shared_cache)
        spikes = encode_channelwise(coch, SodConfig(best.params["delta"]), check=False)
        for z_row, train in zip(coch.values, spikes.values):
            verify_sod_reconstruction(z_row, best.params["delta"], train)
        print(f"{task}: identity re-verified on {coch.n_channels} channels "
              f"at delta={best.params['delta']:.4g}")


def test_information_inequalities_hold_everywhere(full_reports):
    # estimation runs with validation on; any violated bound or relabeling
    # check would have turned its grid point into an error row
    for task, report in full_reports.items():
        bad = [r.label for r in report.result.rows if not r.ok]
        assert not bad, f"{task}: {bad}"
        for row in report.result.rows:
            for trial in row.trials:
                assert 0.0 <= trial.efficiency
                assert trial.coding_power_bits <= trial.entropy_bits + 1e-6
                assert trial.shuffle_error >= 0.0
        print(f"{task}: {len(report.result.rows)} grid points, all validated")

    # negative control: the bound check must actually fire on a violation
    with pytest.raises(DataError):
        _check_bounds(1.5, 1.0, 1.0)
    with pytest.raises(DataError):
        _check_bounds(-0.5, 1.0, 1.0)


def test_fast_mode_completes_quickly_within_widened_windows(shared_cache, tmp_path):
    runner = CliRunner()
    started = time.monotonic()
    out = runner.invoke(cli_main, [
        "reproduce", "all", "--fast",
        "--cache-dir", str(shared_cache), "--out-dir", str(tmp_path),
    ])
    elapsed = time.monotonic() - started
    print(out.output)
    print(f"fast mode took {elapsed:.1f} s")
    assert elapsed < FAST_RUNTIME_BOUND_S
    assert out.exit_code == 0, out.output
    assert out.output.count("RESULT PASS") == 2
    assert (tmp_path / "frequency" / "results.json").exists()
    assert (tmp_path / "amplitude" / "report.txt").exists()
