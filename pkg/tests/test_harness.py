import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from gwcls import estimate, model_equal_pair_null_immigration, model_general, simulate
from gwcls.errors import EmptySample
from gwcls.harness import (
    ExperimentConfig,
    existence_frequencies,
    joint_statistics,
    ks_two_sample,
    run_experiment,
    scaled_errors,
    write_report,
)
from gwcls.simulate import map_replicas

samples = st.lists(st.integers(-20, 20).map(float), min_size=1, max_size=60)


# only the statistic is compared; scipy's p-value warns on tiny samples
@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@settings(max_examples=200)
@given(samples, samples)
def test_ks_matches_scipy(a, b):
    assert ks_two_sample(a, b) == pytest.approx(stats.ks_2samp(a, b, method="asymp").statistic, abs=1e-12)


def test_ks_examples():
    x = np.random.default_rng(0).standard_normal(500)
    assert ks_two_sample(x, x.copy()) == 0.0
    assert ks_two_sample(np.arange(100), 1000 + np.arange(100)) == 1.0
    rng = np.random.default_rng(1)
    assert ks_two_sample(rng.standard_normal(10_000), rng.standard_normal(10_000)) < 0.03
    with pytest.raises(EmptySample):
        ks_two_sample([], [1.0])


def test_existence_frequency_examples(model_a):
    assert existence_frequencies(model_a, 1, 200, seed=1) == (0.0, 0.0)
    assert existence_frequencies(model_equal_pair_null_immigration(), 50, 300, seed=2)[1] == 0.0
    h, th = existence_frequencies(model_a, 100, 1000, seed=3)
    assert h >= 0.99 and th >= 0.99
    with pytest.raises(ValueError):
        existence_frequencies(model_a, 10, 99, seed=1)


@pytest.mark.parametrize("which", ["A", "B", "C"])
def test_scaled_errors_line_identity(which, model_a, model_b, model_c):
    spec = {"A": model_a, "B": model_b, "C": model_c}[which]
    for s in range(30):
        t = simulate(spec, 300, seed=4, stream=s)
        e = scaled_errors(spec, t)
        res = estimate(t, spec.m_eps)
        if res.alpha_hat is None:
            assert e.alpha_sqrt_n is None and e.beta_sqrt_n is None
            continue
        n = t.n
        assert e.rho_n == pytest.approx(n * (res.rho_hat - 1), rel=1e-15)
        assert e.rho_n32 == pytest.approx(n**1.5 * (res.rho_hat - 1), rel=1e-15)
        assert e.alpha_sqrt_n + e.beta_sqrt_n == pytest.approx(math.sqrt(n) * (res.rho_hat - 1), abs=1e-9)


def test_joint_statistics_general_ratio(model_a):
    for s in range(20):
        t = simulate(model_a, 400, seed=5, stream=s)
        js = joint_statistics(model_a, t)
        rho_n = scaled_errors(model_a, t).rho_n
        assert js[2] / js[0] == pytest.approx(rho_n, rel=1e-9, abs=1e-9)


@pytest.mark.slow
def test_joint_statistics_degenerate_slots(model_b, model_c):
    b = np.array(map_replicas(lambda t: joint_statistics(model_b, t)[0], model_b, 5000, 2000, seed=6))
    assert abs(b.mean() / (1 / 3) - 1) < 0.05
    c = np.array(map_replicas(lambda t: joint_statistics(model_c, t)[1], model_c, 5000, 2000, seed=7))
    assert abs(c.mean() - 0.5) < 3 * c.std(ddof=1) / math.sqrt(c.size)


def test_experiment_config_validation(model_a):
    with pytest.raises(ValueError):
        ExperimentConfig(model_a, replicas=50)
    with pytest.raises(ValueError):
        ExperimentConfig(model_a, n_values=(200, 100))
    with pytest.raises(ValueError):
        ExperimentConfig(model_a, limit_paths=10)


def _small(spec, threads):
    return ExperimentConfig(
        spec, n_values=(30, 60), replicas=120, limit_paths=120, sde_steps=256, seed=77, threads=threads
    )


def _bytes(tmp_path, name, report):
    out = tmp_path / name
    files = write_report(report, str(out))
    return {os.path.basename(f): open(f, "rb").read() for f in files}


@pytest.mark.parametrize("which", ["A", "B", "C", "null"])
def test_report_is_byte_identical_across_threads(tmp_path, which, model_a, model_b, model_c):
    spec = {"A": model_a, "B": model_b, "C": model_c, "null": model_equal_pair_null_immigration()}[which]
    one = _bytes(tmp_path, "one", run_experiment(_small(spec, 1)))
    two = _bytes(tmp_path, "two", run_experiment(_small(spec, 3)))
    again = _bytes(tmp_path, "again", run_experiment(_small(spec, 1)))
    assert one == two == again
    summary = json.loads(one["summary.json"])
    assert summary["regime"] == spec.regime.value
    for size in summary["sizes"]:
        assert 0.0 <= size["freq_Hn"] <= 1.0 and 0.0 <= size["ks_rho"] <= 1.0


def test_null_regime_checks(model_a):
    report = run_experiment(_small(model_equal_pair_null_immigration(), 1))
    names = [c.name for c in report.checks]
    assert any(n.startswith("freq_tHn_zero") for n in names)
    assert report.sizes[-1].metrics["freq_tHn"] == 0.0
    assert np.all(np.isnan(report.sizes[-1].errors[:, 2]))


# -- invariants over the full-size experiments -----------------------------


@pytest.mark.slow
def test_wrong_scaling_diverges_in_general_regime(experiment_a):
    small, large = experiment_a.sizes
    assert large.metrics["sd_rho_n32"] > small.metrics["sd_rho_n32"]
    ratio = large.metrics["sd_rho_n"] / small.metrics["sd_rho_n"]
    assert 1 / 1.5 <= ratio <= 1.5


@pytest.mark.slow
def test_line_concentration(experiment_a, experiment_c):
    for rep in (experiment_a, experiment_c):
        assert rep.sizes[-1].metrics["sd_line"] < 0.2


@pytest.mark.slow
@pytest.mark.parametrize("name", ["a", "b", "c"])
def test_monotone_improvement(name, experiment_a, experiment_b, experiment_c):
    rep = {"a": experiment_a, "b": experiment_b, "c": experiment_c}[name]
    small, large = (s.metrics for s in rep.sizes)
    for key in ("ks_rho", "ks_ab"):
        if key in large:
            assert large[key] <= small[key] + 0.02
    assert all(not s.failures for s in rep.sizes)
