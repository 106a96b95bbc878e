import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwcls import (
    estimate,
    estimate_alpha_beta,
    estimate_delta,
    estimate_rho,
    estimate_via_normal_equations,
    in_Hn,
    in_tHn,
    model_equal_pair,
    model_equal_pair_null_immigration,
    model_general,
    model_unit_total,
    objective_Q,
    simulate,
)
from gwcls.cls import delta_martingale_ratio, rho_martingale_ratio
from gwcls.errors import DenominatorZero, SingularNormalMatrix
from gwcls.simulate import map_replicas

HAND = np.array([[0, 0], [1, 0], [2, 1]])
HAND_M = np.array([1.0, 0.0])


def _noise_free(spec, n, m_eps=None):
    """X_k = m_xi X_{k-1} + m_eps with no noise (real valued)."""
    m_eps = spec.m_eps if m_eps is None else m_eps
    x = np.zeros((n + 1, 2))
    for k in range(1, n + 1):
        x[k] = spec.mean_matrix @ x[k - 1] + m_eps
    return x


def test_existence_sets_examples():
    zeros = np.zeros((5, 2), dtype=int)
    assert not in_Hn(zeros) and not in_tHn(zeros)
    assert in_Hn(HAND) and in_tHn(HAND)
    sym = np.array([[0, 0], [1, 1], [3, 3], [2, 2]])
    assert in_Hn(sym) and not in_tHn(sym)
    # the last state never enters the sums
    assert not in_Hn(np.array([[0, 0], [4, 1]]))


def test_hand_estimates():
    assert estimate_rho(HAND, HAND_M) == 2.0
    assert estimate_delta(HAND, HAND_M) == 0.0
    assert estimate_alpha_beta(HAND, HAND_M) == (1.0, 1.0)
    assert estimate_via_normal_equations(HAND, HAND_M) == pytest.approx((1.0, 1.0), abs=1e-15)


def test_drift_path_gives_rho_one():
    for m in ([0.5, 0.5], [1.0, 0.0], [0.3, 1.7]):
        m = np.array(m)
        x = np.arange(30)[:, None] * m
        assert estimate_rho(x, m) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("alpha", [0.2, 0.3, 0.7])
def test_noise_free_path_recovers_parameters(alpha):
    spec = model_general(alpha)
    m = np.array([0.9, 0.1])  # asymmetric so that V moves
    x = _noise_free(spec, 40, m)
    assert estimate_rho(x, m) == pytest.approx(1.0, abs=1e-12)
    assert estimate_delta(x, m) == pytest.approx(alpha - (1 - alpha), abs=1e-12)
    assert objective_Q(x, m, 1.0, 2 * alpha - 1) == pytest.approx(0.0, abs=1e-20)


def test_alpha_beta_linear_map(monkeypatch):
    import gwcls.cls as cls

    monkeypatch.setattr(cls, "estimate_rho", lambda t, m: 1.0)
    monkeypatch.setattr(cls, "estimate_delta", lambda t, m: 0.2)
    assert cls.estimate_alpha_beta(None, None) == pytest.approx((0.6, 0.4), abs=1e-15)


def test_undefined_estimators_raise():
    zeros = np.zeros((4, 2), dtype=int)
    with pytest.raises(DenominatorZero, match="H_n"):
        estimate_rho(zeros, HAND_M)
    sym = np.array([[0, 0], [1, 1], [3, 3], [2, 2]])
    with pytest.raises(DenominatorZero, match="tH_n"):
        estimate_delta(sym, HAND_M)
    with pytest.raises(DenominatorZero, match="tH_n"):
        estimate_alpha_beta(sym, HAND_M)
    with pytest.raises(SingularNormalMatrix):
        estimate_via_normal_equations(sym, HAND_M)
    with pytest.raises(SingularNormalMatrix):
        estimate_via_normal_equations(zeros, HAND_M)


def test_estimate_reports_absence():
    sym = np.array([[0, 0], [1, 1], [3, 3], [2, 2]])
    res = estimate(sym, HAND_M)
    assert res.in_Hn and not res.in_tHn
    assert res.rho_hat is not None
    assert res.delta_hat is None and res.alpha_hat is None and res.beta_hat is None
    res = estimate(np.zeros((3, 2), dtype=int), HAND_M)
    assert res.rho_hat is None and res.alpha_hat is None and res.n == 2


def _specs():
    return {"A": model_general(0.3), "B": model_unit_total(0.6), "C": model_equal_pair()}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**63 - 1), st.integers(1, 300), st.sampled_from(["A", "B", "C"]))
def test_result_invariants_and_decompositions(seed, n, which):
    spec = _specs()[which]
    t = simulate(spec, n, seed)
    res = estimate(t, spec.m_eps)
    assert (res.rho_hat is not None) == res.in_Hn
    assert (res.delta_hat is not None) == res.in_tHn
    assert (res.alpha_hat is not None) == (res.in_Hn and res.in_tHn)
    if res.alpha_hat is not None:
        assert res.alpha_hat == (res.rho_hat + res.delta_hat) / 2
        assert res.beta_hat == (res.rho_hat - res.delta_hat) / 2
    if res.in_Hn:
        assert res.rho_hat - 1 == pytest.approx(rho_martingale_ratio(t), abs=1e-9)
    if res.in_tHn:
        delta = spec.alpha - spec.beta
        assert res.delta_hat - delta == pytest.approx(delta_martingale_ratio(t), abs=1e-9)


@pytest.mark.parametrize("which", ["A", "C"])
def test_two_routes_agree(which):
    spec = _specs()[which]
    worst = 0.0
    for s in range(100):
        t = simulate(spec, 200, seed=41, stream=s)
        if not (in_Hn(t) and in_tHn(t)):
            continue
        a1 = np.array(estimate_alpha_beta(t, spec.m_eps))
        a2 = np.array(estimate_via_normal_equations(t, spec.m_eps))
        worst = max(worst, np.abs(a1 - a2).max())
    assert worst < 1e-10


def _minimiser_checks(t, m):
    rho, delta = estimate_rho(t, m), estimate_delta(t, m)
    q0 = objective_Q(t, m, rho, delta)
    for h in (1e-3, 1e-2):
        for sr in (-1, 0, 1):
            for sd in (-1, 0, 1):
                assert q0 <= objective_Q(t, m, rho + sr * h, delta + sd * h)
    # a fine grid around the estimate is minimised at its centre
    step = 1e-4
    grid = [(i, j) for i in range(-3, 4) for j in range(-3, 4)]
    vals = [objective_Q(t, m, rho + i * step, delta + j * step) for i, j in grid]
    assert grid[int(np.argmin(vals))] == (0, 0)
    return rho, delta


def test_objective_minimiser_and_quadratic(model_a):
    for s in range(10):
        t = simulate(model_a, 200, seed=43, stream=s)
        rho, delta = _minimiser_checks(t, model_a.m_eps)
        # constant second differences in each coordinate
        h = 0.05
        for axis in (0, 1):
            pts = [objective_Q(t, model_a.m_eps, rho + (i * h if axis == 0 else 0), delta + (i * h if axis == 1 else 0))
                   for i in range(-3, 4)]
            d2 = np.diff(pts, 2)
            scale = max(1.0, abs(d2).max())
            assert np.ptp(d2) / scale < 1e-8


def test_existence_null_immigration_never_in_tHn():
    spec = model_equal_pair_null_immigration()
    for s in range(200):
        assert not in_tHn(simulate(spec, 100, seed=44, stream=s))


@pytest.mark.slow
def test_consistency_medians(model_a, model_b):
    rho_b = map_replicas(lambda t: estimate_rho(t, model_b.m_eps), model_b, 2000, 1000, seed=45)
    assert abs(np.median(rho_b) - 1.0) < 0.01
    delta_a = map_replicas(lambda t: estimate_delta(t, model_a.m_eps), model_a, 2000, 1000, seed=46)
    assert abs(np.median(delta_a) + 0.4) < 0.05
