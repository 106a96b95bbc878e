"""Conditional least squares estimators of rho = alpha + beta, delta = alpha - beta,
and of the offspring means (alpha, beta).

The immigration mean ``m_eps`` is treated as known and passed explicitly.
Estimators that do not exist on a sample are reported as ``None`` together
with the membership flags, never as NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DenominatorZero, SingularNormalMatrix

__all__ = [
    "ClsResult",
    "in_Hn",
    "in_tHn",
    "estimate_rho",
    "estimate_delta",
    "estimate_alpha_beta",
    "estimate_via_normal_equations",
    "objective_Q",
    "estimate",
    "rho_martingale_ratio",
    "delta_martingale_ratio",
]

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class ClsResult:
    rho_hat: Optional[float]
    delta_hat: Optional[float]
    alpha_hat: Optional[float]
    beta_hat: Optional[float]
    in_Hn: bool
    in_tHn: bool
    n: int


def _states(traj) -> np.ndarray:
    states = getattr(traj, "states", traj)
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[1] != 2 or states.shape[0] < 2:
        raise ValueError("expected states of shape (n + 1, 2) with n >= 1")
    return states


def _projections(traj):
    x = _states(traj)
    return x[:, 0] + x[:, 1], x[:, 0] - x[:, 1]


def _sum_sq_int(a: np.ndarray) -> int:
    return int(np.sum(a.astype(np.int64) ** 2)) if a.dtype.kind in "iu" else math.fsum(a * a)


def in_Hn(traj) -> bool:
    """True iff sum_k <1, X_{k-1}>^2 > 0."""
    u, _ = _projections(traj)
    return bool(np.any(u[:-1] != 0))


def in_tHn(traj) -> bool:
    """True iff sum_k <u~, X_{k-1}>^2 > 0."""
    _, v = _projections(traj)
    return bool(np.any(v[:-1] != 0))


def _ratio(proj: np.ndarray, drift: float, which: str) -> float:
    prev = proj[:-1]
    den = _sum_sq_int(prev)
    if den == 0:
        raise DenominatorZero(f"sample is not in {which}")
    num = math.fsum((proj[1:] - drift) * prev)
    return num / float(den)


def estimate_rho(traj, m_eps) -> float:
    """CLS estimator of the criticality parameter.

    sum <1, X_k - m_eps><1, X_{k-1}> / sum <1, X_{k-1}>^2

    Raises DenominatorZero off H_n.
    """
    u, _ = _projections(traj)
    return _ratio(u, float(m_eps[0] + m_eps[1]), "H_n")


def estimate_delta(traj, m_eps) -> float:
    """CLS estimator of delta = alpha - beta. Raises DenominatorZero off tH_n."""
    _, v = _projections(traj)
    return _ratio(v, float(m_eps[0] - m_eps[1]), "tH_n")


def estimate_alpha_beta(traj, m_eps) -> Tuple[float, float]:
    """((rho + delta) / 2, (rho - delta) / 2)."""
    rho = estimate_rho(traj, m_eps)
    delta = estimate_delta(traj, m_eps)
    return (rho + delta) / 2, (rho - delta) / 2


def estimate_via_normal_equations(traj, m_eps) -> Tuple[float, float]:
    """Solve A_n (alpha, beta) = b_n directly.

    A_n = sum B_{k-1}^2, b_n = sum B_{k-1} (X_k - m_eps) with
    B = [[x1, x2], [x2, x1]]. The 2x2 system is solved in closed form; the
    entries of A_n are exact integers.
    """
    x = _states(traj).astype(np.int64)
    p1, p2 = x[:-1, 0], x[:-1, 1]
    a = int(np.sum(p1 * p1 + p2 * p2))
    c = int(np.sum(2 * p1 * p2))
    det = a * a - c * c
    if det == 0 or (a + abs(c)) > MAX_CONDITION * (a - abs(c)):
        raise SingularNormalMatrix(f"normal matrix [[{a}, {c}], [{c}, {a}]] is (nearly) singular")
    r1 = x[1:, 0] - float(m_eps[0])
    r2 = x[1:, 1] - float(m_eps[1])
    b1 = math.fsum(np.concatenate([p1 * r1, p2 * r2]))
    b2 = math.fsum(np.concatenate([p2 * r1, p1 * r2]))
    det = float(det)
    return (a * b1 - c * b2) / det, (a * b2 - c * b1) / det


def objective_Q(traj, m_eps, rho_prime: float, delta_prime: float) -> float:
    """Sum of squared one-step residuals at parameters (rho', delta')."""
    x = _states(traj).astype(float)
    s = 0.5 * (rho_prime + delta_prime)
    d = 0.5 * (rho_prime - delta_prime)
    pred1 = s * x[:-1, 0] + d * x[:-1, 1] + m_eps[0]
    pred2 = d * x[:-1, 0] + s * x[:-1, 1] + m_eps[1]
    return math.fsum(np.concatenate([(x[1:, 0] - pred1) ** 2, (x[1:, 1] - pred2) ** 2]))


def estimate(traj, m_eps) -> ClsResult:
    """All estimators, with ``None`` wherever the sample leaves H_n or tH_n."""
    h = in_Hn(traj)
    th = in_tHn(traj)
    rho = estimate_rho(traj, m_eps) if h else None
    delta = estimate_delta(traj, m_eps) if th else None
    if h and th:
        alpha, beta = (rho + delta) / 2, (rho - delta) / 2
    else:
        alpha = beta = None
    return ClsResult(rho, delta, alpha, beta, h, th, _states(traj).shape[0] - 1)


def rho_martingale_ratio(traj) -> float:
    """sum <1, M_k> U_{k-1} / sum U_{k-1}^2, which equals rho_hat - 1."""
    den = _sum_sq_int(traj.u_seq[:-1])
    if den == 0:
        raise DenominatorZero("sample is not in H_n")
    return math.fsum(traj.m_seq.sum(axis=1) * traj.u_seq[:-1]) / float(den)


def delta_martingale_ratio(traj) -> float:
    """sum <u~, M_k> V_{k-1} / sum V_{k-1}^2, which equals delta_hat - delta."""
    den = _sum_sq_int(traj.v_seq[:-1])
    if den == 0:
        raise DenominatorZero("sample is not in tH_n")
    m = traj.m_seq
    return math.fsum((m[:, 0] - m[:, 1]) * traj.v_seq[:-1]) / float(den)
