"""Closed-form moments and their exact-enumeration cross-checks.

Includes powers of the mean matrix via the two-eigenvalue spectral formula,
E X_k, the conditional second and third moments of the martingale
differences M_k given X_{k-1}, and Monte Carlo growth exponents of
moments of U_k, V_k, M_k and X_k.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import EnumerationTooLarge
from .model import FiniteLaw2D, ModelSpec, law_mean
from .simulate import map_replicas

__all__ = [
    "J",
    "K",
    "mean_matrix_power",
    "expected_state",
    "central_kron3",
    "conditional_cov_oracle",
    "conditional_third_oracle",
    "enumerate_conditional_moments",
    "MomentGrowthReport",
    "moment_growth",
    "GROWTH_TARGETS",
]

J = np.ones((2, 2))
K = np.array([[1.0, -1.0], [-1.0, 1.0]])

MAX_ENUMERATION = 10**7
GROWTH_TARGETS = ("U", "V", "M", "X")


def mean_matrix_power(alpha: float, beta: float, j: int) -> np.ndarray:
    """[[alpha, beta], [beta, alpha]]^j for alpha + beta = 1.

    Eigenvalues are 1 and alpha - beta, giving J/2 + (alpha - beta)^j K/2.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    return 0.5 * J + 0.5 * (alpha - beta) ** j * K


def expected_state(spec: ModelSpec, k: int) -> np.ndarray:
    """E X_k = sum_{j<k} m_xi^j m_eps, in closed form."""
    if k < 1:
        raise ValueError("k must be >= 1")
    delta = spec.alpha - spec.beta
    m = np.asarray(spec.m_eps)
    return (k / 2) * (J @ m) + (1 - delta**k) / (4 * spec.beta) * (K @ m)


def central_kron3(law: FiniteLaw2D) -> np.ndarray:
    """E[(Z - EZ) (x) (Z - EZ) (x) (Z - EZ)] as an 8-vector, index 4i + 2j + k."""
    m = law_mean(law)
    out = np.empty(8)
    for idx, (i, j, k) in enumerate(itertools.product(range(2), repeat=3)):
        out[idx] = law.expect(lambda x1, x2: _c3(x1, x2, m, i, j, k))
    return out


def _c3(x1, x2, m, i, j, k):
    d = (x1 - m[0], x2 - m[1])
    return d[i] * d[j] * d[k]


def conditional_cov_oracle(spec: ModelSpec, x_prev) -> np.ndarray:
    """E(M_k M_k^T | X_{k-1} = x_prev) = x1 V_xi1 + x2 V_xi2 + V_eps."""
    x1, x2 = x_prev
    return x1 * spec.V_xi1 + x2 * spec.V_xi2 + spec.V_eps


def conditional_third_oracle(spec: ModelSpec, x_prev) -> np.ndarray:
    """E(M_k^{(x)3} | X_{k-1} = x_prev) as an 8-vector."""
    x1, x2 = x_prev
    return (
        x1 * central_kron3(spec.offspring1)
        + x2 * central_kron3(spec.offspring2)
        + central_kron3(spec.immigration)
    )


def enumerate_conditional_moments(spec: ModelSpec, x_prev) -> Tuple[np.ndarray, np.ndarray]:
    """Covariance and third central Kronecker moment of X_k given X_{k-1}.

    Brute force: every combination of one atom per parent plus one immigration
    atom is enumerated, the outcome law is assembled, and its central moments
    are computed from scratch. Independent of the law-by-law closed forms.
    """
    x1, x2 = (int(v) for v in x_prev)
    laws = [spec.offspring1] * x1 + [spec.offspring2] * x2 + [spec.immigration]
    size = math.prod(len(law) for law in laws)
    if size > MAX_ENUMERATION:
        raise EnumerationTooLarge(f"{size} outcomes exceed the cap of {MAX_ENUMERATION}")
    dist = defaultdict(list)
    for combo in itertools.product(*(law.atoms for law in laws)):
        p = math.prod(pr for _, pr in combo)
        out = (sum(a[0] for a, _ in combo), sum(a[1] for a, _ in combo))
        dist[out].append(p)
    outcomes = np.array(list(dist.keys()), dtype=float)
    probs = np.array([math.fsum(v) for v in dist.values()])
    mean = np.array([math.fsum(probs * outcomes[:, i]) for i in range(2)])
    d = outcomes - mean
    cov = np.array([[math.fsum(probs * d[:, i] * d[:, j]) for j in range(2)] for i in range(2)])
    third = np.array(
        [math.fsum(probs * d[:, i] * d[:, j] * d[:, k]) for i, j, k in itertools.product(range(2), repeat=3)]
    )
    return cov, third


@dataclass(frozen=True)
class MomentGrowthReport:
    target: str
    order: int
    ks: Tuple[int, ...]
    estimates: Tuple[float, ...]
    fitted_slope: float
    target_slope: float

    def within(self, band: float = 0.2) -> bool:
        return abs(self.fitted_slope - self.target_slope) <= band


def _target_values(traj, target: str, order: int, ks: np.ndarray) -> np.ndarray:
    if target == "U":
        return traj.u_seq[ks].astype(float) ** order
    if target == "V":
        return traj.v_seq[ks].astype(float) ** order
    if target == "M":
        return np.linalg.norm(traj.m_seq[ks - 1], axis=1) ** order
    if target == "X":
        return np.linalg.norm(traj.states[ks].astype(float), axis=1) ** order
    raise ValueError(f"target must be one of {GROWTH_TARGETS}, got {target!r}")


def moment_growth(
    spec: ModelSpec,
    target: str,
    order: int,
    ks: Sequence[int],
    replicas: int,
    seed: int,
    threads: int = 1,
) -> MomentGrowthReport:
    """Estimate E[target_k^order] at each k and fit a log-log slope.

    ``target`` is ``"U"``, ``"V"``, ``"M"`` (Euclidean norm of M_k) or ``"X"``
    (norm of X_k). For ``"V"`` the order must be even; the theoretical slope
    is order for U and X, order / 2 for V and floor(order / 2) for M.
    """
    ks_arr = np.asarray(ks, dtype=np.int64)
    if ks_arr.size < 2 or np.any(np.diff(ks_arr) <= 0) or ks_arr[0] < 1:
        raise ValueError("ks must be at least two strictly increasing positive indices")
    if order < 1:
        raise ValueError("order must be >= 1")
    if target == "V" and order % 2:
        raise ValueError("V moments are only defined here for even orders")
    rows = map_replicas(
        lambda t: _target_values(t, target, order, ks_arr), spec, int(ks_arr[-1]), replicas, seed, threads
    )
    estimates = np.mean(np.array(rows), axis=0)
    slope = float(np.polyfit(np.log(ks_arr), np.log(estimates), 1)[0])
    goal = {"U": order, "X": order, "V": order // 2, "M": order // 2}[target]
    return MomentGrowthReport(
        target, order, tuple(int(k) for k in ks_arr), tuple(float(e) for e in estimates), slope, float(goal)
    )
