"""Samplers for the limit laws of the scaled CLS estimators.

The limit diffusion is dY = a dt + sqrt(c Y+) dW on [0, 1] with Y_0 = 0,
where a = <1, m_eps> and c = <Vbar_xi 1, 1>. Paths use the full-truncation
Euler scheme; stochastic integrals are left-point (Ito) sums and time
integrals use the trapezoid rule on the same grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .errors import DegenerateDenominator, WrongRegime
from .model import ModelSpec, Regime, classify_regime
from .simulate import DOMAIN_LIMIT, RngStream, _as_generator, _run_chunks

__all__ = [
    "DEFAULT_STEPS",
    "DiffusionPath",
    "LimitSample",
    "simulate_Y",
    "limit_functionals",
    "limit_rho_sample",
    "limit_ab_sample",
    "limit_rho_degenerate_sigma2",
    "limit_ab_degenerate_sigma2",
    "joint_limit_sample",
    "LimitBatch",
    "sample_limits",
]

DEFAULT_STEPS = 2**14
MIN_DENOMINATOR = 1e-14
PARAM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiffusionPath:
    """Discretised Y on a uniform grid of [0, 1] plus independent noises.

    ``dw`` drives Y; ``dw_tilde`` and ``dw_tt`` are independent Brownian
    increments used by the (alpha, beta) limit and the unit-total limit.
    """

    grid: np.ndarray
    y: np.ndarray
    dw: np.ndarray
    dw_tilde: np.ndarray
    dw_tt: np.ndarray
    a: float
    c: float
    n_clamped: int

    @property
    def steps(self) -> int:
        return self.dw.shape[0]

    @property
    def dt(self) -> float:
        return 1.0 / self.steps


@dataclass(frozen=True)
class LimitSample:
    int_Y2: float
    int_Y: float
    int_Y_dM: float
    int_Y_dWt: float
    int_t_dWtt: float
    w_tilde_1: float


def simulate_Y(
    a: float,
    c: float,
    steps: int = DEFAULT_STEPS,
    rng=None,
    increments: Optional[np.ndarray] = None,
) -> DiffusionPath:
    """Simulate Y on ``steps`` uniform steps.

    Brownian increments come either from ``rng`` (a Generator or RngStream)
    or from ``increments``, an array of shape (3, steps) ordered as
    (W, W-tilde, W-double-tilde); the latter lets callers couple grids.
    When c == 0 the path is the exact line a t.
    """
    if not a > 0:
        raise ValueError("drift a must be positive")
    if c < 0:
        raise ValueError("diffusion coefficient c must be non-negative")
    if steps < 2:
        raise ValueError("need at least 2 steps")
    dt = 1.0 / steps
    if increments is None:
        if rng is None:
            raise ValueError("pass rng or increments")
        increments = _as_generator(rng).standard_normal((3, steps)) * math.sqrt(dt)
    else:
        increments = np.asarray(increments, dtype=float)
        if increments.shape != (3, steps):
            raise ValueError(f"increments must have shape (3, {steps})")
    grid = np.arange(steps + 1) * dt
    if c == 0:
        y = a * grid
        clamped = 0
    else:
        y = np.empty(steps + 1)
        clamped = int(_kernels.euler_cir_kernel(float(a), float(c), dt, increments[0], y))
    return DiffusionPath(grid, y, increments[0], increments[1], increments[2], float(a), float(c), clamped)


def limit_functionals(path: DiffusionPath) -> LimitSample:
    # Ito integrals use left points; time integrals use the trapezoid rule.
    # numpy's pairwise summation keeps the 2**14-term sums accurate.
    y_all = path.y
    y = y_all[:-1]
    dt = path.dt
    dy = np.diff(y_all)
    return LimitSample(
        int_Y2=float(np.sum(y_all * y_all) - 0.5 * (y_all[0] ** 2 + y_all[-1] ** 2)) * dt,
        int_Y=float(np.sum(y_all) - 0.5 * (y_all[0] + y_all[-1])) * dt,
        int_Y_dM=float(np.sum(y * (dy - path.a * dt))),
        int_Y_dWt=float(np.sum(y * path.dw_tilde)),
        int_t_dWtt=float(np.sum(path.grid[:-1] * path.dw_tt)),
        w_tilde_1=float(np.sum(path.dw_tilde)),
    )


def limit_rho_sample(path: DiffusionPath) -> float:
    """int Y d(Y - a t) / int Y^2 dt."""
    f = limit_functionals(path)
    if f.int_Y2 < MIN_DENOMINATOR:
        raise DegenerateDenominator("int Y^2 dt vanishes")
    return f.int_Y_dM / f.int_Y2


def limit_ab_sample(path: DiffusionPath, alpha: float, beta: float) -> Tuple[float, float]:
    """sqrt(alpha beta) int Y dW~ / int Y dt, returned as s (1, -1)."""
    f = limit_functionals(path)
    if f.int_Y < MIN_DENOMINATOR:
        raise DegenerateDenominator("int Y dt vanishes")
    s = math.sqrt(alpha * beta) * f.int_Y_dWt / f.int_Y
    return s, -s


def limit_rho_degenerate_sigma2(spec: ModelSpec) -> float:
    """Variance 3 <V_eps 1, 1> / <1, m_eps>^2 of the normal limit of n^{3/2}(rho_hat - 1)."""
    if classify_regime(spec) is not Regime.TOTAL_DEGENERATE:
        raise WrongRegime("normal rho limit needs unit-total offspring")
    return 3.0 * spec.immigration_total_var / spec.drift**2


def limit_ab_degenerate_sigma2(spec: ModelSpec) -> float:
    """Variance <V_eps u~, u~> / (4 E<u~, eps>^2) of the normal (alpha, beta) limit."""
    regime = classify_regime(spec)
    if not regime.diff_degenerate:
        raise WrongRegime("normal (alpha, beta) limit needs equal offspring pairs")
    if regime is Regime.DIFF_DEGENERATE_IMMIGRATION_NULL:
        raise ZeroDivisionError("E <u~, eps>^2 = 0: (alpha, beta) estimator never exists")
    return spec.immigration_diff_var / (4.0 * spec.immigration_diff_second_moment)


def _check_path(spec: ModelSpec, path: DiffusionPath) -> None:
    if abs(path.a - spec.drift) > PARAM_TOL or abs(path.c - spec.total_offspring_var) > PARAM_TOL:
        raise WrongRegime(
            f"path has (a, c) = ({path.a}, {path.c}), model needs "
            f"({spec.drift}, {spec.total_offspring_var})"
        )


def _joint_from_functionals(spec: ModelSpec, regime: Regime, f) -> np.ndarray:
    ct = spec.diff_offspring_var
    ab = spec.alpha * spec.beta
    if regime is Regime.GENERAL:
        third = f.int_Y_dM
    elif regime is Regime.TOTAL_DEGENERATE:
        third = math.sqrt(spec.immigration_total_var) * spec.drift * f.int_t_dWtt
    else:
        e2 = spec.immigration_diff_second_moment
        fourth = math.sqrt(spec.immigration_diff_var * e2) * f.w_tilde_1
        return np.array([f.int_Y2, e2, f.int_Y_dM, fourth])
    return np.array([f.int_Y2, ct / (4 * ab) * f.int_Y, third, ct / (2 * math.sqrt(ab)) * f.int_Y_dWt])


def joint_limit_sample(spec: ModelSpec, path: DiffusionPath) -> np.ndarray:
    """Limit of the regime's vector of normalised sums (see harness.joint_statistics)."""
    _check_path(spec, path)
    return _joint_from_functionals(spec, classify_regime(spec), limit_functionals(path))


@dataclass(frozen=True, eq=False)
class LimitBatch:
    """Functionals of many independent limit paths, one array per field."""

    a: float
    c: float
    steps: int
    int_Y2: np.ndarray
    int_Y: np.ndarray
    int_Y_dM: np.ndarray
    int_Y_dWt: np.ndarray
    int_t_dWtt: np.ndarray
    w_tilde_1: np.ndarray
    n_clamped: np.ndarray

    def __len__(self) -> int:
        return self.int_Y2.shape[0]

    def rho(self) -> np.ndarray:
        return self.int_Y_dM / self.int_Y2

    def ab_scalar(self, alpha: float, beta: float) -> np.ndarray:
        return math.sqrt(alpha * beta) * self.int_Y_dWt / self.int_Y

    def joint(self, spec: ModelSpec) -> np.ndarray:
        regime = classify_regime(spec)
        return np.array([_joint_from_functionals(spec, regime, self.sample(i)) for i in range(len(self))])

    def sample(self, i: int) -> LimitSample:
        return LimitSample(
            float(self.int_Y2[i]),
            float(self.int_Y[i]),
            float(self.int_Y_dM[i]),
            float(self.int_Y_dWt[i]),
            float(self.int_t_dWtt[i]),
            float(self.w_tilde_1[i]),
        )


def sample_limits(
    a: float,
    c: float,
    paths: int,
    seed: int,
    steps: int = DEFAULT_STEPS,
    threads: int = 1,
    first_stream: int = 0,
) -> LimitBatch:
    """Functionals of ``paths`` independent limit paths, path i on its own stream."""

    def one(i):
        path = simulate_Y(a, c, steps, RngStream(seed, i, DOMAIN_LIMIT))
        f = limit_functionals(path)
        return (f.int_Y2, f.int_Y, f.int_Y_dM, f.int_Y_dWt, f.int_t_dWtt, f.w_tilde_1, path.n_clamped)

    rows = np.array(_run_chunks(one, range(first_stream, first_stream + paths), threads), dtype=float)
    rows = rows.reshape(paths, 7)
    return LimitBatch(a, c, steps, *(rows[:, j].copy() for j in range(6)), rows[:, 6].astype(np.int64))
