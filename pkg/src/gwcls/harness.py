"""Monte Carlo experiments comparing scaled estimator errors with their limits."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .cls import estimate
from .errors import EmptySample, GWCLSError
from .limits import DEFAULT_STEPS, LimitBatch, limit_ab_degenerate_sigma2, limit_rho_degenerate_sigma2, sample_limits
from .model import ModelSpec, Regime, classify_regime
from .simulate import DOMAIN_REFERENCE, RngStream, Trajectory, map_replicas

__all__ = [
    "ScaledErrors",
    "scaled_errors",
    "joint_statistics",
    "ks_two_sample",
    "existence_frequencies",
    "ExperimentConfig",
    "ExperimentReport",
    "Check",
    "run_experiment",
    "write_report",
]

# replicas of successive sample sizes live on disjoint stream ranges
N_STREAM_STRIDE = 2**32


@dataclass(frozen=True)
class ScaledErrors:
    rho_n: Optional[float]
    rho_n32: Optional[float]
    alpha_sqrt_n: Optional[float]
    beta_sqrt_n: Optional[float]


def scaled_errors(spec: ModelSpec, traj: Trajectory, m_eps=None) -> ScaledErrors:
    """n(rho-1), n^{3/2}(rho-1), sqrt(n)(alpha_hat-alpha), sqrt(n)(beta_hat-beta).

    Entries are None where the estimator does not exist.
    """
    m_eps = spec.m_eps if m_eps is None else m_eps
    res = estimate(traj, m_eps)
    n = res.n
    if res.rho_hat is None:
        r1 = r32 = None
    else:
        r1 = n * (res.rho_hat - 1.0)
        r32 = n**1.5 * (res.rho_hat - 1.0)
    if res.alpha_hat is None:
        a = b = None
    else:
        a = math.sqrt(n) * (res.alpha_hat - spec.alpha)
        b = math.sqrt(n) * (res.beta_hat - spec.beta)
    return ScaledErrors(r1, r32, a, b)


_JOINT_POWERS = {
    Regime.GENERAL: (3.0, 2.0, 2.0, 1.5),
    Regime.TOTAL_DEGENERATE: (3.0, 2.0, 1.5, 1.5),
    Regime.DIFF_DEGENERATE_IMMIGRATION_ACTIVE: (3.0, 1.0, 2.0, 0.5),
    Regime.DIFF_DEGENERATE_IMMIGRATION_NULL: (3.0, 1.0, 2.0, 0.5),
}


def joint_statistics(spec: ModelSpec, traj: Trajectory) -> np.ndarray:
    """Normalised sums (sum U^2, sum V^2, sum <1,M>U, sum <u~,M>V) with the
    regime's powers of n."""
    n = traj.n
    u = traj.u_seq[:-1].astype(float)
    v = traj.v_seq[:-1].astype(float)
    m = traj.m_seq
    raw = (
        math.fsum(u * u),
        math.fsum(v * v),
        math.fsum((m[:, 0] + m[:, 1]) * u),
        math.fsum((m[:, 0] - m[:, 1]) * v),
    )
    powers = _JOINT_POWERS[classify_regime(spec)]
    return np.array([r / n**p for r, p in zip(raw, powers)])


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySample("KS distance needs two non-empty samples")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def existence_frequencies(
    spec: ModelSpec, n: int, replicas: int, seed: int, threads: int = 1
) -> Tuple[float, float]:
    """Fractions of replicas whose sample lies in H_n and in tH_n."""
    if replicas < 100:
        raise ValueError("use at least 100 replicas")
    from .cls import in_Hn, in_tHn

    flags = np.array(map_replicas(lambda t: (in_Hn(t), in_tHn(t)), spec, n, replicas, seed, threads))
    return float(flags[:, 0].mean()), float(flags[:, 1].mean())


# -- experiments -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    model: ModelSpec
    n_values: Tuple[int, ...] = (200, 2000)
    replicas: int = 5000
    limit_paths: int = 5000
    sde_steps: int = DEFAULT_STEPS
    seed: int = 20121019
    threads: int = 1
    model_label: str = ""
    ks_tol: float = 0.05
    var_tol: float = 0.15
    monotone_slack: float = 0.02
    existence_min: float = 0.99
    output_path: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if self.replicas < 100:
            raise ValueError("replicas must be >= 100")
        if self.limit_paths < 100:
            raise ValueError("limit_paths must be >= 100")
        if not self.n_values or any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError("n_values must be non-empty and strictly increasing")
        if self.n_values[0] < 1:
            raise ValueError("sample sizes must be positive")


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.6g} (threshold {self.threshold:.6g})"


@dataclass(eq=False)
class SizeResult:
    """Everything computed for one sample size n."""

    n: int
    in_Hn: np.ndarray
    in_tHn: np.ndarray
    errors: np.ndarray  # columns rho_n, rho_n32, alpha_sqrt_n, beta_sqrt_n; NaN where undefined
    joint: np.ndarray
    failures: List[Tuple[int, str]]
    metrics: Dict[str, float] = field(default_factory=dict)


@dataclass(eq=False)
class ExperimentReport:
    config: ExperimentConfig
    regime: Regime
    limit: LimitBatch
    rho_reference: np.ndarray
    ab_reference: np.ndarray
    sizes: List[SizeResult]
    checks: List[Check]
    theory: Dict[str, float]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> dict:
        cfg = self.config
        return {
            "gwcls_version": __version__,
            "model": cfg.model_label or cfg.model.name,
            "regime": self.regime.value,
            "alpha": cfg.model.alpha,
            "beta": cfg.model.beta,
            "n_values": list(cfg.n_values),
            "replicas": cfg.replicas,
            "limit_paths": cfg.limit_paths,
            "sde_steps": cfg.sde_steps,
            "seed": cfg.seed,
            "theory": self.theory,
            "sizes": [
                {"n": s.n, "failures": len(s.failures), **{k: s.metrics[k] for k in sorted(s.metrics)}}
                for s in self.sizes
            ],
            "checks": [
                {"name": c.name, "value": c.value, "threshold": c.threshold, "passed": c.passed}
                for c in self.checks
            ],
            "passed": self.passed,
        }


def _replica_record(spec: ModelSpec, traj: Trajectory):
    try:
        res = estimate(traj, spec.m_eps)
        se = scaled_errors(spec, traj)
        js = joint_statistics(spec, traj)
    except (GWCLSError, OverflowError, ArithmeticError) as exc:
        return None, f"{type(exc).__name__}: {exc}"
    err = [np.nan if v is None else v for v in (se.rho_n, se.rho_n32, se.alpha_sqrt_n, se.beta_sqrt_n)]
    return (res.in_Hn, res.in_tHn, err, js), None


def _defined(x: np.ndarray) -> np.ndarray:
    return x[~np.isnan(x)]


def _sd(x: np.ndarray) -> float:
    x = _defined(x)
    return float(np.std(x, ddof=1)) if x.size > 1 else float("nan")


def _var(x: np.ndarray) -> float:
    x = _defined(x)
    return float(np.var(x, ddof=1)) if x.size > 1 else float("nan")


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Simulate every sample size, the limit laws, and evaluate the checks."""
    spec = config.model
    regime = classify_regime(spec)
    alpha, beta = spec.alpha, spec.beta
    limit = sample_limits(
        spec.drift, spec.total_offspring_var, config.limit_paths, config.seed, config.sde_steps, config.threads
    )
    theory: Dict[str, float] = {"drift": spec.drift, "diffusion": spec.total_offspring_var}

    ref_rng = RngStream(config.seed, 0, DOMAIN_REFERENCE).generator()
    z_rho = ref_rng.standard_normal(config.limit_paths)
    z_ab = ref_rng.standard_normal(config.limit_paths)

    if regime is Regime.TOTAL_DEGENERATE:
        theory["sigma2_rho"] = limit_rho_degenerate_sigma2(spec)
        rho_reference = math.sqrt(theory["sigma2_rho"]) * z_rho
        rho_col = 1
    else:
        rho_reference = limit.rho()
        rho_col = 0
    if regime is Regime.DIFF_DEGENERATE_IMMIGRATION_ACTIVE:
        theory["sigma2_ab"] = limit_ab_degenerate_sigma2(spec)
        ab_reference = math.sqrt(theory["sigma2_ab"]) * z_ab
    elif regime is Regime.DIFF_DEGENERATE_IMMIGRATION_NULL:
        ab_reference = np.empty(0)
    else:
        ab_reference = limit.ab_scalar(alpha, beta)
        if regime is Regime.TOTAL_DEGENERATE:
            theory["sigma2_ab"] = 4.0 * alpha * beta / 3.0

    sizes = []
    for i, n in enumerate(config.n_values):
        records = map_replicas(
            lambda t: _replica_record(spec, t),
            spec,
            n,
            config.replicas,
            config.seed,
            config.threads,
            first_stream=i * N_STREAM_STRIDE,
        )
        ok = [(j, r) for j, (r, _) in enumerate(records) if r is not None]
        failures = [(j, msg) for j, (r, msg) in enumerate(records) if r is None]
        h = np.array([r[0] for _, r in ok], dtype=bool)
        th = np.array([r[1] for _, r in ok], dtype=bool)
        errors = np.array([r[2] for _, r in ok], dtype=float).reshape(-1, 4)
        joint = np.array([r[3] for _, r in ok], dtype=float).reshape(-1, 4)
        s = SizeResult(n, h, th, errors, joint, failures)
        m = s.metrics
        m["freq_Hn"] = float(h.mean()) if h.size else 0.0
        m["freq_tHn"] = float(th.mean()) if th.size else 0.0
        rho_stat = _defined(errors[:, rho_col])
        m["ks_rho"] = ks_two_sample(rho_stat, rho_reference) if rho_stat.size else 1.0
        m["sd_rho_n"] = _sd(errors[:, 0])
        m["sd_rho_n32"] = _sd(errors[:, 1])
        if "sigma2_rho" in theory:
            m["var_ratio_rho"] = _var(errors[:, 1]) / theory["sigma2_rho"]
        a_stat = _defined(errors[:, 2])
        if ab_reference.size:
            m["ks_ab"] = ks_two_sample(a_stat, ab_reference) if a_stat.size else 1.0
        if "sigma2_ab" in theory and a_stat.size > 1:
            m["var_ratio_ab"] = _var(errors[:, 2]) / theory["sigma2_ab"]
        if a_stat.size > 1:
            both = ~np.isnan(errors[:, 2])
            m["corr_ab"] = float(np.corrcoef(errors[both, 2], errors[both, 3])[0, 1])
            m["sd_line"] = _sd(errors[both, 2] + errors[both, 3])
        for k in range(4):
            m[f"joint_mean_{k + 1}"] = float(np.mean(joint[:, k])) if joint.size else float("nan")
        sizes.append(s)

    checks = _checks(config, regime, sizes, theory)
    return ExperimentReport(config, regime, limit, rho_reference, ab_reference, sizes, checks, theory)


def _checks(config: ExperimentConfig, regime: Regime, sizes: List[SizeResult], theory) -> List[Check]:
    last = sizes[-1].metrics
    n = sizes[-1].n
    out = [Check(f"ks_rho[n={n}]", last["ks_rho"], config.ks_tol, last["ks_rho"] < config.ks_tol)]
    if "ks_ab" in last:
        out.append(Check(f"ks_ab[n={n}]", last["ks_ab"], config.ks_tol, last["ks_ab"] < config.ks_tol))
    for key in ("var_ratio_rho", "var_ratio_ab"):
        if key in last:
            dev = abs(last[key] - 1.0)
            out.append(Check(f"{key}[n={n}]", last[key], config.var_tol, dev <= config.var_tol))
    if len(sizes) > 1:
        first = sizes[0].metrics
        for key in ("ks_rho", "ks_ab"):
            if key in last:
                bound = first[key] + config.monotone_slack
                out.append(Check(f"{key}_monotone[n={sizes[0].n}->{n}]", last[key], bound, last[key] <= bound))
    out.append(Check(f"freq_Hn[n={n}]", last["freq_Hn"], config.existence_min, last["freq_Hn"] >= config.existence_min))
    if regime is Regime.DIFF_DEGENERATE_IMMIGRATION_NULL:
        out.append(Check(f"freq_tHn_zero[n={n}]", last["freq_tHn"], 0.0, last["freq_tHn"] == 0.0))
    else:
        ok = last["freq_tHn"] >= config.existence_min
        out.append(Check(f"freq_tHn[n={n}]", last["freq_tHn"], config.existence_min, ok))
    return out


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    return obj


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def write_report(report: ExperimentReport, out_dir: str) -> List[str]:
    """Write summary.json, limit_samples.csv and one scaled_errors CSV per n."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for s in report.sizes:
        path = os.path.join(out_dir, f"scaled_errors_n{s.n}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replica", "in_Hn", "in_tHn", "rho_n", "rho_n32", "alpha_sqrt_n", "beta_sqrt_n",
                        "joint1", "joint2", "joint3", "joint4"])
            for j in range(s.errors.shape[0]):
                w.writerow([j, int(s.in_Hn[j]), int(s.in_tHn[j]), *map(_fmt, s.errors[j]), *map(_fmt, s.joint[j])])
        written.append(path)
    lim = report.limit
    path = os.path.join(out_dir, "limit_samples.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "int_Y2", "int_Y", "int_Y_dM", "int_Y_dWt", "rho_reference", "ab_reference"])
        for i in range(len(lim)):
            ab = report.ab_reference[i] if report.ab_reference.size else None
            w.writerow([i, _fmt(lim.int_Y2[i]), _fmt(lim.int_Y[i]), _fmt(lim.int_Y_dM[i]), _fmt(lim.int_Y_dWt[i]),
                        _fmt(report.rho_reference[i]), _fmt(ab)])
    written.append(path)
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w") as fh:
        json.dump(_json_safe(report.summary()), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    return written
