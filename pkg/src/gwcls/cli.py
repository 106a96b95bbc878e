"""Command line interface: ``gwcls simulate|estimate|limit|verify-moments|experiment``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from collections import defaultdict
from typing import Dict, List, Optional

import numpy as np

from .cls import estimate
from .config import MODEL_NAMES, load_config, model_from_config
from .errors import GWCLSError
from .harness import ExperimentConfig, run_experiment, write_report
from .limits import DEFAULT_STEPS, limit_ab_degenerate_sigma2, limit_rho_degenerate_sigma2, sample_limits
from .model import ModelSpec, Regime, classify_regime
from .moments import moment_growth
from .simulate import Trajectory, map_replicas

DEFAULT_SEED = 20121019


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _settings(args) -> Dict[str, object]:
    cfg = load_config(args.config) if args.config else {}
    for key in ("model", "alpha", "n", "replicas", "seed", "threads", "sde_steps", "limit_paths",
                "target", "order", "band"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in ("ks", "n_values"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = [int(t) for t in val.replace(",", " ").split()]
    if args.out is not None:
        cfg["output"] = args.out
    cfg.setdefault("seed", DEFAULT_SEED)
    cfg.setdefault("threads", 1)
    return cfg


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_rows(path, header: List[str], rows) -> None:
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    finally:
        if close:
            fh.close()


def _trajectory_rows(replica: int, t: Trajectory):
    for k in range(t.n + 1):
        m = t.m_seq[k - 1] if k else (None, None)
        yield (replica, k, t.states[k, 0], t.states[k, 1], t.u_seq[k], t.v_seq[k], m[0], m[1])


def cmd_simulate(args) -> int:
    cfg = _settings(args)
    spec = model_from_config(cfg)
    n = int(cfg.get("n", 100))
    reps = int(cfg.get("replicas", 1))
    trajs = map_replicas(lambda t: t, spec, n, reps, int(cfg["seed"]), int(cfg["threads"]))
    rows = (row for r, t in enumerate(trajs) for row in _trajectory_rows(r, t))
    _write_rows(cfg.get("output"), ["replica", "k", "X1", "X2", "U", "V", "M1", "M2"], rows)
    return 0


def _read_trajectories(path: str, spec: ModelSpec) -> List[Trajectory]:
    by_rep = defaultdict(list)
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            by_rep[int(rec.get("replica") or 0)].append((int(rec["k"]), int(rec["X1"]), int(rec["X2"])))
    out = []
    for rep in sorted(by_rep):
        rows = sorted(by_rep[rep])
        if [k for k, _, _ in rows] != list(range(len(rows))):
            raise GWCLSError(f"replica {rep}: k must run 0..n without gaps")
        out.append(Trajectory.from_states([(a, b) for _, a, b in rows], spec))
    return out


def cmd_estimate(args) -> int:
    cfg = _settings(args)
    spec = model_from_config(cfg)
    if args.input:
        trajs = _read_trajectories(args.input, spec)
    else:
        n = int(cfg.get("n", 100))
        trajs = map_replicas(lambda t: t, spec, n, int(cfg.get("replicas", 1)), int(cfg["seed"]), int(cfg["threads"]))
    rows = []
    for r, t in enumerate(trajs):
        res = estimate(t, spec.m_eps)
        rows.append((r, res.n, res.in_Hn, res.in_tHn, res.rho_hat, res.delta_hat, res.alpha_hat, res.beta_hat))
    _write_rows(cfg.get("output"),
                ["replica", "n", "in_Hn", "in_tHn", "rho_hat", "delta_hat", "alpha_hat", "beta_hat"], rows)
    return 0


def cmd_limit(args) -> int:
    cfg = _settings(args)
    spec = model_from_config(cfg)
    regime = classify_regime(spec)
    paths = int(cfg.get("limit_paths", 1000))
    steps = int(cfg.get("sde_steps", DEFAULT_STEPS))
    batch = sample_limits(spec.drift, spec.total_offspring_var, paths, int(cfg["seed"]), steps, int(cfg["threads"]))
    rows = ((i, batch.int_Y2[i], batch.int_Y[i], batch.int_Y_dM[i], batch.int_Y_dWt[i]) for i in range(paths))
    _write_rows(cfg.get("output"), ["path", "int_Y2", "int_Y", "int_Y_dM", "int_Y_dWt"], rows)
    summary = {"regime": regime.value, "drift": spec.drift, "diffusion": spec.total_offspring_var,
               "paths": paths, "sde_steps": steps}
    if regime is Regime.TOTAL_DEGENERATE:
        summary["sigma2_rho"] = limit_rho_degenerate_sigma2(spec)
    if regime is Regime.DIFF_DEGENERATE_IMMIGRATION_ACTIVE:
        summary["sigma2_ab"] = limit_ab_degenerate_sigma2(spec)
    stream = sys.stderr if cfg.get("output") in (None, "-") else sys.stdout
    print(json.dumps(summary, sort_keys=True), file=stream)
    return 0


def cmd_verify_moments(args) -> int:
    cfg = _settings(args)
    spec = model_from_config(cfg)
    band = float(cfg.get("band", 0.2))
    report = moment_growth(
        spec,
        str(cfg.get("target", "U")),
        int(cfg.get("order", 2)),
        cfg.get("ks", [64, 128, 256, 512]),
        int(cfg.get("replicas", 10000)),
        int(cfg["seed"]),
        int(cfg["threads"]),
    )
    rows = ((report.target, report.order, k, e, report.fitted_slope, report.target_slope)
            for k, e in zip(report.ks, report.estimates))
    _write_rows(cfg.get("output"), ["target", "order", "k", "estimate", "fitted_slope", "target_slope"], rows)
    ok = report.within(band)
    stream = sys.stderr if cfg.get("output") in (None, "-") else sys.stdout
    print(f"{'PASS' if ok else 'FAIL'} slope[{report.target}^{report.order}]: {report.fitted_slope:.4f} "
          f"(target {report.target_slope:g} +/- {band:g})", file=stream)
    return 0 if ok else 1


def cmd_experiment(args) -> int:
    cfg = _settings(args)
    spec = model_from_config(cfg)
    kwargs = {k: cfg[k] for k in ("replicas", "limit_paths", "sde_steps", "seed", "threads", "ks_tol",
                                   "var_tol", "monotone_slack", "existence_min") if k in cfg}
    if "n_values" in cfg:
        kwargs["n_values"] = tuple(cfg["n_values"])
    elif "n" in cfg:
        kwargs["n_values"] = (int(cfg["n"]),)
    config = ExperimentConfig(spec, model_label=str(cfg.get("model", "general")), **kwargs)
    report = run_experiment(config)
    out = str(cfg.get("output", "gwcls-experiment"))
    write_report(report, out)
    for c in report.checks:
        print(c.line())
    print(f"{'PASS' if report.passed else 'FAIL'} experiment ({report.regime.value}); report in {out}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gwcls", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--model", choices=MODEL_NAMES)
        p.add_argument("--alpha", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--out", help="output path ('-' for stdout)")
        return p

    p = common(sub.add_parser("simulate", help="simulate trajectories as CSV"))
    p.add_argument("--n", type=int)
    p.add_argument("--replicas", type=int)
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("estimate", help="CLS estimates per replica"))
    p.add_argument("--input", help="trajectory CSV written by 'simulate'")
    p.add_argument("--n", type=int)
    p.add_argument("--replicas", type=int)
    p.set_defaults(func=cmd_estimate)

    p = common(sub.add_parser("limit", help="sample limit functionals"))
    p.add_argument("--paths", dest="limit_paths", type=int)
    p.add_argument("--steps", dest="sde_steps", type=int)
    p.set_defaults(func=cmd_limit)

    p = common(sub.add_parser("verify-moments", help="moment growth exponents"))
    p.add_argument("--target", choices=["U", "V", "M", "X"])
    p.add_argument("--order", type=int)
    p.add_argument("--ks", help="comma separated time indices")
    p.add_argument("--replicas", type=int)
    p.add_argument("--band", type=float)
    p.set_defaults(func=cmd_verify_moments)

    p = common(sub.add_parser("experiment", help="finite-n vs limit-law experiment"))
    p.add_argument("--n-values", dest="n_values", help="comma separated sample sizes")
    p.add_argument("--replicas", type=int)
    p.add_argument("--paths", dest="limit_paths", type=int)
    p.add_argument("--steps", dest="sde_steps", type=int)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GWCLSError, OSError) as exc:
        print(f"gwcls: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
