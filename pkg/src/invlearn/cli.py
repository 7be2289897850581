"""Command-line interface for the experiment harness.

Subcommands: generate (training-set CSV), erm (single fit), verify
(assumption checklist), rates (rate experiment), bounds (bound curves).
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from . import bounds as bounds_mod
from .errors import ConfigurationError, InvlearnError
from .experiment import (ExperimentConfig, run_rate_experiment,
                         run_verification_suite)
from .risk import ErmOptions, empirical_risk, erm_solve, expected_loss_mc
from .stochastics import draw_training_set


def _load_config(path):
    if path is None:
        raise ConfigurationError("--config is required for this subcommand")
    try:
        text = pathlib.Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"malformed config JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc


def _experiment_config(args) -> ExperimentConfig:
    raw = _load_config(args.config)
    if args.seed is not None:
        raw = {**raw, "master_seed": args.seed}
    return ExperimentConfig.from_dict(raw)


def _out_dir(args) -> pathlib.Path:
    out = pathlib.Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    cfg = _experiment_config(args)
    m = args.m or max(cfg.m_grid)
    ts = draw_training_set(cfg.problem, m, cfg.master_seed)
    path = _out_dir(args) / "training_set.csv"
    ts.to_csv(path)
    print(f"wrote {path} ({m} pairs)")
    return 0


def cmd_erm(args) -> int:
    from .experiment import build_family
    cfg = _experiment_config(args)
    m = args.m or max(cfg.m_grid)
    family = build_family(cfg)
    ts = draw_training_set(cfg.problem, m, cfg.master_seed)
    res = erm_solve(cfg.param_class, family, ts,
                    ErmOptions(tol=cfg.erm_tol, n_starts=cfg.n_starts,
                               max_iter=cfg.max_iter, seed=cfg.master_seed))
    mc = expected_loss_mc(cfg.problem, res.theta, family, cfg.n_mc,
                          cfg.master_seed + 1)
    print(json.dumps({
        "theta_hat": res.theta.tolist(),
        "empirical_risk": res.objective,
        "expected_loss_mc": mc.estimate,
        "expected_loss_halfwidth": mc.halfwidth,
        "erm_residual": res.residual,
        "converged": res.converged,
    }, indent=2))
    return 0


def cmd_verify(args) -> int:
    cfg = _experiment_config(args)
    report = run_verification_suite(cfg)
    print(json.dumps(report, indent=2, default=str))
    return 0 if report["passed"] else 1


def cmd_rates(args) -> int:
    cfg = _experiment_config(args)
    fit = run_rate_experiment(cfg, out_dir=_out_dir(args),
                              threads=args.threads)
    print(json.dumps(fit.summary(), indent=2, sort_keys=True))
    return 0


def cmd_bounds(args) -> int:
    raw = _load_config(args.config)
    if "m_grid" not in raw:
        raise ConfigurationError("m_grid required")
    spec = raw.get("bounds", {})
    model = spec.get("model", {"kind": "euclidean_ball",
                               "d": raw.get("param_class", {}).get("dim", 1),
                               "D": 1.0})
    cov = bounds_mod.CoveringModel(**model)
    out = []
    for m in raw["m_grid"]:
        inputs = bounds_mod.BoundInputs(
            K=spec.get("K", 1.0), M_ell=spec.get("M_ell", 1.0),
            q=spec.get("q", 1), alpha=spec.get("alpha", 1.0), m=int(m),
            D=spec.get("D", 1.0), C=spec.get("C", 1.0),
            C1=spec.get("C1", 1.0), C2=spec.get("C2", 1.0))
        curve = bounds_mod.covering_bound(inputs, cov, r=inputs.D)
        entry = {"m": int(m), "inputs": {
                     "K": inputs.K, "M_ell": inputs.M_ell, "q": inputs.q,
                     "alpha": inputs.alpha, "D": inputs.D},
                 **curve.to_dict()}
        try:
            entry["chaining_r0"] = bounds_mod.chaining_bound(inputs, cov, 0.0)
        except ConfigurationError as exc:
            entry["chaining_r0"] = None
            entry["chaining_note"] = str(exc)
        out.append(entry)
    text = json.dumps(out, indent=2)
    if args.out:
        path = _out_dir(args) / "bounds.json"
        path.write_text(text + "\n")
        print(f"wrote {path}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invlearn",
        description="Learned-reconstruction sample-error laboratory")
    parser.add_argument("--config", help="path to the JSON experiment config")
    parser.add_argument("--seed", type=int, default=None,
                        help="override master_seed from the config")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for independent trials")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw a training set, write CSV")
    p.add_argument("--m", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("erm", help="single empirical-risk fit")
    p.add_argument("--m", type=int, default=None)
    p.set_defaults(func=cmd_erm)

    p = sub.add_parser("verify", help="run the assumption checklist")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rates", help="run the rate experiment")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("bounds", help="evaluate bound curves over m_grid")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvlearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
