"""Experiment harness: configs, rate experiments, verification suite.

The central experiment draws training sets of increasing size m, runs ERM
on each, measures the excess expected loss against the optimal-target
proxy on a shared Monte Carlo sample, and fits the log-log decay rate of
the mean excess, to be compared with the predicted exponent.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from .errors import ConfigurationError, ConvergenceError
from .hypotheses import (ElasticNetFamily, FixedPointFamily, ParamClass,
                         TikhonovFamily, certify_stability, check_g_hypotheses)
from .operators import GaussianSpec
from .risk import (ErmOptions, empirical_risk, erm_solve, expected_loss_mc,
                   optimal_target_proxy, _batch_losses)
from .stochastics import (BoundedSpec, ProblemDistribution, draw_training_set,
                          empirical_average_contraction, orlicz_norm,
                          substream, tail_check)

SLOPE_BAND = 0.15  # acceptance band around the predicted exponent


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash of a string (config fingerprinting)."""
    h = 0xcbf29ce484222325
    for b in text.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001b3) & 0xFFFFFFFFFFFFFFFF
    return h


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _require(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise ConfigurationError(f"missing required config key: {path}.{key}"
                                 .lstrip("."))
    return cfg[key]


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemDistribution
    family_spec: dict
    param_class: ParamClass
    m_grid: tuple
    trials_per_m: int
    proxy_m: int
    n_mc: int
    master_seed: int
    erm_tol: float = 1e-8
    recon_tol: float = 1e-10
    n_starts: int = 8
    max_iter: int = 500
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        mg = tuple(int(m) for m in self.m_grid)
        object.__setattr__(self, "m_grid", mg)
        if any(b <= a for a, b in zip(mg, mg[1:])) or not mg:
            raise ConfigurationError("m_grid must be non-empty, strictly increasing")
        if self.trials_per_m < 1:
            raise ConfigurationError("trials_per_m must be >= 1")
        if self.proxy_m < 100 * max(mg):
            raise ConfigurationError("proxy_m must be >= 100 * max(m_grid)")

    @property
    def digest(self) -> int:
        return fnv1a64(canonical_json(self.raw or self.to_dict()))

    def to_dict(self) -> dict:
        return {
            "problem": self.problem.to_dict(),
            "family": self.family_spec,
            "param_class": self.param_class.to_dict(),
            "m_grid": list(self.m_grid),
            "trials_per_m": self.trials_per_m,
            "proxy_m": self.proxy_m,
            "n_mc": self.n_mc,
            "master_seed": self.master_seed,
            "tolerances": {"erm_tol": self.erm_tol, "recon_tol": self.recon_tol},
            "erm": {"n_starts": self.n_starts, "max_iter": self.max_iter},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        problem = ProblemDistribution.from_dict(_require(d, "problem", ""))
        tol = d.get("tolerances", {})
        erm = d.get("erm", {})
        return cls(
            problem=problem,
            family_spec=dict(_require(d, "family", "")),
            param_class=ParamClass.from_dict(_require(d, "param_class", "")),
            m_grid=tuple(_require(d, "m_grid", "")),
            trials_per_m=int(_require(d, "trials_per_m", "")),
            proxy_m=int(_require(d, "proxy_m", "")),
            n_mc=int(_require(d, "n_mc", "")),
            master_seed=int(_require(d, "master_seed", "")),
            erm_tol=float(tol.get("erm_tol", 1e-8)),
            recon_tol=float(tol.get("recon_tol", 1e-10)),
            n_starts=int(erm.get("n_starts", 8)),
            max_iter=int(erm.get("max_iter", 500)),
            raw=d,
        )


def build_family(cfg: ExperimentConfig):
    spec = cfg.family_spec
    kind = spec.get("kind")
    op = cfg.problem.forward
    if kind == "tikhonov":
        return TikhonovFamily(op, cfg.problem.noise,
                              structure=spec.get("structure", "full"))
    if kind == "elastic_net":
        return ElasticNetFamily(op, alpha=spec.get("alpha", 1.0),
                                eta=spec.get("eta", 0.5),
                                structure=spec.get("structure", "full"))
    if kind == "fixed_point":
        return FixedPointFamily(op, contraction_budget=spec.get(
            "contraction_budget", 0.5))
    raise ConfigurationError(f"unknown family kind at family.kind: {kind!r}")


def derived_seed(master: int, *indices: int) -> int:
    """Stable 63-bit child seed for (master, indices)."""
    ss = np.random.SeedSequence(entropy=int(master) & (2**64 - 1),
                                spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


# ---------------------------------------------------------------------------
# Rate experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    m: int
    trial: int
    sample_error: float
    emp_risk_hat: float
    exp_loss_hat: float
    exp_loss_star: float
    erm_residual: float
    seed: int
    failed: bool = False


@dataclass(frozen=True)
class RateFit:
    per_m: list
    slope: float | None
    slope_ci: tuple | None
    predicted_exponent: float
    verdict: str
    theta_star: np.ndarray
    trials: list = field(default_factory=list)
    config_digest: int = 0

    def csv_text(self) -> str:
        lines = ["m,trial,sample_error,emp_risk_hat,exp_loss_hat,"
                 "exp_loss_star,erm_residual,seed"]
        for t in self.trials:
            lines.append(f"{t.m},{t.trial},{t.sample_error:.17g},"
                         f"{t.emp_risk_hat:.17g},{t.exp_loss_hat:.17g},"
                         f"{t.exp_loss_star:.17g},{t.erm_residual:.17g},{t.seed}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "config_digest": self.config_digest,
            "theta_star": np.asarray(self.theta_star).tolist(),
            "per_m": self.per_m,
            "slope": self.slope,
            "slope_ci": list(self.slope_ci) if self.slope_ci else None,
            "predicted_exponent": self.predicted_exponent,
            "verdict": self.verdict,
        }

    def write(self, out_dir) -> None:
        import pathlib
        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "rates.csv").write_text(self.csv_text())
        (out / "summary.json").write_text(
            json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")


def _trimmed_mean(values: np.ndarray, frac: float = 0.02):
    """Mean after dropping the top/bottom ``frac`` of trials (outlier guard)."""
    v = np.sort(values)
    k = int(math.floor(frac * v.size))
    if 2 * k >= v.size:
        k = 0
    core = v[k:v.size - k] if k else v
    return float(core.mean()), float(core.std(ddof=1) / np.sqrt(core.size))


def run_rate_experiment(cfg: ExperimentConfig, out_dir=None, threads: int = 1,
                        max_failure_fraction: float = 0.05) -> RateFit:
    """The central experiment: mean excess loss versus m, with a rate fit.

    Fully deterministic given the config; trials are independent tasks
    keyed by (m, trial) and aggregated by index, so thread count never
    changes the output.
    """
    if cfg.trials_per_m < 10:
        raise ConfigurationError("rate fits need trials_per_m >= 10")
    family = build_family(cfg)
    pclass = cfg.param_class
    opts = ErmOptions(tol=cfg.erm_tol, n_starts=cfg.n_starts,
                      max_iter=cfg.max_iter, seed=derived_seed(cfg.master_seed, 7))
    theta_star = optimal_target_proxy(
        pclass, family, cfg.problem, cfg.proxy_m,
        derived_seed(cfg.master_seed, 11), opts, n_check_mc=cfg.n_mc)

    # one shared evaluation sample: common random numbers across all trials
    rng_eval = substream(cfg.master_seed, 9999)
    x_eval, y_eval = cfg.problem.sample(rng_eval, cfg.n_mc)
    per_star = _batch_losses(family, theta_star, x_eval, y_eval)
    loss_star = float(per_star.mean())

    def run_trial(i_m, m, t):
        seed = derived_seed(cfg.master_seed, m, t)
        ts = draw_training_set(cfg.problem, m, seed)
        t_opts = ErmOptions(tol=cfg.erm_tol, n_starts=cfg.n_starts,
                            max_iter=cfg.max_iter,
                            seed=derived_seed(cfg.master_seed, 1, m, t))
        try:
            res = erm_solve(pclass, family, ts, t_opts)
        except ConvergenceError:
            return TrialRecord(m, t, math.nan, math.nan, math.nan, loss_star,
                               math.inf, seed, failed=True)
        per_hat = _batch_losses(family, res.theta, x_eval, y_eval)
        return TrialRecord(
            m=m, trial=t,
            sample_error=float((per_hat - per_star).mean()),
            emp_risk_hat=res.objective,
            exp_loss_hat=float(per_hat.mean()),
            exp_loss_star=loss_star,
            erm_residual=res.residual,
            seed=seed,
            failed=not res.converged)

    tasks = [(i_m, m, t) for i_m, m in enumerate(cfg.m_grid)
             for t in range(cfg.trials_per_m)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda a: run_trial(*a), tasks))
    else:
        records = [run_trial(*a) for a in tasks]

    n_failed = sum(r.failed for r in records)
    if n_failed > max_failure_fraction * len(records):
        raise ConvergenceError(
            f"experiment invalid: {n_failed}/{len(records)} trials failed "
            f"(cap {max_failure_fraction:.0%})")

    per_m = []
    means, ses, ms = [], [], []
    for i_m, m in enumerate(cfg.m_grid):
        vals = np.array([r.sample_error for r in records
                         if r.m == m and not r.failed])
        mean, se = _trimmed_mean(vals)
        per_m.append({"m": m, "mean": mean, "stderr": se, "n": int(vals.size),
                      "untrimmed_mean": float(vals.mean())})
        means.append(mean)
        ses.append(se)
        ms.append(m)

    q_route = 2 if isinstance(cfg.problem.prior, BoundedSpec) and \
        np.all(cfg.problem.noise.covariance_eigenvalues == 0) else 1
    alpha = getattr(family, "alpha", 1.0)
    if pclass.kind == "euclidean_ball":
        predicted = bounds_mod.predicted_exponent(
            "euclidean_ball", alpha=alpha, q=q_route, s_or_d=pclass.dim,
            method="chaining").exponent
    else:
        predicted = bounds_mod.predicted_exponent(
            "entropy_decay", alpha=alpha, q=q_route,
            s_or_d=pclass.smoothness, method="chaining").exponent

    means = np.array(means)
    ses = np.array(ses)
    ms = np.array(ms, dtype=float)
    usable = means > 0
    if pclass.radius == 0 or np.max(np.abs(means)) < 1e-14:
        slope, ci, verdict = None, None, "degenerate"
    elif usable.sum() < 4:
        slope, ci, verdict = None, None, "degenerate"
    else:
        slope, ci = _weighted_loglog_fit(ms[usable], means[usable], ses[usable])
        if abs(slope - predicted) <= SLOPE_BAND or \
                (ci[0] <= predicted <= ci[1]):
            verdict = "consistent"
        elif slope < predicted:
            verdict = "faster-than-predicted"
        else:
            verdict = "slower-than-predicted"

    fit = RateFit(per_m=per_m, slope=slope, slope_ci=ci,
                  predicted_exponent=predicted, verdict=verdict,
                  theta_star=theta_star, trials=records,
                  config_digest=cfg.digest)
    if out_dir is not None:
        fit.write(out_dir)
    return fit


def _weighted_loglog_fit(ms, means, ses):
    """Weighted least squares of log(mean) on log(m); returns slope, 95% CI."""
    x = np.log(ms)
    y = np.log(means)
    sigma = np.clip(ses / means, 1e-6, None)  # delta method on log scale
    w = 1.0 / sigma**2
    X = np.column_stack([x, np.ones_like(x)])
    WX = X * w[:, None]
    cov = np.linalg.inv(X.T @ WX)
    beta = cov @ (WX.T @ y)
    slope = float(beta[0])
    se_slope = float(np.sqrt(cov[0, 0]))
    return slope, (slope - 1.96 * se_slope, slope + 1.96 * se_slope)


def bound_domination_check(fit: RateFit, inputs: bounds_mod.BoundInputs,
                           cov: bounds_mod.CoveringModel, r: float = 0.0):
    """Calibrate the chaining bound at the smallest m, then require the
    empirical curve to sit below it at every larger m."""
    per_m = [p for p in fit.per_m if p["mean"] > 0]
    if len(per_m) < 2:
        raise ConfigurationError("need at least two usable grid points")
    m0 = per_m[0]["m"]

    def bound_at(m):
        scaled = bounds_mod.BoundInputs(
            K=inputs.K, M_ell=inputs.M_ell, q=inputs.q, alpha=inputs.alpha,
            m=m, D=inputs.D, C=inputs.C, C1=inputs.C1, C2=inputs.C2)
        return bounds_mod.chaining_bound(scaled, cov, r)

    calib = per_m[0]["mean"] / bound_at(m0)
    ratios = [(p["m"], p["mean"] / (calib * bound_at(p["m"])))
              for p in per_m[1:]]
    return all(r <= 1.0 + 1e-9 for _, r in ratios), ratios


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------

def run_verification_suite(cfg: ExperimentConfig, n_samples: int = 100_000,
                           n_probe_pairs: int = 8, n_probe_ys: int = 8) -> dict:
    """Empirical checklist behind the sample-error theory.

    Verifies: (a) the squared norms of x and y are q-Orlicz with finite
    estimated norms and admissible tails, (b) the family admits a
    stability/sublinearity certificate on probes, (c) loss averages
    contract at the expected 1/sqrt(m) envelope, and, for Elastic-Net,
    (d) the learned-penalty hypotheses.
    """
    report = {"checks": {}, "passed": True}

    def record(name, ok, **info):
        report["checks"][name] = {"passed": bool(ok), **info}
        if not ok:
            report["passed"] = False

    try:
        family = build_family(cfg)
    except ConfigurationError as exc:
        record("family_invariants", False, error=str(exc))
        return report
    record("family_invariants", True)

    dist = cfg.problem
    q = 2 if isinstance(dist.prior, BoundedSpec) and \
        np.all(dist.noise.covariance_eigenvalues == 0) else 1
    # bounded x with bounded (zero) noise -> sub-Gaussian squared norms;
    # Gaussian data -> sub-exponential squared norms
    report["q_route"] = q

    rng = substream(cfg.master_seed, 501)
    x, y = dist.sample(rng, n_samples)
    for name, v in (("x_sq_norm", np.sum(x**2, axis=1)),
                    ("y_sq_norm", np.sum(y**2, axis=1))):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = orlicz_norm(v, q, n_boot=0)
        tails = tail_check(v, est.norm_estimate * 1.05, q)
        record(f"orlicz_{name}", np.isfinite(est.norm_estimate)
               and est.norm_estimate > 0 and tails.passed,
               q=q, norm=est.norm_estimate)

    pclass = cfg.param_class
    rng_p = substream(cfg.master_seed, 502)
    pairs = []
    for _ in range(n_probe_pairs):
        a = pclass.sample(rng_p)
        b = pclass.sample(rng_p)
        if np.any(a != b):
            pairs.append((a, b))
    probe_ys = list(dist.sample(rng_p, n_probe_ys)[1])
    try:
        cert = certify_stability(family, pclass, probe_ys, pairs,
                                 tol=cfg.recon_tol)
        record("stability_certificate",
               np.isfinite([cert.L_R, cert.Lp_R, cert.M_R, cert.Mp_R]).all(),
               certificate=cert.to_dict())
    except Exception as exc:  # evaluation failures propagate into the report
        record("stability_certificate", False, error=str(exc))

    if getattr(family, "kind", "") == "elastic_net":
        theta0 = pclass.sample(substream(cfg.master_seed, 503))
        p = family.unpack(theta0)
        g_rep = check_g_hypotheses(p.B, p.h, family.alpha, probe_ys)
        ok = g_rep.nonnegative and np.isfinite(g_rep.M_g) and \
            (g_rep.convex_midpoint_ok is not False)
        record("penalty_hypotheses", ok, alpha=family.alpha,
               M_g=g_rep.M_g, holder_constant=g_rep.holder_constant,
               convexity_checked=g_rep.convexity_checked)

    theta0 = pclass.center
    center_mc = expected_loss_mc(dist, theta0, family, max(1000, cfg.n_mc // 10),
                                 derived_seed(cfg.master_seed, 504))

    def loss_sampler(rng_l, size):
        n = int(np.prod(size))
        xs, ys = dist.sample(rng_l, n)
        per = _batch_losses(family, theta0, xs, ys)
        return (per - center_mc.estimate).reshape(size)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = empirical_average_contraction(
            loss_sampler, q, m_grid=[16, 64, 256, 1024], trials=2000,
            seed=derived_seed(cfg.master_seed, 505))
    degenerate = bool(np.all(table.k_hat == 0))  # identically-zero loss process
    record("loss_average_contraction",
           degenerate or -0.65 <= table.slope <= -0.3,
           slope=table.slope, degenerate=degenerate)
    return report
