"""Sampling from the joint data distribution and Orlicz-norm diagnostics.

The joint law couples a prior on the unknown x, a zero-mean noise law, and
a linear forward map: y = A x + eps.  All randomness flows through a
documented split function ``substream(seed, *indices)`` so that trials
parallelize deterministically.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .errors import ConfigurationError, DimensionMismatchError
from .operators import ForwardOperator, GaussianSpec


def substream(seed: int, *indices: int) -> np.random.Generator:
    """Deterministic, disjoint random stream keyed by (seed, indices).

    Streams with distinct index tuples are statistically independent; the
    same tuple always reproduces the same stream.
    """
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=tuple(int(i) for i in indices))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class BoundedSpec:
    """Uniform law on the centered Euclidean ball of the given radius."""

    dim: int
    radius: float
    mean_is_zero = True

    def __post_init__(self):
        if self.radius <= 0 or self.dim < 1:
            raise ConfigurationError("radius and dimension must be positive")

    @property
    def mean(self) -> np.ndarray:
        return np.zeros(self.dim)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        z = rng.standard_normal((size, self.dim))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        u = rng.random(size) ** (1.0 / self.dim)
        return self.radius * z * u[:, None]

    def to_dict(self) -> dict:
        return {"type": "uniform_ball", "dim": self.dim, "radius": self.radius}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundedSpec":
        return cls(dim=int(d["dim"]), radius=float(d["radius"]))


def prior_from_dict(d: dict):
    if d.get("type", "gaussian") == "gaussian":
        return GaussianSpec.from_dict(d)
    if d["type"] == "uniform_ball":
        return BoundedSpec.from_dict(d)
    raise ConfigurationError(f"unknown prior type {d.get('type')!r}")


@dataclass(frozen=True)
class ProblemDistribution:
    """Joint law of (x, y): x ~ prior, eps ~ noise, y = A x + eps."""

    prior: GaussianSpec | BoundedSpec
    noise: GaussianSpec
    forward: ForwardOperator
    delta: float | None = None  # stated noise budget: trace(cov_eps) <= delta^2

    def __post_init__(self):
        if self.prior.dim != self.forward.n_x:
            raise DimensionMismatchError("prior dimension != operator input dim")
        if self.noise.dim != self.forward.n_y:
            raise DimensionMismatchError("noise dimension != operator output dim")
        if np.any(self.noise.mean != 0):
            raise ConfigurationError("noise must be zero-mean")
        if self.delta is not None and self.noise.trace > self.delta**2 + 1e-12:
            raise ConfigurationError(
                f"noise trace {self.noise.trace:.4g} exceeds delta^2={self.delta**2:.4g}")

    def sample(self, rng: np.random.Generator, size: int):
        """Draw (x, eps) and return (x, y) with y = A x + eps."""
        x = self.prior.sample(rng, size)
        eps = self.noise.sample(rng, size)
        return x, self.forward.apply(x) + eps

    def to_dict(self) -> dict:
        d = {"prior": self.prior.to_dict(), "noise": self.noise.to_dict(),
             "forward": json.loads(self.forward.to_json())}
        if self.delta is not None:
            d["delta"] = self.delta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemDistribution":
        return cls(prior=prior_from_dict(d["prior"]),
                   noise=GaussianSpec.from_dict(d["noise"]),
                   forward=ForwardOperator.from_json(d["forward"]),
                   delta=d.get("delta"))


@dataclass(frozen=True)
class TrainingSet:
    """i.i.d. labeled pairs (x_j, y_j), reproducible from the seed."""

    x: np.ndarray  # (m, n_x)
    y: np.ndarray  # (m, n_y)
    seed: int

    @property
    def m(self) -> int:
        return self.x.shape[0]

    def to_csv(self, path) -> None:
        m, n_x = self.x.shape
        n_y = self.y.shape[1]
        header = "j," + ",".join(f"x_{i}" for i in range(n_x)) + "," + \
                 ",".join(f"y_{i}" for i in range(n_y))
        data = np.column_stack([np.arange(m), self.x, self.y])
        fmt = ["%d"] + ["%.17g"] * (n_x + n_y)
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt=fmt)


def draw_training_set(dist: ProblemDistribution, m: int, seed: int) -> TrainingSet:
    """m i.i.d. pairs from the joint law, bitwise-deterministic given seed.

    The prior and noise draws come from a single substream keyed by the
    seed, consumed in a fixed vectorized order (all x first, then all eps),
    which keeps the pairs i.i.d. and the whole set reproducible.
    """
    if m < 1:
        raise ConfigurationError("training set size must be >= 1")
    rng = substream(seed, 0)
    x, y = dist.sample(rng, m)
    return TrainingSet(x=x, y=y, seed=int(seed))


# ---------------------------------------------------------------------------
# Orlicz-norm estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrliczEstimate:
    q: int
    norm_estimate: float
    mc_samples: int
    confidence_halfwidth: float


def orlicz_norm(samples, q: int, rel_tol: float = 1e-4,
                n_boot: int = 32, boot_seed: int = 0) -> OrliczEstimate:
    """Variational psi_q norm estimate: inf{t>0 : mean exp(|W|^q/t^q) <= 2}.

    Bisection on t against the sample exponential moment (computed in log
    space), bracket [1e-8, 1e3 * max|W|], relative tolerance ``rel_tol``.
    The half-width comes from a nonparametric bootstrap.
    """
    w = np.asarray(samples, dtype=float).ravel()
    if q not in (1, 2):
        raise ConfigurationError("q must be 1 or 2")
    if w.size == 0:
        raise ConfigurationError("empty sample")
    if not np.all(np.isfinite(w)):
        raise ConfigurationError("non-finite samples rejected")
    if w.size < 10_000:
        warnings.warn("orlicz_norm: fewer than 1e4 samples; estimate may be noisy",
                      stacklevel=2)
    wq = np.abs(w) ** q
    if np.all(wq == 0):
        return OrliczEstimate(q=q, norm_estimate=0.0, mc_samples=w.size,
                              confidence_halfwidth=0.0)

    def point_estimate(wq_arr):
        n = wq_arr.size
        log2n = np.log(2.0) + np.log(n)

        def feasible(t):
            return logsumexp(wq_arr / t**q) - log2n <= 0

        lo, hi = 1e-8, 1e3 * float(np.max(np.abs(w)))
        if feasible(lo):
            return lo
        if not feasible(hi):
            return hi
        while hi / lo > 1 + rel_tol:
            mid = np.sqrt(lo * hi)
            if feasible(mid):
                hi = mid
            else:
                lo = mid
        return hi

    est = point_estimate(wq)
    half = 0.0
    if n_boot > 0:
        rng = substream(boot_seed, 77)
        boots = np.empty(n_boot)
        for b in range(n_boot):
            idx = rng.integers(0, w.size, w.size)
            boots[b] = point_estimate(wq[idx])
        half = 1.96 * float(np.std(boots, ddof=1))
    return OrliczEstimate(q=q, norm_estimate=float(est), mc_samples=w.size,
                          confidence_halfwidth=half)


@dataclass(frozen=True)
class TailCheckReport:
    passed: bool
    t_grid: np.ndarray
    survival: np.ndarray
    bound: np.ndarray
    point_pass: np.ndarray


def tail_check(samples, K: float, q: int, n_grid: int = 12,
               confidence: float = 0.99) -> TailCheckReport:
    """Check the empirical survival function against 2 exp(-t^q/K^q).

    The grid of thresholds covers the 50th-99.9th percentiles of |W|.  At
    each point the observed exceedance count is allowed up to the
    ``confidence`` binomial quantile under the claimed tail probability
    (one-sided tolerance).
    """
    w = np.abs(np.asarray(samples, dtype=float).ravel())
    if w.size == 0:
        raise ConfigurationError("empty sample")
    if K <= 0:
        raise ConfigurationError("K must be positive")
    if q not in (1, 2):
        raise ConfigurationError("q must be 1 or 2")
    pct = np.linspace(50.0, 99.9, n_grid)
    t_grid = np.percentile(w, pct)
    n = w.size
    survival = np.array([(w > t).sum() for t in t_grid], dtype=float)
    p_bound = np.minimum(1.0, 2.0 * np.exp(-(t_grid / K) ** q))
    allowed = binom.ppf(confidence, n, p_bound)
    point_pass = survival <= allowed
    return TailCheckReport(passed=bool(point_pass.all()), t_grid=t_grid,
                           survival=survival / n, bound=p_bound,
                           point_pass=point_pass)


@dataclass(frozen=True)
class ContractionTable:
    """psi_q norm of m-sample empirical averages, per m, plus log-log slope."""

    q: int
    m_grid: np.ndarray
    k_hat: np.ndarray
    slope: float
    warnings: tuple = ()


def empirical_average_contraction(sampler, q: int, m_grid, trials: int,
                                  seed: int) -> ContractionTable:
    """Estimate how the psi_q norm of empirical averages shrinks with m.

    ``sampler(rng, size)`` must return i.i.d. draws of a zero-mean scalar
    variable.  For each m, ``trials`` independent m-averages are formed and
    their psi_q norm estimated; the fitted log-log slope of K_hat versus m
    is reported (the theoretical envelope is K/sqrt(m)).
    """
    m_grid = np.asarray(sorted(m_grid), dtype=int)
    if m_grid.size == 0:
        raise ConfigurationError("m_grid must be non-empty")
    notes = []
    k_hat = np.empty(m_grid.size)
    for i, m in enumerate(m_grid):
        rng = substream(seed, i)
        draws = sampler(rng, (trials, int(m)))
        mean_all = float(draws.mean())
        se = float(draws.std(ddof=1)) / np.sqrt(draws.size)
        if se > 0 and abs(mean_all) > 5 * se:
            notes.append(f"m={m}: sample mean {mean_all:.3g} exceeds 5 standard errors")
        averages = draws.mean(axis=1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            k_hat[i] = orlicz_norm(averages, q, n_boot=0).norm_estimate
    if np.all(k_hat == 0):
        slope = 0.0
    else:
        mask = k_hat > 0
        slope = float(np.polyfit(np.log(m_grid[mask]), np.log(k_hat[mask]), 1)[0])
    if notes:
        warnings.warn("; ".join(notes), stacklevel=2)
    return ContractionTable(q=q, m_grid=m_grid, k_hat=k_hat, slope=slope,
                            warnings=tuple(notes))
