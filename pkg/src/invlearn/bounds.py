"""Covering-number models, sample-error bound curves, and rate exponents.

Absolute constants in the bounds default to 1 and are user inputs; the
curves are therefore only compared to experiments in shape (log-log slope
or one-point-calibrated domination), never in level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConfigurationError


# ---------------------------------------------------------------------------
# Covering numbers
# ---------------------------------------------------------------------------

def covering_ball(d: int, D: float, r: float) -> float:
    """Upper bound (2 D sqrt(d) / r)^d on the covering number of a radius-D
    Euclidean ball in R^d; a single ball suffices once r exceeds D."""
    if r <= 0:
        raise ConfigurationError("radius r must be positive")
    if d < 1 or D <= 0:
        raise ConfigurationError("d >= 1 and D > 0 required")
    if r > D:
        return 1.0
    return max(1.0, (2.0 * D * math.sqrt(d) / r) ** d)


def covering_sobolev_log(s: float, r: float, c: float) -> float:
    """Entropy model log N(r) = c * r^{-1/s} for a compactly embedded ball."""
    if r <= 0:
        raise ConfigurationError("radius r must be positive")
    if s <= 0 or c <= 0:
        raise ConfigurationError("s > 0 and c > 0 required")
    return c * r ** (-1.0 / s)


def greedy_cover(points, r: float) -> int:
    """Cardinality of a greedy cover of a finite point set by radius-r balls.

    Each step picks the point whose ball covers the most still-uncovered
    points (ties broken by lowest index).  Upper-bounds the covering number
    of the set; used as a cross-check oracle in low dimension.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if n == 0:
        raise ConfigurationError("point set must be non-empty")
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    # covers[i, j]: ball at point i covers point j (tolerance absorbs
    # floating-point noise for points exactly on the ball boundary)
    covers = d2 <= (r * r) * (1 + 1e-9)
    uncovered = np.ones(n, dtype=bool)
    count = 0
    while uncovered.any():
        gains = covers[:, uncovered].sum(axis=1)
        center = int(np.argmax(gains))
        uncovered &= ~covers[center]
        count += 1
    return count


@dataclass(frozen=True)
class CoveringModel:
    """r -> log N(Theta, r) upper bound for one of the two compact classes."""

    kind: str  # "euclidean_ball" | "entropy_decay"
    d: int | None = None
    D: float = 1.0
    s: float | None = None
    c: float = 1.0

    def __post_init__(self):
        if self.kind == "euclidean_ball":
            if self.d is None or self.d < 1:
                raise ConfigurationError("euclidean_ball needs d >= 1")
        elif self.kind == "entropy_decay":
            if self.s is None or self.s <= 0:
                raise ConfigurationError("entropy_decay needs s > 0")
        else:
            raise ConfigurationError(f"unknown covering model {self.kind!r}")

    def log_n(self, r: float) -> float:
        if self.kind == "euclidean_ball":
            return math.log(covering_ball(self.d, self.D, r))
        return covering_sobolev_log(self.s, r, self.c)


# ---------------------------------------------------------------------------
# Bound evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundInputs:
    K: float          # Orlicz constant of the loss (or its increments)
    M_ell: float      # expectation bound on the stability envelope
    q: int
    alpha: float
    m: int
    D: float = 1.0
    C: float = 1.0    # absolute constants, unspecified in theory
    C1: float = 1.0
    C2: float = 1.0

    def __post_init__(self):
        if self.q not in (1, 2):
            raise ConfigurationError("q must be 1 or 2")
        if not (0 < self.alpha <= 1):
            raise ConfigurationError("alpha must lie in (0, 1]")
        if self.K < 0 or self.M_ell < 0 or self.m < 1 or self.D < 1:
            raise ConfigurationError("K, M_ell >= 0, m >= 1, D >= 1 required")


@dataclass(frozen=True)
class BoundCurve:
    value: float          # bound at the requested r
    r_grid: np.ndarray
    values: np.ndarray
    argmin_r: float
    min_value: float

    def to_dict(self) -> dict:
        return {"value": self.value, "r_grid": self.r_grid.tolist(),
                "values": self.values.tolist(), "argmin_r": self.argmin_r,
                "min_value": self.min_value}


def covering_bound(inputs: BoundInputs, cov: CoveringModel, r: float,
                   n_grid: int = 200) -> BoundCurve:
    """Two-term covering bound C K/sqrt(m) (log N(r))^{1/q} + 2 M_ell r^alpha.

    Also minimizes the bound over a log grid of ``n_grid`` points in
    [1e-6 D, D].
    """
    if r <= 0:
        raise ConfigurationError("r must be positive")

    def value_at(rr):
        entropy = cov.log_n(rr) ** (1.0 / inputs.q)
        return (inputs.C * inputs.K / math.sqrt(inputs.m) * entropy
                + 2.0 * inputs.M_ell * rr ** inputs.alpha)

    grid = np.geomspace(1e-6 * inputs.D, inputs.D, n_grid)
    values = np.array([value_at(rr) for rr in grid])
    k = int(np.argmin(values))
    return BoundCurve(value=value_at(r), r_grid=grid, values=values,
                      argmin_r=float(grid[k]), min_value=float(values[k]))


def entropy_integral(cov: CoveringModel, alpha: float, q: int,
                     lower: float, upper: float) -> float:
    """Numerically integrate (log N(Theta, c^{1/alpha}))^{1/q} dc.

    For the polynomial-entropy model the integrand has a c^{-1/(alpha s q)}
    singularity at 0; the substitution u = c^{1 - 1/(alpha s q)} removes it
    analytically before quadrature.
    """
    if upper <= lower:
        return 0.0
    inv_q = 1.0 / q
    if cov.kind == "entropy_decay":
        beta = 1.0 / (alpha * cov.s * q)
        if beta >= 1.0 and lower <= 0:
            raise ConfigurationError(
                "entropy integrand not improperly integrable: alpha*s*q <= 1")
        if abs(beta - 1.0) < 1e-12:
            # c^{-1} integrand, only reachable with lower > 0
            return cov.c**inv_q * math.log(upper / lower)
        # u = c^{1-beta}: the transformed integrand is constant
        one = 1.0 - beta
        val, _ = quad(lambda u: cov.c**inv_q / one, lower**one, upper**one,
                      epsrel=1e-12)
        return val
    integrand = lambda c: cov.log_n(c ** (1.0 / alpha)) ** inv_q
    val, err = quad(integrand, lower, upper, epsrel=1e-6, limit=400,
                    points=[lower] if lower > 0 else None)
    return val


def chaining_bound(inputs: BoundInputs, cov: CoveringModel, r: float) -> float:
    """Chaining bound
    C1 K/sqrt(m) * int_{r^alpha/4}^{D} (log N(c^{1/alpha}))^{1/q} dc
    + C2 K r^alpha.

    ``r = 0`` is admissible only when the entropy integrand is improperly
    integrable at 0 (for the polynomial model: alpha*s*q > 1).
    """
    if r < 0:
        raise ConfigurationError("r must be >= 0")
    lower = r ** inputs.alpha / 4.0 if r > 0 else 0.0
    if r == 0 and cov.kind == "entropy_decay":
        if inputs.alpha * cov.s * inputs.q <= 1.0:
            raise ConfigurationError(
                "r=0 not admissible: alpha*s*q <= 1, the entropy integral "
                "diverges; use r > 0 (covering-style regime)")
    integral = entropy_integral(cov, inputs.alpha, inputs.q, lower, inputs.D)
    return (inputs.C1 * inputs.K / math.sqrt(inputs.m) * integral
            + inputs.C2 * inputs.K * r ** inputs.alpha)


# ---------------------------------------------------------------------------
# Predicted convergence-rate exponents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatePrediction:
    method: str       # "covering" | "chaining"
    exponent: float   # power of m in the predicted sample-error decay
    regime: str
    note: str = ""


def predicted_exponent(class_kind: str, alpha: float, q: int, s_or_d,
                       method: str = "chaining") -> RatePrediction:
    """Predicted m-exponent of the sample-error decay for a compact class.

    Finite-dimensional balls: the covering route gives m^{-1/2} up to a
    log(m)^{1/q} factor, the chaining route a clean m^{-1/2}.  For the
    polynomial-entropy class the chaining exponent is -alpha^2 s q / 2
    below the saturation threshold s = 1/(alpha q) and -1/2 above it; the
    covering exponent is -(1 - 1/(1 + alpha s q))/2.
    """
    if method not in ("covering", "chaining"):
        raise ConfigurationError("method must be 'covering' or 'chaining'")
    if q not in (1, 2) or not (0 < alpha <= 1):
        raise ConfigurationError("need q in {1,2} and alpha in (0,1]")
    if class_kind == "euclidean_ball":
        d = int(s_or_d)
        if d < 1:
            raise ConfigurationError("dimension must be >= 1")
        if method == "covering":
            return RatePrediction(method, -0.5, "finite-dimensional",
                                  f"times log(m)^{{1/{q}}} d^{{1/{q}}}")
        return RatePrediction(method, -0.5, "finite-dimensional",
                              f"constant factor (d log d)^{{1/{q}}}")
    if class_kind == "entropy_decay":
        s = float(s_or_d)
        if s <= 0:
            raise ConfigurationError("s must be positive")
        if method == "covering":
            expo = -0.5 * (1.0 - 1.0 / (1.0 + alpha * s * q))
            note = ""
            if s < (1.0 - alpha) / (alpha**2 * q):
                note = "covering route faster than chaining in this regime"
            return RatePrediction(method, expo, "entropy-decay", note)
        if s > 1.0 / (alpha * q):
            return RatePrediction(method, -0.5, "saturated",
                                  "embedding compact enough for the optimal rate")
        return RatePrediction(method, -0.5 * alpha**2 * s * q,
                              "sub-saturation", "")
    raise ConfigurationError(f"unknown class kind {class_kind!r}")


# ---------------------------------------------------------------------------
# Concentration tails for finite classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HoeffdingResult:
    tail: float        # standard placement: 2 exp(-2 m rho^2 / K^2)
    alt_tail: float    # variant with m inside the denominator, for comparison


def hoeffding_tail(rho: float, m: int, K: float) -> HoeffdingResult:
    """Two-sided Hoeffding tail for an m-average of K-bounded variables.

    Implemented in the standard textbook placement 2 exp(-2 m rho^2 / K^2).
    The ``alt_tail`` field evaluates the variant with m dividing the
    exponent, which circulates in some displays; both are reported so
    downstream summaries can print the discrepancy rather than hide it.
    """
    if rho <= 0 or m < 1 or K <= 0:
        raise ConfigurationError("rho > 0, m >= 1, K > 0 required")
    return HoeffdingResult(
        tail=2.0 * math.exp(-2.0 * m * rho**2 / K**2),
        alt_tail=2.0 * math.exp(-2.0 * rho**2 / (m * K**2)))


def finite_class_sample_size(rho: float, n_class: int, eta: float,
                             c: float = 1.0) -> float:
    """PAC sample-size formula m >= c log(|Theta|/eta) / rho^2."""
    if rho <= 0 or n_class < 1 or not (0 < eta < 1):
        raise ConfigurationError("invalid PAC inputs")
    return c * math.log(n_class / eta) / rho**2
