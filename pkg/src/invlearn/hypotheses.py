"""Parametric reconstruction families with stability certificates.

Three families are implemented:

* generalized Tikhonov: closed-form minimizer of
  1/2 ||Ax-y||^2_{Se^{-1}} + ||B(x-h)||^2,
* Elastic-Net style: iterative minimizer of
  1/2 ||Ax-y||^2 + ||Bx-h||^{2 alpha} + eta ||x||^2,
* contractive fixed-point maps p = phi(p; y) with a certified contraction
  factor in the state variable.

Each family evaluates deterministically and exposes an empirical
stability/boundedness certificate computed on probe sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import (ConfigurationError, ContractivityError, ConvergenceError,
                     DimensionMismatchError)
from .operators import ForwardOperator, GaussianSpec

HOLDER_SMOOTHING = 1e-8  # mu in (||Bx-h||^2 + mu^2)^alpha for alpha < 1


# ---------------------------------------------------------------------------
# Compact parameter classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamClass:
    """Compact parameter set: a closed ball, finite- or Sobolev-type.

    ``euclidean_ball`` is {theta in R^d : ||theta|| <= radius} with the
    Euclidean metric.  ``sobolev_ball`` is the finite truncation
    {theta in R^n : sum_k (k^s theta_k)^2 <= 1}, measured in the ambient
    (unweighted) norm.
    """

    kind: str  # "euclidean_ball" | "sobolev_ball"
    dim: int
    radius: float = 1.0
    smoothness: float | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean_ball", "sobolev_ball"):
            raise ConfigurationError(f"unknown class kind {self.kind!r}")
        if self.dim < 1 or self.radius < 0:
            raise ConfigurationError("dimension must be positive, radius >= 0")
        if self.kind == "sobolev_ball" and (self.smoothness is None
                                            or self.smoothness <= 0):
            raise ConfigurationError("sobolev_ball requires smoothness > 0")

    @property
    def diameter(self) -> float:
        """Diameter in the class metric (kept >= 1 for the bound formulas)."""
        return max(1.0, 2.0 * self.radius)

    def _weights(self) -> np.ndarray:
        k = np.arange(1, self.dim + 1, dtype=float)
        return k ** self.smoothness

    def _constraint_norm(self, theta: np.ndarray) -> float:
        if self.kind == "euclidean_ball":
            return float(np.linalg.norm(theta))
        return float(np.linalg.norm(self._weights() * theta))

    def contains(self, theta, tol: float = 1e-9) -> bool:
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.dim:
            return False
        return self._constraint_norm(theta) <= self.radius * (1 + tol)

    def project(self, theta) -> np.ndarray:
        """Radial projection onto the ball; idempotent and non-expansive."""
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.dim:
            raise DimensionMismatchError("parameter length != class dimension")
        norm = self._constraint_norm(theta)
        if norm <= self.radius:
            return theta.copy()
        return theta * (self.radius / norm)

    @property
    def center(self) -> np.ndarray:
        return np.zeros(self.dim)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform-ish draw inside the class (for multi-start and probes)."""
        z = rng.standard_normal(self.dim)
        if self.kind == "sobolev_ball":
            z = z / self._weights()
        z = self.project(z * self.radius / max(np.linalg.norm(z), 1e-300))
        return z * rng.random() ** (1.0 / self.dim)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dim": self.dim, "radius": self.radius}
        if self.smoothness is not None:
            d["smoothness"] = self.smoothness
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ParamClass":
        return cls(kind=d["kind"], dim=int(d["dim"]),
                   radius=float(d.get("radius", 1.0)),
                   smoothness=d.get("smoothness"))


# ---------------------------------------------------------------------------
# Parameter containers and single-shot reconstruction operations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TikhonovParams:
    h: np.ndarray
    B: np.ndarray  # (n_x, n_x)


@dataclass(frozen=True)
class ElasticNetParams:
    h: np.ndarray
    B: np.ndarray
    alpha: float
    eta: float

    def __post_init__(self):
        if not (0 < self.alpha <= 1):
            raise ConfigurationError("alpha must lie in (0, 1]")
        if self.eta <= 0:
            raise ConfigurationError("eta must be positive")


@dataclass(frozen=True)
class FixedPointParams:
    W: np.ndarray  # (n_x, n_x), spectrally clipped to the budget on use
    b: np.ndarray
    contraction_budget: float

    def __post_init__(self):
        if not (0 < self.contraction_budget < 1):
            raise ConfigurationError("contraction budget must lie in (0, 1)")


def _spectral_clip(W: np.ndarray, limit: float) -> np.ndarray:
    """Project onto {||W||_2 <= limit}; non-expansive in Frobenius norm."""
    norm = np.linalg.norm(W, 2)
    if norm <= limit:
        return W
    U, s, Vt = np.linalg.svd(W)
    return (U * np.minimum(s, limit)) @ Vt


def reconstruct_tikhonov(params: TikhonovParams, A: ForwardOperator,
                         noise: GaussianSpec, y: np.ndarray) -> np.ndarray:
    """Unique minimizer (A* Se^{-1} A + 2 B*B)^{-1}(A* Se^{-1} y + 2 B*B h)."""
    sol = _tikhonov_solve(params.h, params.B, A, noise,
                          np.atleast_2d(np.asarray(y, float)))[0]
    return sol[0] if np.asarray(y).ndim == 1 else sol


def _tikhonov_solve(h, B, A: ForwardOperator, noise: GaussianSpec, Y: np.ndarray):
    """Batched Tikhonov solve; returns (X, factor pieces for reuse)."""
    if Y.shape[-1] != A.n_y:
        raise DimensionMismatchError("data length != operator output dim")
    Am = A.as_matrix()
    Se_inv = np.linalg.inv(noise.covariance_matrix())
    BtB = B.T @ B
    M = Am.T @ Se_inv @ Am + 2.0 * BtB
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e13:
        raise ConfigurationError(
            f"singular normal matrix (cond={cond:.3g}); "
            "B*B kernel overlaps ker A")
    rhs = Y @ (Am.T @ Se_inv).T + 2.0 * (BtB @ h)
    X = np.linalg.solve(M, rhs.T).T
    resid = np.max(np.abs(X @ M.T - rhs)) if X.size else 0.0
    scale = max(1.0, np.max(np.abs(rhs))) if rhs.size else 1.0
    if resid > 1e-8 * scale:
        raise ConvergenceError("normal equation residual too large",
                               residual=resid)
    return X, (M, rhs)


def reconstruct_elastic_net(params: ElasticNetParams, A: ForwardOperator,
                            y: np.ndarray, tol: float = 1e-8,
                            max_iter: int = 20_000) -> np.ndarray:
    """First-order minimizer of the strongly convex Elastic-Net objective.

    Accelerated gradient descent with backtracking, run until the gradient
    norm (of the smoothed objective for alpha < 1) drops below ``tol``.
    """
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != A.n_y:
        raise DimensionMismatchError("data length != operator output dim")
    Am = A.as_matrix()
    B, h = params.B, params.h
    alpha, eta = params.alpha, params.eta
    mu2 = HOLDER_SMOOTHING**2

    def grad(x):
        res = Am @ x - y
        v = B @ x - h
        s2 = float(v @ v) + mu2
        g_pen = 2.0 * alpha * s2 ** (alpha - 1.0) * (B.T @ v)
        return Am.T @ res + g_pen + 2.0 * eta * x

    def objective(x):
        res = Am @ x - y
        v = B @ x - h
        s2 = float(v @ v) + mu2
        return (0.5 * float(res @ res) + s2**alpha - mu2**alpha
                + eta * float(x @ x))

    x = np.zeros(A.n_x)
    z = x.copy()
    t_mom = 1.0
    step = 1.0 / (np.linalg.norm(Am, 2) ** 2 + 2 * np.linalg.norm(B, 2) ** 2
                  + 2 * eta + 1e-12)
    f_x = objective(x)
    for _ in range(max_iter):
        g = grad(z)
        gnorm = np.linalg.norm(grad(x))
        if gnorm <= tol:
            return x
        # backtracking from the momentum point; the relative slack keeps the
        # accept test meaningful once decreases fall below float resolution
        f_z = objective(z)
        slack = 1e-12 * (abs(f_z) + 1.0)
        while True:
            x_new = z - step * g
            f_new = objective(x_new)
            if f_new <= f_z - 0.5 * step * float(g @ g) + slack or step < 1e-16:
                break
            step *= 0.5
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t_mom**2))
        if f_new > f_x + slack:  # restart acceleration when it overshoots
            z = x
            t_mom = 1.0
            continue
        z = x_new + ((t_mom - 1) / t_new) * (x_new - x)
        x, f_x, t_mom = x_new, f_new, t_new
    gnorm = float(np.linalg.norm(grad(x)))
    if gnorm > tol:
        raise ConvergenceError("elastic-net solver did not reach tolerance",
                               residual=gnorm, iterations=max_iter)
    return x


def reconstruct_fixed_point(params: FixedPointParams, A: ForwardOperator,
                            y: np.ndarray, tol: float = 1e-10,
                            max_iter: int = 100_000) -> np.ndarray:
    """Picard iteration for p = tanh(W_eff p + b) + A* y from p0 = 0.

    ``W_eff`` is W spectrally clipped to the contraction budget, so the map
    is a certified contraction; the returned point has a posteriori
    fixed-point gap at most ``tol``.
    """
    y = np.asarray(y, dtype=float)
    L_z = params.contraction_budget
    W_eff = _spectral_clip(params.W, L_z)
    base = A.adjoint_apply(y)

    def phi(z):
        return np.tanh(W_eff @ z + params.b) + base

    p = np.zeros(A.n_x)
    prev_step = None
    for _ in range(max_iter):
        p_next = phi(p)
        step = float(np.linalg.norm(p_next - p))
        if prev_step is not None and prev_step > 1e-14:
            ratio = step / prev_step
            if ratio > L_z + 1e-6:
                raise ContractivityError(
                    f"observed contraction ratio {ratio:.6f} exceeds "
                    f"certified budget {L_z}")
        if step <= tol * (1 - L_z):
            return p_next
        prev_step = step
        p = p_next
    raise ConvergenceError("fixed-point iteration did not converge",
                           residual=prev_step, iterations=max_iter)


# ---------------------------------------------------------------------------
# Family objects: flat-parameter interface used by ERM and experiments
# ---------------------------------------------------------------------------

class TikhonovFamily:
    """Flat-parameter wrapper around the generalized Tikhonov reconstructor.

    ``structure`` controls the parametrization:

    * "scale": theta = [b], B = b I, h = 0 (the 1-parameter family),
    * "full":  theta = concat(h, vec(B)) with dense B,
    * "diagonal": theta = concat(h, diag(B)).
    """

    kind = "tikhonov"
    alpha = 1.0  # the reconstruction map is Lipschitz in theta on the class

    def __init__(self, op: ForwardOperator, noise: GaussianSpec,
                 structure: str = "full"):
        if structure not in ("scale", "full", "diagonal"):
            raise ConfigurationError(f"unknown structure {structure!r}")
        self.op = op
        self.noise = noise
        self.structure = structure
        n = op.n_x
        self.dim = {"scale": 1, "full": n + n * n, "diagonal": 2 * n}[structure]

    def unpack(self, theta) -> TikhonovParams:
        theta = np.asarray(theta, dtype=float)
        n = self.op.n_x
        if theta.size != self.dim:
            raise DimensionMismatchError("theta length mismatch")
        if self.structure == "scale":
            return TikhonovParams(h=np.zeros(n), B=theta[0] * np.eye(n))
        if self.structure == "diagonal":
            return TikhonovParams(h=theta[:n], B=np.diag(theta[n:]))
        return TikhonovParams(h=theta[:n], B=theta[n:].reshape(n, n))

    def metric(self, theta1, theta2) -> float:
        """d((h,B),(h',B')) = ||h-h'|| + ||B-B'||_op."""
        p1, p2 = self.unpack(theta1), self.unpack(theta2)
        return float(np.linalg.norm(p1.h - p2.h)
                     + np.linalg.norm(p1.B - p2.B, 2))

    def reconstruct(self, theta, y, tol=None):
        return reconstruct_tikhonov(self.unpack(theta), self.op, self.noise, y)

    def reconstruct_batch(self, theta, Y, tol=None):
        p = self.unpack(theta)
        return _tikhonov_solve(p.h, p.B, self.op, self.noise,
                               np.asarray(Y, float))[0]

    def risk_gradient(self, theta, X, Y):
        """Analytic gradient of the empirical quadratic risk at theta.

        Differentiates R = M^{-1} rhs through the normal equations; the
        adjoint solve shares the factorization with the forward solve.
        """
        p = self.unpack(theta)
        R, (M, _) = _tikhonov_solve(p.h, p.B, self.op, self.noise,
                                    np.asarray(Y, float))
        E = R - np.asarray(X, float)              # residuals, (m, n)
        U = np.linalg.solve(M, E.T).T             # adjoint states
        m = E.shape[0]
        BtB = p.B.T @ p.B
        grad_h = 2.0 * (BtB @ U.mean(axis=0))
        HmR = p.h[None, :] - R                    # (m, n)
        grad_B = 2.0 / m * ((p.B @ HmR.T) @ U + (p.B @ U.T) @ HmR)
        n = self.op.n_x
        if self.structure == "scale":
            # B = b I: chain rule collapses grad_B onto its trace
            return np.array([np.trace(grad_B)])
        if self.structure == "diagonal":
            return np.concatenate([grad_h, np.diag(grad_B)])
        return np.concatenate([grad_h, grad_B.ravel()])


class ElasticNetFamily:
    """Flat-parameter wrapper: theta = concat(h, vec(B)), fixed alpha, eta."""

    kind = "elastic_net"

    def __init__(self, op: ForwardOperator, alpha: float = 1.0,
                 eta: float = 0.5, structure: str = "full"):
        if structure not in ("full", "diagonal", "scale"):
            raise ConfigurationError(f"unknown structure {structure!r}")
        self.op = op
        self.alpha = float(alpha)
        self.eta = float(eta)
        self.structure = structure
        n = op.n_x
        self.dim = {"scale": 1, "full": n + n * n, "diagonal": 2 * n}[structure]

    def unpack(self, theta) -> ElasticNetParams:
        theta = np.asarray(theta, dtype=float)
        n = self.op.n_x
        if self.structure == "scale":
            h, B = np.zeros(n), theta[0] * np.eye(n)
        elif self.structure == "diagonal":
            h, B = theta[:n], np.diag(theta[n:])
        else:
            h, B = theta[:n], theta[n:].reshape(n, n)
        return ElasticNetParams(h=h, B=B, alpha=self.alpha, eta=self.eta)

    def metric(self, theta1, theta2) -> float:
        p1, p2 = self.unpack(theta1), self.unpack(theta2)
        return float(np.linalg.norm(p1.h - p2.h)
                     + np.linalg.norm(p1.B - p2.B, 2))

    def reconstruct(self, theta, y, tol=1e-8):
        return reconstruct_elastic_net(self.unpack(theta), self.op, y, tol=tol)

    def reconstruct_batch(self, theta, Y, tol=1e-8):
        Y = np.asarray(Y, dtype=float)
        p = self.unpack(theta)
        if self.alpha == 1.0:
            # smooth quadratic case: solve the linear optimality system once
            Am = self.op.as_matrix()
            M = Am.T @ Am + 2.0 * p.B.T @ p.B + 2.0 * self.eta * np.eye(self.op.n_x)
            rhs = Y @ Am + 2.0 * (p.B.T @ p.h)
            return np.linalg.solve(M, rhs.T).T
        return np.stack([reconstruct_elastic_net(p, self.op, y, tol=tol)
                         for y in Y])


class FixedPointFamily:
    """theta = concat(vec(W), b) for p = tanh(clip(W) p + b) + A* y."""

    kind = "fixed_point"
    alpha = 1.0

    def __init__(self, op: ForwardOperator, contraction_budget: float = 0.5):
        if not (0 < contraction_budget < 1):
            raise ConfigurationError("contraction budget must lie in (0, 1)")
        self.op = op
        self.L_z = float(contraction_budget)
        n = op.n_x
        self.dim = n * n + n

    def unpack(self, theta) -> FixedPointParams:
        theta = np.asarray(theta, dtype=float)
        n = self.op.n_x
        if theta.size != self.dim:
            raise DimensionMismatchError("theta length mismatch")
        return FixedPointParams(W=theta[:n * n].reshape(n, n), b=theta[n * n:],
                                contraction_budget=self.L_z)

    def metric(self, theta1, theta2) -> float:
        return float(np.linalg.norm(np.asarray(theta1, float)
                                    - np.asarray(theta2, float)))

    def reconstruct(self, theta, y, tol=1e-10):
        return reconstruct_fixed_point(self.unpack(theta), self.op, y, tol=tol)

    def reconstruct_batch(self, theta, Y, tol=1e-10):
        Y = np.asarray(Y, dtype=float)
        p = self.unpack(theta)
        W_eff = _spectral_clip(p.W, self.L_z)
        base = self.op.adjoint_apply(Y)
        P = np.zeros_like(base)
        for _ in range(100_000):
            P_next = np.tanh(P @ W_eff.T + p.b) + base
            gap = np.max(np.linalg.norm(P_next - P, axis=1))
            if gap <= tol * (1 - self.L_z):
                return P_next
            P = P_next
        raise ConvergenceError("batched fixed-point iteration did not converge",
                               residual=gap)

    def lipschitz_theta_bound(self, probe_ys) -> float:
        """Analytic Lipschitz-in-theta constant over the probe data.

        Iterates satisfy ||z|| <= Z := sqrt(n) + ||A* y||, the spectral clip
        is Frobenius-non-expansive, and tanh is 1-Lipschitz, so
        ||phi_theta(z;y) - phi_theta'(z;y)|| <= ||dW||_F ||z|| + ||db||
        <= sqrt(Z^2 + 1) ||theta - theta'|| by Cauchy-Schwarz on the
        concatenated (W, b) parameter.
        """
        n = self.op.n_x
        r = max(float(np.linalg.norm(self.op.adjoint_apply(np.asarray(y, float))))
                for y in probe_ys)
        z_max = np.sqrt(n) + r
        return float(np.sqrt(z_max**2 + 1.0))


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityCertificate:
    """Empirical constants for Holder-in-theta stability and sublinearity.

    ||R_theta(y) - R_theta'(y)|| <= (L_R ||y|| + Lp_R) d(theta,theta')^alpha
    and ||R_theta(y)|| <= M_R ||y|| + Mp_R on all probes.
    """

    family: str
    alpha: float
    L_R: float
    Lp_R: float
    M_R: float
    Mp_R: float
    r0: float
    n_probes: int
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"family": self.family, "alpha": self.alpha, "L_R": self.L_R,
                "L'_R": self.Lp_R, "M_R": self.M_R, "M'_R": self.Mp_R,
                "r0": self.r0, "probes": self.n_probes, **self.extras}


def _fit_affine_envelope(y_norms, values):
    """Smallest (a, b), a||y||+b >= v on all probes, minimizing a + b."""
    y_norms = np.asarray(y_norms, dtype=float)
    values = np.asarray(values, dtype=float)
    res = linprog(c=[1.0, 1.0],
                  A_ub=np.column_stack([-y_norms, -np.ones_like(y_norms)]),
                  b_ub=-values, bounds=[(0, None), (0, None)], method="highs")
    if not res.success:
        raise ConvergenceError("affine envelope fit failed")
    return float(res.x[0]), float(res.x[1])


def certify_stability(family, pclass: ParamClass, probe_ys,
                      probe_pairs, tol: float = 1e-10) -> StabilityCertificate:
    """Empirical stability/sublinearity certificate on probe sets.

    ``probe_pairs`` is a list of (theta, theta') with positive distance in
    the family metric; ``probe_ys`` a list of data vectors.  The affine
    envelopes are fitted by a small linear program.
    """
    if not probe_ys or not probe_pairs:
        raise ConfigurationError("probe sets must be non-empty")
    alpha = getattr(family, "alpha", 1.0)
    y_norms, ratios = [], []
    bound_y_norms, norms = [], []
    for theta, theta2 in probe_pairs:
        d = family.metric(theta, theta2)
        if d <= 0:
            continue
        for y in probe_ys:
            r1 = family.reconstruct(theta, y, tol=tol)
            r2 = family.reconstruct(theta2, y, tol=tol)
            y_norms.append(np.linalg.norm(y))
            ratios.append(np.linalg.norm(r1 - r2) / d**alpha)
            bound_y_norms.append(np.linalg.norm(y))
            norms.append(np.linalg.norm(r1))
    L_R, Lp_R = _fit_affine_envelope(y_norms, ratios)
    M_R, Mp_R = _fit_affine_envelope(bound_y_norms, norms)
    extras = {}
    if getattr(family, "kind", "") == "elastic_net":
        # energy bound from evaluating the objective at the minimizer and 0
        eta = family.eta
        worst = 0.0
        for theta, _ in probe_pairs:
            p = family.unpack(theta)
            m_g = float(np.linalg.norm(p.h) ** (2 * family.alpha))
            for y in probe_ys:
                x = family.reconstruct(theta, y, tol=tol)
                slack = (np.linalg.norm(y)**2 / (2 * eta) + m_g
                         - np.linalg.norm(x)**2)
                worst = min(worst, slack) if worst else slack
        extras["energy_bound_slack"] = worst
    return StabilityCertificate(
        family=getattr(family, "kind", type(family).__name__), alpha=alpha,
        L_R=L_R, Lp_R=Lp_R, M_R=M_R, Mp_R=Mp_R,
        r0=pclass.diameter, n_probes=len(probe_ys) * len(probe_pairs),
        extras=extras)


@dataclass(frozen=True)
class GHypothesesReport:
    """Empirical check of the learned-penalty conditions for g = ||B.-h||^{2a}."""

    alpha: float
    nonnegative: bool
    value_at_zero: float
    M_g: float
    holder_constant: float | None
    convex_midpoint_ok: bool | None
    convexity_checked: bool


def check_g_hypotheses(B, h, alpha: float, probe_ys,
                       probe_pairs=None, seed: int = 0) -> GHypothesesReport:
    """Verify sign, boundedness at 0, Holder-in-theta, and convexity probes.

    Convexity (midpoint inequality) is only asserted for alpha = 1; for
    alpha < 1 the penalty need not be convex and the report marks the check
    as skipped.
    """
    if not len(probe_ys):
        raise ConfigurationError("probe set must be non-empty")
    B = np.asarray(B, dtype=float)
    h = np.asarray(h, dtype=float)

    def g(Bm, hv, y):
        return float(np.linalg.norm(Bm @ y - hv) ** (2 * alpha))

    vals = [g(B, h, np.asarray(y, float)) for y in probe_ys]
    nonneg = all(v >= 0 for v in vals)
    g0 = g(B, h, np.zeros(h.size))

    if probe_pairs is None:
        rng = np.random.default_rng(seed)
        probe_pairs = []
        for _ in range(16):
            dB = rng.standard_normal(B.shape) * 0.1
            dh = rng.standard_normal(h.shape) * 0.1
            probe_pairs.append(((h + dh, B + dB)))
    c_g = 0.0
    for h2, B2 in probe_pairs:
        d = np.linalg.norm(h - h2) + np.linalg.norm(B - np.asarray(B2), 2)
        if d <= 0:
            continue
        for y in probe_ys:
            y = np.asarray(y, float)
            ny = np.linalg.norm(y)
            if ny <= 0:
                continue
            diff = abs(g(B, h, y) - g(np.asarray(B2, float),
                                      np.asarray(h2, float), y))
            c_g = max(c_g, diff / (ny**2 * d ** (2 * alpha)))

    convex_ok = None
    if alpha == 1.0:
        convex_ok = True
        for i in range(len(probe_ys)):
            for j in range(i + 1, len(probe_ys)):
                a = np.asarray(probe_ys[i], float)
                b = np.asarray(probe_ys[j], float)
                mid = g(B, h, 0.5 * (a + b))
                if mid > 0.5 * (g(B, h, a) + g(B, h, b)) + 1e-10:
                    convex_ok = False
    return GHypothesesReport(alpha=alpha, nonnegative=nonneg,
                             value_at_zero=g0, M_g=g0,
                             holder_constant=c_g,
                             convex_midpoint_ok=convex_ok,
                             convexity_checked=alpha == 1.0)
