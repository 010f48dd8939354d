"""Non-negative moment problem on a discretised ``L^2([a, b])``.

Find a density ``x >= 0`` on ``[a, b]`` with total mass 1, mean ``mu`` and
variance ``var``.  Functions are sampled on a uniform grid and the ``L^2``
inner product is replaced by the trapezoid rule, so every projector is
exact in the discrete weighted space and approximates its continuous
counterpart to ``O(h^2)``.  Clamping is the exact nonnegativity projector
because the trapezoid weights are positive and the norm is separable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import algorithms
from .core import InnerProduct, SolveReport, StoppingPolicy, iterate
from .errors import ConfigError, NotValidAsReference, SingularSystemError
from .sets import Hyperplane, Orthant

__all__ = [
    "MOMENT_ALGORITHMS", "MomentProblem", "build_moment_problem",
    "reference_min_norm_density", "starting_point", "solve_moments",
    "density_of", "aamr_fixed_point_blocks", "verify_aamr_fixed_point",
]

MOMENT_ALGORITHMS = ("cyclic-projections", "cyclic-dr", "anchored-dr",
                     "product-dr", "product-aamr")


@dataclass(frozen=True)
class MomentProblem:
    a: float = 0.0
    b: float = 1.0
    mu: float = 0.5
    var: float = 0.05
    N: int = 201

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise ConfigError("need a finite interval with a < b")
        if not self.var > 0:
            raise ConfigError("variance must be > 0")
        if int(self.N) < 3:
            raise ConfigError("grid size N must be >= 3")
        object.__setattr__(self, "N", int(self.N))

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.N)

    @property
    def weights(self) -> np.ndarray:
        h = (self.b - self.a) / (self.N - 1)
        w = np.full(self.N, h)
        w[0] = w[-1] = 0.5 * h
        return w

    @property
    def ip(self) -> InnerProduct:
        return InnerProduct(self.weights)

    @property
    def targets(self) -> np.ndarray:
        """``(1, mu, var + mu^2)``: the prescribed moments of ``1, t, t^2``."""
        return np.array([1.0, self.mu, self.var + self.mu ** 2])

    def moment_residuals(self, x) -> np.ndarray:
        t, w = self.grid, self.weights
        return np.array([np.dot(w * t ** i, x) for i in range(3)]) - self.targets


def build_moment_problem(a=0.0, b=1.0, mu=0.5, var=0.05, N=201):
    """Return ``(problem, [G1, G2, G3, G4])`` over the weighted grid space."""
    prob = a if isinstance(a, MomentProblem) else MomentProblem(a, b, mu, var, N)
    ip = prob.ip
    t = prob.grid
    sets = [Hyperplane(t ** i, c, ip, name=f"G{i + 1}(<x,t^{i}>={c:g})")
            for i, c in enumerate(prob.targets)]
    orth = Orthant(prob.N, ip)
    orth.name = "G4(x>=0)"
    sets.append(orth)
    return prob, sets


def reference_min_norm_density(a=0.0, b=1.0, mu=0.5, var=0.05) -> np.ndarray:
    """Coefficients ``theta`` of the minimum-norm solution ``sum theta_i t^i``.

    Solves the exact 3x3 Gram system of ``1, t, t^2`` on ``[a, b]``.  The
    result solves the full problem only if it is nonnegative on ``[a, b]``;
    otherwise :class:`NotValidAsReference` is raised.
    """
    if not a < b:
        raise ConfigError("need a < b")
    k = np.arange(5)
    mom = (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    gram = np.array([[mom[i + j] for j in range(3)] for i in range(3)])
    rhs = np.array([1.0, mu, var + mu ** 2])
    if np.linalg.cond(gram) > 1e14:
        raise SingularSystemError("Gram matrix of 1, t, t^2 is singular")
    theta = np.linalg.solve(gram, rhs)
    cands = [a, b]
    if theta[2] != 0:
        v = -theta[1] / (2 * theta[2])
        if a < v < b:
            cands.append(v)
    low = min(np.polyval(theta[::-1], c) for c in cands)
    if low < -1e-12:
        raise NotValidAsReference(
            f"minimum-norm quadratic dips to {low:.3g} on [{a}, {b}]")
    return theta


def starting_point(prob: MomentProblem, tag="one") -> np.ndarray:
    """``"one"``: the constant 1.  ``"step"``: 1 on the first half, 1/4 after."""
    if not isinstance(tag, str):
        x = np.asarray(tag, dtype=np.float64)
        if x.shape != (prob.N,):
            raise ConfigError(f"x0 must have {prob.N} samples")
        return x.copy()
    t = prob.grid
    if tag == "one":
        return np.ones(prob.N)
    if tag == "step":
        mid = 0.5 * (prob.a + prob.b)
        return np.where(t <= mid, 1.0, 0.25)
    raise ConfigError(f"unknown starting point {tag!r}; expected 'one' or 'step'")


def make_operator(prob: MomentProblem, sets, algorithm: str,
                  alpha: float = 0.95, beta: float = 0.95):
    if algorithm == "cyclic-projections":
        op = algorithms.cyclic_projections(sets)
        return algorithms.FixedPointOperator(op.step, op.label, lambda x: x, op.ip), 1
    if algorithm == "cyclic-dr":
        return algorithms.cyclic_dr(sets), 1
    if algorithm == "anchored-dr":
        return algorithms.anchored_dr(sets[0], sets[1:]), 1
    if algorithm == "product-dr":
        return algorithms.product_dr(sets, prob.N), len(sets)
    if algorithm == "product-aamr":
        return algorithms.product_aamr(sets, alpha, beta, None, prob.N), len(sets)
    raise ConfigError(f"unknown algorithm {algorithm!r}; expected one of {MOMENT_ALGORITHMS}")


def solve_moments(prob: MomentProblem, algorithm: str = "cyclic-projections",
                  alpha: float = 0.95, beta: float = 0.95, x0="one",
                  policy: Optional[StoppingPolicy] = None) -> SolveReport:
    """Run one of :data:`MOMENT_ALGORITHMS`; the report's shadow is the density."""
    prob, sets = build_moment_problem(prob)
    op, r = make_operator(prob, sets, algorithm, alpha, beta)
    x = starting_point(prob, x0)
    if r > 1:
        x = algorithms.lift(x, r)
    return iterate(op, x, policy or StoppingPolicy())


def density_of(prob: MomentProblem, algorithm: str, iterate_vec, alpha=0.95,
               beta=0.95) -> np.ndarray:
    """Density estimate (shadow) of an arbitrary iterate of `algorithm`."""
    prob, sets = build_moment_problem(prob)
    op, _ = make_operator(prob, sets, algorithm, alpha, beta)
    return op.shadow(np.asarray(iterate_vec, dtype=np.float64))


def aamr_fixed_point_blocks(t) -> np.ndarray:
    """The four quadratics whose block mean is ``6 t (1 - t)`` on ``[0, 1]``."""
    t = np.asarray(t, dtype=np.float64)
    return np.concatenate([27 / 5 * t * (1 - t), 3 / 5 * t * (13 - 9 * t),
                           3 / 5 * t * (9 - 13 * t), 27 / 5 * t * (1 - t)])


def verify_aamr_fixed_point(prob: Optional[MomentProblem] = None,
                            alpha: float = 0.95, beta: float = 0.95) -> dict:
    """One product-AAMR step at the sampled quadruple.

    Returns the weighted step residual and the largest deviation of the
    block mean from ``6 t (1 - t)``.
    """
    prob = prob or MomentProblem(0.0, 1.0, 0.5, 0.05, 1001)
    if (prob.a, prob.b, prob.mu, prob.var) != (0.0, 1.0, 0.5, 0.05):
        raise ConfigError("the quadruple is specific to [0,1], mu=1/2, var=1/20")
    prob, sets = build_moment_problem(prob)
    op = algorithms.product_aamr(sets, alpha, beta, None, prob.N)
    xbar = aamr_fixed_point_blocks(prob.grid)
    t = prob.grid
    return {
        "N": prob.N,
        "residual": op.ip.norm(op.step(xbar) - xbar),
        "mean_error": float(np.max(np.abs(op.shadow(xbar) - 6 * t * (1 - t)))),
    }
