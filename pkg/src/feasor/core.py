"""Weighted vector arithmetic and the fixed-point iteration driver.

Vectors are plain one-dimensional ``float64`` numpy arrays.  An
:class:`InnerProduct` optionally carries strictly positive quadrature
weights, so that the same code serves the Euclidean space ``R^n`` and the
discretised ``L^2`` spaces used by the moment problem.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, NumericalError

__all__ = [
    "InnerProduct",
    "Status",
    "StoppingPolicy",
    "SolveReport",
    "as_vector",
    "inner",
    "norm",
    "iterate",
]

UNIT = None  # sentinel meaning "standard dot product"


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    """Return `x` as a finite 1-D float64 array, optionally checking its length."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {v.shape[0]}")
    return v


class InnerProduct:
    """Weighted inner product ``<x, y> = sum_j w_j x_j y_j``.

    Parameters
    ----------
    weights : array_like, optional
        Strictly positive weights.  ``None`` gives the standard dot product
        in any dimension.
    """

    __slots__ = ("weights",)

    def __init__(self, weights=None):
        if weights is None:
            self.weights = None
        else:
            w = as_vector(weights)
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ValueError("inner-product weights must be finite and > 0")
            w.setflags(write=False)
            self.weights = w

    @property
    def dim(self) -> Optional[int]:
        return None if self.weights is None else self.weights.shape[0]

    def _check(self, n: int) -> None:
        if self.weights is not None and self.weights.shape[0] != n:
            raise DimensionError(
                f"weights have length {self.weights.shape[0]}, vectors have {n}")

    def __call__(self, x: np.ndarray, y: np.ndarray) -> float:
        if x.shape != y.shape:
            raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
        self._check(x.shape[0])
        if self.weights is None:
            return float(np.dot(x, y))
        return float(np.dot(self.weights * x, y))

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(max(self(x, x), 0.0)))

    def tile(self, r: int) -> "InnerProduct":
        """Inner product of the ``r``-fold product space."""
        if self.weights is None:
            return self
        return InnerProduct(np.tile(self.weights, r))

    def __repr__(self) -> str:
        if self.weights is None:
            return "InnerProduct()"
        return f"InnerProduct(weights of length {self.weights.shape[0]})"


EUCLIDEAN = InnerProduct()


def inner(x, y, ip: Optional[InnerProduct] = None) -> float:
    """Inner product of two vectors (standard dot product by default)."""
    x = as_vector(x)
    y = as_vector(y)
    return (ip or EUCLIDEAN)(x, y)


def norm(x, ip: Optional[InnerProduct] = None) -> float:
    return (ip or EUCLIDEAN).norm(as_vector(x))


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    TIME_LIMIT = "TimeLimit"
    DIVERGING = "Diverging"
    SOLUTION_FOUND = "SolutionFound"

    def __str__(self) -> str:
        return self.value


@dataclass
class StoppingPolicy:
    """When the driver halts.

    ``time_limit = 0`` disables the wall-clock limit.  ``divergence_radius``
    of ``None`` resolves to ``1e8 * max(1, ||x0||)`` at solve time.
    ``trace_stride = k > 0`` stores every k-th iterate; 0 stores none.
    """

    step_tol: float = 1e-10
    max_iters: int = 10**6
    time_limit: float = 0.0
    divergence_radius: Optional[float] = None
    check_stride: int = 1
    trace_stride: int = 0

    def __post_init__(self):
        if not self.step_tol > 0:
            raise ValueError("step_tol must be > 0")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be a positive integer")
        if self.time_limit < 0:
            raise ValueError("time_limit must be >= 0")
        if self.divergence_radius is not None and not self.divergence_radius > 0:
            raise ValueError("divergence_radius must be > 0")
        if int(self.check_stride) < 1:
            raise ValueError("check_stride must be >= 1")
        if int(self.trace_stride) < 0:
            raise ValueError("trace_stride must be >= 0")


@dataclass
class SolveReport:
    status: Status
    final_iterate: np.ndarray
    iterations: int
    residuals: np.ndarray
    shadow: Optional[np.ndarray] = None
    displacement_estimate: Optional[np.ndarray] = None
    trace: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def last_residual(self) -> Optional[float]:
        return float(self.residuals[-1]) if len(self.residuals) else None


def _resolve_ip(T, ip):
    if ip is not None:
        return ip
    return getattr(T, "ip", None) or EUCLIDEAN


def iterate(T, x0, policy: Optional[StoppingPolicy] = None,
            shadow_map: Optional[Callable] = None,
            solution_test: Optional[Callable] = None,
            ip: Optional[InnerProduct] = None) -> SolveReport:
    """Run the Banach-Picard iteration ``x_{k+1} = T(x_k)``.

    Parameters
    ----------
    T : FixedPointOperator or callable
        The operator.  If it exposes ``step``/``shadow``/``ip`` attributes
        (as every operator from :mod:`feasor.algorithms` does) those are
        used; a bare callable is treated as the step map.
    x0 : array_like
        Finite starting point.
    policy : StoppingPolicy, optional
    shadow_map : callable, optional
        Overrides the operator's own shadow map.
    solution_test : callable, optional
        Predicate on the shadow point.  Evaluated every
        ``policy.check_stride`` iterations (and at ``x0``); a pass halts with
        status ``SolutionFound``.
    ip : InnerProduct, optional
        Norm used for residuals and the divergence test.

    Returns
    -------
    SolveReport
    """
    policy = policy or StoppingPolicy()
    step = getattr(T, "step", T)
    if shadow_map is None:
        shadow_map = getattr(T, "shadow", None)
    ip = _resolve_ip(T, ip)

    x = as_vector(x0).copy()
    if not np.all(np.isfinite(x)):
        raise NumericalError("starting point is not finite")
    radius = policy.divergence_radius
    if radius is None:
        radius = 1e8 * max(1.0, ip.norm(x))
    max_iters = int(policy.max_iters)
    check_stride = int(policy.check_stride)
    trace_stride = int(policy.trace_stride)
    time_limit = float(policy.time_limit)
    tol = float(policy.step_tol)

    residuals = np.empty(min(max_iters, 1 << 16), dtype=np.float64)
    trace = [(0, x.copy())] if trace_stride else []
    t0 = time.perf_counter()

    def shadow_of(v):
        return None if shadow_map is None else shadow_map(v)

    def finish(status, k, last_step, shadow=None):
        if shadow is None:
            shadow = shadow_of(x)
        return SolveReport(
            status=status, final_iterate=x, iterations=k,
            residuals=residuals[:k].copy(), shadow=shadow,
            displacement_estimate=last_step, trace=trace,
            seconds=time.perf_counter() - t0)

    if solution_test is not None:
        s = shadow_of(x)
        if solution_test(s if s is not None else x):
            return finish(Status.SOLUTION_FOUND, 0, None, s)

    k = 0
    last_step = None
    while True:
        x_new = as_vector(step(x))
        if x_new.shape != x.shape:
            raise DimensionError("operator changed the dimension of the iterate")
        if not np.all(np.isfinite(x_new)):
            raise NumericalError(f"non-finite iterate at iteration {k + 1}")
        last_step = x_new - x
        res = ip.norm(last_step)
        if k == residuals.shape[0]:
            residuals = np.resize(residuals, min(max_iters, 2 * k))
        residuals[k] = res
        k += 1
        x = x_new
        if trace_stride and k % trace_stride == 0:
            trace.append((k, x.copy()))

        if solution_test is not None and k % check_stride == 0:
            s = shadow_of(x)
            if solution_test(s if s is not None else x):
                return finish(Status.SOLUTION_FOUND, k, last_step, s)
        if res <= tol:
            return finish(Status.CONVERGED, k, last_step)
        if ip.norm(x) > radius:
            return finish(Status.DIVERGING, k, last_step)
        if k >= max_iters:
            return finish(Status.MAX_ITERATIONS, k, last_step)
        if time_limit and time.perf_counter() - t0 > time_limit:
            return finish(Status.TIME_LIMIT, k, last_step)
