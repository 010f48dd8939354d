"""Projection and reflection based fixed-point operators.

Every constructor returns a :class:`FixedPointOperator` that can be passed
straight to :func:`feasor.core.iterate`.  Compositions are applied in the
order the formulas read from right to left, i.e. the first set listed acts
first.  For nonconvex sets the sets' deterministic projector selections
turn the set-valued operators into ordinary maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import EUCLIDEAN, InnerProduct, SolveReport, as_vector
from .errors import (DegenerateTriangleError, DimensionError,
                     InvalidProblemError, MissingShadowError, ParamError)
from .sets import DiagonalSet, ProductSet, ProjectableSet

__all__ = [
    "FixedPointOperator", "cyclic_projections", "averaged_projections",
    "douglas_rachford", "generalized_dr", "raar", "circumcenter",
    "circumcentered_dr", "aamr", "naive_multiset_dr", "cyclic_dr",
    "anchored_dr", "product_dr", "product_gdr", "product_aamr", "lift",
    "unlift_shadow", "best_approximation_pair",
]


@dataclass(frozen=True)
class FixedPointOperator:
    step: Callable[[np.ndarray], np.ndarray]
    label: str
    shadow: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ip: Optional[InnerProduct] = None

    def __post_init__(self):
        if self.shadow is not None:
            raw = self.shadow
            object.__setattr__(self, "shadow", lambda x: raw(as_vector(x)))

    def __call__(self, x) -> np.ndarray:
        return self.step(as_vector(x))


def _ip_of(sets) -> Optional[InnerProduct]:
    for s in sets:
        if s.ip.weights is not None:
            return s.ip
    return None


def _need(sets, k, what):
    sets = list(sets)
    if len(sets) < k:
        raise InvalidProblemError(f"{what} needs at least {k} set(s), got {len(sets)}")
    dims = {s.dim for s in sets if s.dim is not None}
    if len(dims) > 1:
        raise DimensionError(f"{what}: sets live in different dimensions {sorted(dims)}")
    return sets


def _open_unit(name, value, closed_right=False):
    value = float(value)
    ok = 0 < value <= 1 if closed_right else 0 < value < 1
    if not ok:
        rng = "]0,1]" if closed_right else "]0,1["
        raise ParamError(f"{name}={value} outside {rng}")
    return value


def _names(sets):
    return ",".join(s.name for s in sets)


# Methods of projections --------------------------------------------------

def cyclic_projections(sets: Sequence[ProjectableSet]) -> FixedPointOperator:
    """``P_{C_r} ... P_{C_1}``; the first set listed is applied first."""
    sets = _need(sets, 1, "cyclic projections")

    def step(x):
        for s in sets:
            x = s._project(x)
        return x

    return FixedPointOperator(step, f"CP[{_names(sets)}]", None, _ip_of(sets))


def averaged_projections(sets: Sequence[ProjectableSet]) -> FixedPointOperator:
    sets = _need(sets, 1, "averaged projections")
    r = len(sets)

    def step(x):
        acc = sets[0]._project(x)
        for s in sets[1:]:
            acc = acc + s._project(x)
        return acc / r

    return FixedPointOperator(step, f"AP[{_names(sets)}]", None, _ip_of(sets))


# Douglas-Rachford and relatives -----------------------------------------

def _dr_step(A, B):
    def step(x):
        a = A._project(x)
        return x + B._project(2.0 * a - x) - a
    return step


def douglas_rachford(A: ProjectableSet, B: ProjectableSet) -> FixedPointOperator:
    """``T_{A,B} = (Id + R_B R_A) / 2``, evaluated as ``x + P_B(2a - x) - a``
    with ``a = P_A(x)``.  The shadow is ``P_A``."""
    _need([A, B], 2, "Douglas-Rachford")
    return FixedPointOperator(_dr_step(A, B), f"DR[{A.name}->{B.name}]",
                              A._project, _ip_of([A, B]))


def generalized_dr(A, B, alpha: float) -> FixedPointOperator:
    """``(1 - alpha) x + alpha R_B R_A x`` with ``alpha`` in ]0,1[."""
    _need([A, B], 2, "generalized DR")
    alpha = _open_unit("alpha", alpha)

    def step(x):
        ra = 2.0 * A._project(x) - x
        rb = 2.0 * B._project(ra) - ra
        return (1.0 - alpha) * x + alpha * rb

    return FixedPointOperator(step, f"GDR(alpha={alpha:g})[{A.name}->{B.name}]",
                              A._project, _ip_of([A, B]))


def raar(A, B, beta: float) -> FixedPointOperator:
    """``(1 - beta) P_A x + beta T_{A,B} x`` with ``beta`` in ]0,1[."""
    _need([A, B], 2, "RAAR")
    beta = _open_unit("beta", beta)

    def step(x):
        a = A._project(x)
        t = x + B._project(2.0 * a - x) - a
        return (1.0 - beta) * a + beta * t

    return FixedPointOperator(step, f"RAAR(beta={beta:g})[{A.name}->{B.name}]",
                              A._project, _ip_of([A, B]))


def circumcenter(a, b, c, ip: Optional[InnerProduct] = None) -> np.ndarray:
    """Point of the affine hull of ``a, b, c`` equidistant from all three.

    Coincident points are tolerated: three equal points give that point and
    two distinct points give their midpoint.  Three distinct collinear
    points raise :class:`DegenerateTriangleError`.
    """
    ip = ip or EUCLIDEAN
    a, b, c = as_vector(a), as_vector(b), as_vector(c)
    if not (a.shape == b.shape == c.shape):
        raise DimensionError("circumcenter of points of different dimension")
    u, v = b - a, c - a
    uu, vv, uv = ip(u, u), ip(v, v), ip(u, v)
    scale2 = max(uu, vv, ip(c - b, c - b))
    if scale2 == 0.0:
        return a.copy()
    eq_tol = 1e-28 * scale2
    ab_same, ac_same = uu <= eq_tol, vv <= eq_tol
    bc_same = ip(c - b, c - b) <= eq_tol
    if ab_same or ac_same or bc_same:
        # exactly two distinct points
        p, q = (a, c) if ab_same else (a, b) if ac_same else (a, b)
        return 0.5 * (p + q)
    # Gram determinant via the component of v orthogonal to u; the direct
    # form uu*vv - uv**2 cancels catastrophically near collinearity
    vp = v - (uv / uu) * u
    det = uu * ip(vp, vp)
    if det <= 0.0 or np.sqrt(det) <= 1e-12 * scale2:
        raise DegenerateTriangleError("three distinct collinear points")
    s = 0.5 * vv * (uu - uv) / det
    t = 0.5 * uu * (vv - uv) / det
    return a + s * u + t * v


def circumcentered_dr(A, B) -> FixedPointOperator:
    """``x -> circumcenter(x, R_A x, R_B R_A x)``; intended for subspaces."""
    _need([A, B], 2, "circumcentered DR")
    ip = _ip_of([A, B])

    def step(x):
        ra = 2.0 * A._project(x) - x
        rba = 2.0 * B._project(ra) - ra
        return circumcenter(x, ra, rba, ip)

    return FixedPointOperator(step, f"CDR[{A.name}->{B.name}]", A._project, ip)


def aamr(A, B, alpha: float, beta: float, q=None) -> FixedPointOperator:
    """Averaged alternating modified reflections.

    ``x -> (1 - alpha) x + alpha (2 beta P_{B-q} - Id)(2 beta P_{A-q} - Id) x``
    with ``alpha`` in ]0,1] and ``beta`` in ]0,1[.  ``beta = 1`` is accepted
    as the limit case which, with ``alpha = 1/2`` and ``q = 0``, is exactly
    Douglas-Rachford.  The shadow is ``P_A(x + q)``.
    """
    _need([A, B], 2, "AAMR")
    alpha = _open_unit("alpha", alpha, closed_right=True)
    beta = _open_unit("beta", beta, closed_right=True)
    dim = A.dim if A.dim is not None else B.dim
    if q is None:
        q = np.zeros(dim) if dim is not None else 0.0
    q = np.asarray(q, dtype=np.float64)
    if dim is not None and q.ndim and q.shape[0] != dim:
        raise DimensionError("anchor point q has the wrong dimension")

    def step(x):
        y = 2.0 * beta * (A._project(x + q) - q) - x
        z = 2.0 * beta * (B._project(y + q) - q) - y
        return (1.0 - alpha) * x + alpha * z

    def shadow(x):
        return A._project(x + q)

    return FixedPointOperator(
        step, f"AAMR(alpha={alpha:g},beta={beta:g})[{A.name}->{B.name}]",
        shadow, _ip_of([A, B]))


# Many-set variants -------------------------------------------------------

def naive_multiset_dr(sets) -> FixedPointOperator:
    """``(Id + R_{C_r} ... R_{C_1}) / 2``.

    Its fixed points need not project onto the intersection; kept for
    illustration and comparison.
    """
    sets = _need(sets, 2, "multi-set DR")

    def step(x):
        y = x
        for s in sets:
            y = 2.0 * s._project(y) - y
        return 0.5 * (x + y)

    return FixedPointOperator(step, f"DR3[{_names(sets)}]", sets[0]._project,
                              _ip_of(sets))


def cyclic_dr(sets) -> FixedPointOperator:
    """``T_{C_r,C_1} ... T_{C_2,C_3} T_{C_1,C_2}``; ``T_{C_1,C_2}`` acts first."""
    sets = _need(sets, 2, "cyclic DR")
    r = len(sets)
    stages = [_dr_step(sets[i], sets[(i + 1) % r]) for i in range(r)]

    def step(x):
        for st in stages:
            x = st(x)
        return x

    return FixedPointOperator(step, f"CycDR[{_names(sets)}]", sets[0]._project,
                              _ip_of(sets))


def anchored_dr(anchor: ProjectableSet, others) -> FixedPointOperator:
    """``T_{C_1,C_r} ... T_{C_1,C_2}`` with anchor ``C_1``."""
    others = list(others)
    if not others:
        raise InvalidProblemError("anchored DR needs at least one non-anchor set")
    _need([anchor] + others, 2, "anchored DR")
    stages = [_dr_step(anchor, s) for s in others]

    def step(x):
        for st in stages:
            x = st(x)
        return x

    return FixedPointOperator(step, f"AnchDR[{anchor.name};{_names(others)}]",
                              anchor._project, _ip_of([anchor] + others))


# Product space -----------------------------------------------------------

def lift(x, r: int) -> np.ndarray:
    """``(x, x, ..., x)`` with ``r`` copies."""
    if int(r) < 1:
        raise DimensionError("r must be >= 1")
    return np.tile(as_vector(x), int(r))


def unlift_shadow(X, r: int, base_dim: Optional[int] = None) -> np.ndarray:
    """Block mean of a product-space vector, i.e. ``P_D`` read in the base space."""
    X = as_vector(X)
    r = int(r)
    if r < 1 or X.shape[0] % r or (base_dim is not None and X.shape[0] != r * base_dim):
        raise DimensionError(f"length {X.shape[0]} is not {r} blocks"
                             + (f" of {base_dim}" if base_dim else ""))
    return X.reshape(r, -1).mean(axis=0)


def _product_pair(sets, base_dim, ip):
    sets = _need(sets, 2, "product-space method")
    if base_dim is None:
        dims = {s.dim for s in sets if s.dim is not None}
        if not dims:
            raise DimensionError("cannot infer the base dimension")
        base_dim = dims.pop()
    r = len(sets)
    if ip is None:
        ip = _ip_of(sets)
    D = DiagonalSet(r, base_dim, ip)
    C = ProductSet(sets, [base_dim] * r)
    return D, C, r, base_dim


def _with_product_shadow(op, D, r, base_dim, label, q=None):
    if q is None:
        def shadow(X):
            return X.reshape(r, base_dim).mean(axis=0)
    else:
        def shadow(X):
            return (X + q).reshape(r, base_dim).mean(axis=0)
    return FixedPointOperator(op.step, label, shadow, D.ip if D.ip.weights is not None else None)


def product_dr(sets, base_dim: Optional[int] = None,
               ip: Optional[InnerProduct] = None) -> FixedPointOperator:
    """Douglas-Rachford on the diagonal ``D`` and the product ``C_1 x ... x C_r``.

    One step is ``p = mean_i x_i`` followed by
    ``x_i <- x_i/2 + R_{C_i}(2p - x_i)/2`` for every block.  The diagonal is
    reflected first, so the shadow is ``p`` itself, returned in the base
    space.
    """
    D, C, r, base_dim = _product_pair(sets, base_dim, ip)
    op = douglas_rachford(D, C)
    return _with_product_shadow(op, D, r, base_dim, f"ProdDR[{_names(sets)}]")


def product_gdr(sets, alpha: float, base_dim=None, ip=None) -> FixedPointOperator:
    D, C, r, base_dim = _product_pair(sets, base_dim, ip)
    op = generalized_dr(D, C, alpha)
    return _with_product_shadow(op, D, r, base_dim,
                                f"ProdGDR(alpha={alpha:g})[{_names(sets)}]")


def product_aamr(sets, alpha: float, beta: float, q=None, base_dim=None,
                 ip=None) -> FixedPointOperator:
    """AAMR on ``(D, C)`` with the diagonal reflected first.

    ``q`` is a base-space anchor, lifted to ``(q, ..., q)``.  The shadow is
    the block mean of ``x + q``.
    """
    D, C, r, base_dim = _product_pair(sets, base_dim, ip)
    qq = None if q is None else lift(as_vector(q, base_dim), r)
    op = aamr(D, C, alpha, beta, qq)
    return _with_product_shadow(
        op, D, r, base_dim,
        f"ProdAAMR(alpha={alpha:g},beta={beta:g})[{_names(sets)}]", qq)


def best_approximation_pair(report: SolveReport, A: ProjectableSet,
                            B: ProjectableSet):
    """``(a, P_B(a))`` where ``a`` is the shadow of a Douglas-Rachford run."""
    if report.shadow is None:
        raise MissingShadowError("the report carries no shadow point")
    a = as_vector(report.shadow, A.dim)
    return a.copy(), B.project(a)
