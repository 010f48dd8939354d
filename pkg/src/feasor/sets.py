"""Constraint sets with closed-form projectors.

Every set exposes ``project`` (a deterministic selection of the nearest
point mapping), ``reflect`` and a tolerance-based ``contains``.  Nonconvex
sets report ``is_convex = False``; their projectors are one fixed selection
of a possibly multivalued map:

* binary sum sets put ones on the ``m`` largest entries, the later index
  winning ties;
* the binary box sends an entry to 1 only if it is strictly above 0.5.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from . import kernels
from .core import EUCLIDEAN, InnerProduct, as_vector
from .errors import DimensionError, InvalidSetError, SingularSystemError

__all__ = [
    "MEMBERSHIP_TOL",
    "ProjectableSet", "WholeSpace", "Hyperplane", "Halfspace", "Ball",
    "Orthant", "AffineRows", "SumEquals", "SumAtMost", "BinarySumEquals",
    "BinarySumAtMost", "BinaryBox", "SegmentedSumSet", "Translated",
    "Dilated", "ProductSet", "DiagonalSet",
    "project_hyperplane", "project_halfspace", "project_ball",
    "project_orthant", "project_affine_rows", "project_sum",
    "project_sum_le", "project_binary_sum", "project_binary_sum_le",
    "project_binary_box", "reflect", "translate", "dilate", "product_set",
    "diagonal_set",
]

MEMBERSHIP_TOL = 1e-8


class ProjectableSet:
    """Base class.  Subclasses implement ``_project`` and ``_contains``."""

    name = "set"
    is_convex = True

    def __init__(self, dim: Optional[int] = None,
                 ip: Optional[InnerProduct] = None):
        self.dim = dim
        self.ip = ip or EUCLIDEAN
        if dim is not None and self.ip.dim is not None and self.ip.dim != dim:
            raise DimensionError(
                f"{self.name}: weights of length {self.ip.dim} for dimension {dim}")

    def _vec(self, x) -> np.ndarray:
        return as_vector(x, self.dim)

    def project(self, x) -> np.ndarray:
        return self._project(self._vec(x))

    def reflect(self, x) -> np.ndarray:
        x = self._vec(x)
        return 2.0 * self._project(x) - x

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return bool(self._contains(self._vec(x), tol))

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def distance(self, x) -> float:
        x = self._vec(x)
        return self.ip.norm(x - self._project(x))

    def _project(self, x):
        raise NotImplementedError

    def _contains(self, x, tol):
        return self.ip.norm(x - self._project(x)) <= tol

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} dim={self.dim}>"


class WholeSpace(ProjectableSet):
    name = "E"

    def _project(self, x):
        return x.copy()

    def _contains(self, x, tol):
        return True


class Hyperplane(ProjectableSet):
    """``{x : <a, x> = b}`` in the ambient inner product."""

    def __init__(self, a, b: float, ip: Optional[InnerProduct] = None,
                 name: Optional[str] = None):
        a = as_vector(a)
        super().__init__(a.shape[0], ip)
        self.a = a
        self.b = float(b)
        self._aa = self.ip(a, a)
        if not self._aa > 0:
            raise InvalidSetError("hyperplane normal must be nonzero")
        self.name = name or "hyperplane"

    def _project(self, x):
        return x + ((self.b - self.ip(self.a, x)) / self._aa) * self.a

    def _contains(self, x, tol):
        return abs(self.ip(self.a, x) - self.b) <= tol


class Halfspace(Hyperplane):
    """``{x : <a, x> <= b}``."""

    def __init__(self, a, b, ip=None, name=None):
        super().__init__(a, b, ip, name or "halfspace")

    def _project(self, x):
        gap = self.b - self.ip(self.a, x)
        if gap >= 0:
            return x.copy()
        return x + (gap / self._aa) * self.a

    def _contains(self, x, tol):
        return self.ip(self.a, x) - self.b <= tol


class Ball(ProjectableSet):
    """Closed ball of radius ``r`` centred at the origin."""

    def __init__(self, radius: float, dim: Optional[int] = None, ip=None):
        if not radius > 0:
            raise InvalidSetError("ball radius must be > 0")
        super().__init__(dim, ip)
        self.radius = float(radius)
        self.name = f"ball(r={self.radius:g})"

    def _project(self, x):
        return (self.radius / max(self.ip.norm(x), self.radius)) * x

    def _contains(self, x, tol):
        return self.ip.norm(x) <= self.radius + tol


class Orthant(ProjectableSet):
    """Nonnegative orthant.  Clamping is exact for any positive weights."""

    name = "orthant"

    def _project(self, x):
        return np.maximum(x, 0.0)

    def _contains(self, x, tol):
        return bool(np.all(x >= -tol))


class AffineRows(ProjectableSet):
    """Solution set of ``A x = b`` for ``A`` of full row rank.

    Projects with ``x - W^{-1} A^T (A W^{-1} A^T)^{-1} (A x - b)`` where ``W``
    holds the inner-product weights (identity by default).
    """

    def __init__(self, A, b, ip=None, name=None):
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        b = as_vector(b, A.shape[0])
        super().__init__(A.shape[1], ip)
        winv = 1.0 if self.ip.weights is None else 1.0 / self.ip.weights
        self.A = A
        self.b = b
        self._AW = A * winv
        gram = self._AW @ A.T
        s = np.linalg.svd(gram, compute_uv=False)
        if s.size == 0 or s[-1] <= 1e-12 * max(s[0], 1.0):
            raise SingularSystemError("A must have full row rank")
        self._chol = np.linalg.cholesky(gram)
        self.name = name or f"affine({A.shape[0]} rows)"

    def _project(self, x):
        r = self.A @ x - self.b
        y = np.linalg.solve(self._chol.T, np.linalg.solve(self._chol, r))
        return x - self._AW.T @ y

    def _contains(self, x, tol):
        return bool(np.all(np.abs(self.A @ x - self.b) <= tol))


def _check_pm(p, m):
    if int(p) < 1 or int(m) < 1:
        raise InvalidSetError("need p >= 1 and m >= 1")
    return int(p), int(m)


class SumEquals(ProjectableSet):
    """``{x in R^p : sum x_i = m}``; equal-shift projector with unit weights."""

    at_most = False

    def __init__(self, p: int, m: int = 2, ip=None):
        p, m = _check_pm(p, m)
        super().__init__(p, ip)
        self.p, self.m = p, m
        self.name = f"{'H' if self.at_most else 'S'}_{p}(m={m})"
        self._weighted = None
        if self.ip.weights is not None:
            cls = Halfspace if self.at_most else Hyperplane
            self._weighted = cls(1.0 / self.ip.weights, m, self.ip)

    def _project(self, x):
        if self._weighted is not None:
            return self._weighted._project(x)
        shift = (self.m - x.sum()) / self.p
        if self.at_most:
            shift = min(0.0, shift)
        return x + shift

    def _contains(self, x, tol):
        gap = x.sum() - self.m
        return gap <= tol if self.at_most else abs(gap) <= tol


class SumAtMost(SumEquals):
    """``{x in R^p : sum x_i <= m}``."""

    at_most = True


class _Binary(ProjectableSet):
    is_convex = False

    def __init__(self, dim, ip=None):
        super().__init__(dim, ip)
        if self.ip.weights is not None:
            raise InvalidSetError(f"{type(self).__name__} requires unit weights")

    @staticmethod
    def _is_binary(x, tol):
        return bool(np.all(np.minimum(np.abs(x), np.abs(x - 1.0)) <= tol))


class BinarySumEquals(_Binary):
    """0/1 vectors of length ``p`` with exactly ``m`` ones."""

    at_most = False

    def __init__(self, p: int, m: int = 2):
        p, m = _check_pm(p, m)
        if m > p and not self.at_most:
            raise InvalidSetError(f"no 0/1 vector of length {p} has {m} ones")
        super().__init__(p)
        self.p, self.m = p, m
        self._layout = kernels.SegmentLayout([np.arange(p)])
        self.name = f"{'Hhat' if self.at_most else 'Shat'}_{p}(m={m})"

    def _project(self, x):
        return kernels.segment_binary(x, self._layout, self.m, self.at_most)

    def _contains(self, x, tol):
        if not self._is_binary(x, tol):
            return False
        ones = int(np.round(x).sum())
        return ones <= self.m if self.at_most else ones == self.m


class BinarySumAtMost(BinarySumEquals):
    """0/1 vectors of length ``p`` with at most ``m`` ones."""

    at_most = True


class BinaryBox(_Binary):
    """``{0, 1}^n``; rounds entries strictly above 0.5 up, the rest down."""

    name = "binary box"

    def __init__(self, dim: Optional[int] = None):
        super().__init__(dim)

    def _project(self, x):
        return (x > 0.5).astype(np.float64)

    def _contains(self, x, tol):
        return self._is_binary(x, tol)


class SegmentedSumSet(ProjectableSet):
    """Sum constraint imposed independently on disjoint index segments.

    Each segment must sum to ``m`` (or at most ``m`` with ``at_most``);
    with ``binary`` the segment is additionally 0/1.  Entries outside every
    segment are unconstrained.  This is the shape of every queens
    constraint (rows, columns, diagonals of a flattened board).
    """

    def __init__(self, dim: int, segments: Sequence[Sequence[int]], m: int,
                 at_most: bool, binary: bool, name: Optional[str] = None):
        super().__init__(int(dim))
        self.layout = (segments if isinstance(segments, kernels.SegmentLayout)
                       else kernels.SegmentLayout(segments))
        if self.layout.idx.size and (self.layout.idx.min() < 0
                                     or self.layout.idx.max() >= self.dim):
            raise DimensionError("segment index out of range")
        self.m = int(m)
        self.at_most = bool(at_most)
        self.binary = bool(binary)
        self.is_convex = not self.binary
        if binary and not at_most and np.any(self.layout.lengths < self.m):
            raise InvalidSetError("a segment is shorter than m")
        self.name = name or ("segmented " + ("binary " if binary else "")
                             + ("sum<=" if at_most else "sum=") + str(self.m))

    def _project(self, x):
        if self.binary:
            return kernels.segment_binary(x, self.layout, self.m, self.at_most)
        return kernels.segment_sums(x, self.layout, self.m, self.at_most)

    def segment_sums(self, x) -> np.ndarray:
        x = self._vec(x)
        return np.add.reduceat(x[self.layout.idx], self.layout.offsets[:-1]) \
            if self.layout.n_segments else np.empty(0)

    def _contains(self, x, tol):
        sums = self.segment_sums(x)
        ok = np.all(sums <= self.m + tol) if self.at_most \
            else np.all(np.abs(sums - self.m) <= tol)
        if ok and self.binary:
            ok = _Binary._is_binary(x[self.layout.idx], tol)
        return bool(ok)


class Translated(ProjectableSet):
    """``y + C`` with ``P_{y+C}(x) = y + P_C(x - y)``."""

    def __init__(self, base: ProjectableSet, shift):
        shift = as_vector(shift, base.dim)
        super().__init__(shift.shape[0], base.ip)
        self.base = base
        self.shift = shift
        self.is_convex = base.is_convex
        self.name = f"({base.name})+y"

    def _project(self, x):
        return self.shift + self.base._project(x - self.shift)

    def _contains(self, x, tol):
        return self.base._contains(x - self.shift, tol)


class Dilated(ProjectableSet):
    """``alpha C`` with ``P_{alpha C}(x) = alpha P_C(x / alpha)``."""

    def __init__(self, base: ProjectableSet, alpha: float):
        alpha = float(alpha)
        if alpha == 0 or not np.isfinite(alpha):
            raise InvalidSetError("dilation factor must be finite and nonzero")
        super().__init__(base.dim, base.ip)
        self.base = base
        self.alpha = alpha
        self.is_convex = base.is_convex
        self.name = f"{alpha:g}*({base.name})"

    def _project(self, x):
        return self.alpha * self.base._project(x / self.alpha)

    def _contains(self, x, tol):
        return self.base._contains(x / self.alpha, tol / abs(self.alpha))


class ProductSet(ProjectableSet):
    """Cartesian product ``C_1 x ... x C_r`` projected blockwise."""

    def __init__(self, sets: Sequence[ProjectableSet], dims=None):
        sets = list(sets)
        if not sets:
            raise InvalidSetError("product of no sets")
        if dims is None:
            dims = [s.dim for s in sets]
        if any(d is None for d in dims):
            raise DimensionError("every factor of a product needs a dimension")
        self.sets = sets
        self.dims = [int(d) for d in dims]
        self.bounds = np.concatenate([[0], np.cumsum(self.dims)]).astype(int)
        weights = []
        for s, d in zip(sets, self.dims):
            if s.dim is not None and s.dim != d:
                raise DimensionError(f"factor {s.name} has dim {s.dim}, not {d}")
            weights.append(np.ones(d) if s.ip.weights is None else s.ip.weights)
        ip = None
        if any(s.ip.weights is not None for s in sets):
            ip = InnerProduct(np.concatenate(weights))
        super().__init__(int(self.bounds[-1]), ip)
        self.is_convex = all(s.is_convex for s in sets)
        self.name = " x ".join(s.name for s in sets)

    def blocks(self, x):
        return [x[self.bounds[i]:self.bounds[i + 1]] for i in range(len(self.sets))]

    def _project(self, x):
        out = np.empty_like(x)
        for i, s in enumerate(self.sets):
            lo, hi = self.bounds[i], self.bounds[i + 1]
            out[lo:hi] = s._project(x[lo:hi])
        return out

    def _contains(self, x, tol):
        return all(s._contains(b, tol) for s, b in zip(self.sets, self.blocks(x)))


class DiagonalSet(ProjectableSet):
    """``{(x, ..., x)}`` in the ``r``-fold product; projects to the block mean."""

    def __init__(self, r: int, base_dim: int, ip: Optional[InnerProduct] = None):
        r, base_dim = int(r), int(base_dim)
        if r < 1 or base_dim < 1:
            raise DimensionError("need r >= 1 and base_dim >= 1")
        base_ip = ip or EUCLIDEAN
        if base_ip.dim is not None and base_ip.dim != base_dim:
            raise DimensionError("weights must match the base dimension")
        super().__init__(r * base_dim, base_ip.tile(r))
        self.r, self.base_dim = r, base_dim
        self.name = f"diagonal(r={r})"

    def mean(self, x) -> np.ndarray:
        return np.asarray(x).reshape(self.r, self.base_dim).mean(axis=0)

    def _project(self, x):
        return np.tile(self.mean(x), self.r)

    def _contains(self, x, tol):
        blocks = x.reshape(self.r, self.base_dim)
        return bool(np.all(np.abs(blocks - blocks[0]) <= tol))


# Functional forms --------------------------------------------------------

def project_hyperplane(H: Hyperplane, x) -> np.ndarray:
    return H.project(x)


def project_halfspace(H: Halfspace, x) -> np.ndarray:
    return H.project(x)


def project_ball(r: float, x, ip: Optional[InnerProduct] = None) -> np.ndarray:
    return Ball(r, ip=ip).project(x)


def project_orthant(x) -> np.ndarray:
    return Orthant().project(x)


def project_affine_rows(A, b, x, ip: Optional[InnerProduct] = None) -> np.ndarray:
    return AffineRows(A, b, ip).project(x)


def project_sum(S: SumEquals, x) -> np.ndarray:
    return S.project(x)


def project_sum_le(H: SumAtMost, x) -> np.ndarray:
    return H.project(x)


def project_binary_sum(S: BinarySumEquals, x) -> np.ndarray:
    return S.project(x)


def project_binary_sum_le(H: BinarySumAtMost, x) -> np.ndarray:
    return H.project(x)


def project_binary_box(x) -> np.ndarray:
    return BinaryBox().project(x)


def reflect(S: ProjectableSet, x) -> np.ndarray:
    return S.reflect(x)


def translate(S: ProjectableSet, y) -> Translated:
    return Translated(S, y)


def dilate(S: ProjectableSet, alpha: float) -> Dilated:
    return Dilated(S, alpha)


def product_set(sets: Sequence[ProjectableSet], dims=None) -> ProductSet:
    return ProductSet(sets, dims)


def diagonal_set(r: int, base_dim: int,
                 ip: Optional[InnerProduct] = None) -> DiagonalSet:
    return DiagonalSet(r, base_dim, ip)
