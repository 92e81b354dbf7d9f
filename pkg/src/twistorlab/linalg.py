"""Tolerance-aware real linear algebra used throughout the package.

Everything here works in canonical coordinates, where the metric is the
identity and the adjoint of a matrix is its transpose.  :class:`MetricSpace`
performs the one-time Cholesky reduction from a general SPD metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import AmbientMismatch, DimensionMismatch, InvalidStructure, NonSymmetric

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "MetricSpace",
    "Subspace",
    "SubspaceRelation",
    "numerical_rank",
    "null_space",
    "clustered_sym_eig",
    "subspace_relate",
    "constrained_matrix_space",
    "skew",
    "commutes_with",
    "anticommutes_with",
    "intertwines",
    "kills",
    "preserves",
    "maps_into",
    "orientation_sign",
    "anticommutator",
    "commutator",
    "matrix_to_json",
    "matrix_from_json",
    "subspace_to_json",
    "subspace_from_json",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs shared by every module.

    ``rank_tol`` and ``cluster_tol`` are relative to the largest singular value
    (resp. spectral norm) of the matrix being analysed.
    """

    rank_tol: float = 1e-9
    cluster_tol: float = 1e-8
    fd_step: float = 1e-5
    check_tol: float = 1e-6

    def __post_init__(self):
        for name in ("rank_tol", "cluster_tol", "fd_step", "check_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.cluster_tol > self.rank_tol:
            raise ValueError("cluster_tol must exceed rank_tol")

    def replace(self, **changes) -> "Tolerances":
        values = dict(
            rank_tol=self.rank_tol,
            cluster_tol=self.cluster_tol,
            fd_step=self.fd_step,
            check_tol=self.check_tol,
        )
        values.update(changes)
        return Tolerances(**values)


DEFAULT_TOL = Tolerances()


def anticommutator(a, b):
    return a @ b + b @ a


def commutator(a, b):
    return a @ b - b @ a


@dataclass(frozen=True)
class MetricSpace:
    """An even-dimensional real vector space with a positive definite metric.

    The Cholesky factor ``g = P^T P`` gives the congruence that turns ``g`` into
    the identity: an endomorphism ``A`` becomes ``P A P^{-1}``.
    """

    dim: int
    metric: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim < 4 or self.dim % 2:
            raise DimensionMismatch(f"dimension must be even and >= 4, got {self.dim}")
        g = np.eye(self.dim) if self.metric is None else np.asarray(self.metric, dtype=float)
        if g.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"metric has shape {g.shape}, expected {(self.dim, self.dim)}")
        if np.linalg.norm(g - g.T) > DEFAULT_TOL.check_tol * max(1.0, np.linalg.norm(g)):
            raise NonSymmetric("metric is not symmetric")
        if np.linalg.eigvalsh(g).min() <= 0:
            raise ValueError("metric is not positive definite")
        object.__setattr__(self, "metric", g)

    @property
    def n(self) -> int:
        return self.dim // 2

    @property
    def chol(self) -> np.ndarray:
        return np.linalg.cholesky(self.metric).T

    def to_canonical(self, a):
        p = self.chol
        return p @ np.asarray(a, dtype=float) @ np.linalg.inv(p)

    def from_canonical(self, a):
        p = self.chol
        return np.linalg.inv(p) @ np.asarray(a, dtype=float) @ p

    def adjoint(self, a):
        """Metric adjoint ``g^{-1} A^T g`` in the original coordinates."""
        return np.linalg.solve(self.metric, np.asarray(a).T @ self.metric)


def numerical_rank(m, rank_tol: float = DEFAULT_TOL.rank_tol) -> int:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0:
        return 0
    return int(np.sum(s > rank_tol * max(s[0], 1.0)))


def null_space(m, rank_tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of ``m``."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    ncols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    if s.size == 0:
        return np.eye(ncols)
    # same absolute floor as _orth: a round-off-sized matrix has full kernel
    r = int(np.sum(s > rank_tol * max(s[0], 1.0)))
    return vt[r:].T.copy()


def _orth(columns, rank_tol):
    columns = np.asarray(columns, dtype=float)
    if columns.ndim == 1:
        columns = columns[:, None]
    if columns.shape[1] == 0:
        return columns
    # floor at 1 so a family of round-off-sized vectors spans nothing
    u, s, _ = np.linalg.svd(columns, full_matrices=False)
    r = int(np.sum(s > rank_tol * max(s[0], 1.0)))
    return u[:, :r]


@dataclass(frozen=True)
class Subspace:
    """A linear subspace stored through an orthonormal basis (columns)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise ValueError("basis must be a 2-d array")
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, columns, rank_tol: float = DEFAULT_TOL.rank_tol) -> "Subspace":
        return cls(_orth(columns, rank_tol))

    @classmethod
    def from_matrices(cls, mats: Sequence[np.ndarray], ambient: int | None = None,
                      rank_tol: float = DEFAULT_TOL.rank_tol) -> "Subspace":
        """Span of a list of matrices viewed as vectors (row-major flattening)."""
        mats = list(mats)
        if not mats:
            if ambient is None:
                raise ValueError("ambient size needed for an empty span")
            return cls.zero(ambient)
        cols = np.stack([np.asarray(m, dtype=float).ravel() for m in mats], axis=1)
        return cls.span(cols, rank_tol)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def complement(self) -> "Subspace":
        if self.rank == 0:
            return Subspace.full(self.ambient_dim)
        return Subspace(null_space(self.basis.T))

    def distance(self, v) -> float:
        """Norm of the component of ``v`` orthogonal to the subspace."""
        v = np.asarray(v, dtype=float).ravel()
        return float(np.linalg.norm(v - self.basis @ (self.basis.T @ v)))

    def orthonormality_error(self) -> float:
        return float(np.linalg.norm(self.basis.T @ self.basis - np.eye(self.rank)))

    def matrices(self, shape) -> list[np.ndarray]:
        """Basis vectors reshaped to matrices (inverse of :meth:`from_matrices`)."""
        return [self.basis[:, i].reshape(shape) for i in range(self.rank)]

    def __add__(self, other: "Subspace") -> "Subspace":
        _check_ambient(self, other)
        return Subspace.span(np.hstack([self.basis, other.basis]))

    def intersect(self, other: "Subspace", rank_tol: float = DEFAULT_TOL.rank_tol) -> "Subspace":
        _check_ambient(self, other)
        if self.rank == 0 or other.rank == 0:
            return Subspace.zero(self.ambient_dim)
        # x = U a = W b  <=>  [U, -W] (a, b) = 0
        kern = null_space(np.hstack([self.basis, -other.basis]), rank_tol)
        if kern.shape[1] == 0:
            return Subspace.zero(self.ambient_dim)
        return Subspace.span(self.basis @ kern[: self.rank], rank_tol)


def _check_ambient(u: Subspace, w: Subspace):
    if u.ambient_dim != w.ambient_dim:
        raise AmbientMismatch(f"ambient dimensions differ: {u.ambient_dim} vs {w.ambient_dim}")


@dataclass(frozen=True)
class SubspaceRelation:
    contains: bool
    equals: bool
    dim_intersection: int
    dim_sum: int


def subspace_relate(u: Subspace, w: Subspace, rank_tol: float = DEFAULT_TOL.rank_tol) -> SubspaceRelation:
    """Compare two subspaces; ``contains`` answers ``u`` inside ``w``."""
    _check_ambient(u, w)
    dim_sum = numerical_rank(np.hstack([u.basis, w.basis]), rank_tol) if u.rank + w.rank else 0
    contains = dim_sum == w.rank
    return SubspaceRelation(
        contains=contains,
        equals=contains and dim_sum == u.rank,
        dim_intersection=u.rank + w.rank - dim_sum,
        dim_sum=dim_sum,
    )


def clustered_sym_eig(m, tol: Tolerances = DEFAULT_TOL) -> list[tuple[float, Subspace]]:
    """Eigen-decomposition of a symmetric matrix with merged near-equal eigenvalues.

    Sorted eigenvalues are chained into one cluster while consecutive gaps stay
    below ``cluster_tol * max(||M||_2, 1)``.  Each cluster is reported with the
    mean eigenvalue and the span of its eigenvectors, in ascending order.
    """
    m = np.asarray(m, dtype=float)
    scale = max(np.linalg.norm(m, 2), 1.0) if m.size else 1.0
    if np.linalg.norm(m - m.T) > tol.check_tol * scale:
        raise NonSymmetric(f"asymmetry {np.linalg.norm(m - m.T):.3e} exceeds tolerance")
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    thresh = tol.cluster_tol * scale
    out = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > thresh:
            out.append((float(np.mean(w[start:i])), Subspace(v[:, start:i])))
            start = i
    return out


# Linear constraints on matrices: callables A -> residual matrix.
Constraint = Callable[[np.ndarray], np.ndarray]


def skew() -> Constraint:
    return lambda a: a + a.T


def commutes_with(m) -> Constraint:
    m = np.asarray(m, dtype=float)
    return lambda a: m @ a - a @ m


def anticommutes_with(m) -> Constraint:
    m = np.asarray(m, dtype=float)
    return lambda a: m @ a + a @ m


def intertwines(left, right) -> Constraint:
    """``left A = A right``."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    return lambda a: left @ a - a @ right


def kills(sub: Subspace) -> Constraint:
    p = sub.projector
    return lambda a: a @ p


def preserves(sub: Subspace) -> Constraint:
    p = sub.projector
    q = np.eye(len(p)) - p
    return lambda a: q @ a @ p


def maps_into(source: Subspace, target: Subspace) -> Constraint:
    p = source.projector
    q = np.eye(len(p)) - target.projector
    return lambda a: q @ a @ p



def constrained_matrix_space(dim: int, constraints: Iterable[Constraint],
                             rank_tol: float = DEFAULT_TOL.rank_tol) -> list[np.ndarray]:
    """Basis of ``{A in R^{dim x dim} : c(A) = 0 for every constraint c}``.

    The constraints are sampled on the elementary matrices to build the
    linear system, whose kernel is read off an SVD.  The returned basis is
    orthonormal for the Frobenius inner product.
    """
    constraints = list(constraints)
    size = dim * dim
    if not constraints:
        return [e.reshape(dim, dim) for e in np.eye(size)]
    blocks = []
    for c in constraints:
        cols = [np.asarray(c(e.reshape(dim, dim)), dtype=float).ravel() for e in np.eye(size)]
        blocks.append(np.stack(cols, axis=1))
    kern = null_space(np.vstack(blocks), rank_tol)
    return [kern[:, i].reshape(dim, dim) for i in range(kern.shape[1])]


def orientation_sign(j, tol: Tolerances = DEFAULT_TOL) -> int:
    """Orientation induced by the complex structure ``j`` on R^{2n}.

    Builds a basis ``(v1, j v1, v2, j v2, ...)`` by greedily taking the
    standard basis vector farthest from the current span, and returns the sign
    of its determinant.  Any such basis gives the same sign.
    """
    j = np.asarray(j, dtype=float)
    dim = j.shape[0]
    if j.shape != (dim, dim) or dim % 2:
        raise InvalidStructure("expected an even-dimensional square matrix")
    if np.linalg.norm(j @ j + np.eye(dim)) > tol.check_tol * dim:
        raise InvalidStructure("matrix does not square to -1")
    cols: list[np.ndarray] = []
    q = np.zeros((dim, 0))
    for _ in range(dim // 2):
        resid = np.eye(dim) - q @ (q.T @ np.eye(dim))
        k = int(np.argmax(np.linalg.norm(resid, axis=0)))
        v = np.eye(dim)[:, k]
        cols.extend([v, j @ v])
        q = _orth(np.stack(cols, axis=1), 1e-12)
    return 1 if np.linalg.det(np.stack(cols, axis=1)) > 0 else -1


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=float)
    return {"dim": int(m.shape[0]), "rows": m.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows = np.asarray(obj["rows"], dtype=float)
        dim = int(obj["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if rows.shape != (dim, dim):
        raise DimensionMismatch(f"matrix rows have shape {rows.shape}, declared dim {dim}")
    return rows


def subspace_to_json(sub: Subspace) -> dict:
    return {"dim": sub.ambient_dim, "rank": sub.rank, "rows": sub.basis.tolist()}


def subspace_from_json(obj) -> Subspace:
    try:
        dim, rank = int(obj["dim"]), int(obj["rank"])
        rows = np.asarray(obj["rows"], dtype=float).reshape(dim, rank)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed subspace JSON: {exc}") from exc
    return Subspace(rows)
