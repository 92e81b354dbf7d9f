"""The distributions cut out by ``F = QS`` and their pointwise properties.

At a point ``K`` the space splits orthogonally as ``Ker F + Im F``.  The plain
distribution consists of tangent vectors killing ``Ker F`` and preserving
``Im F``; the unitary one of ``[C, K]`` with ``C`` in ``u(J)`` subject to the
same two conditions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .algebroid import AnchorKind, anchor_image_basis
from .bundles import S_TAGS, ConstraintClass, class_relation, fiber_basis, s_matrix, twist_class
from .errors import HypothesisViolated, RankJump
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    anticommutes_with,
    commutes_with,
    constrained_matrix_space,
    intertwines,
    kills,
    preserves,
    skew,
    subspace_relate,
)
from .sections import QPolynomial
from .twistor import Curve, curve_from_tangent, lie_bracket_fd, tangent_basis

__all__ = [
    "FLAVORS",
    "DistributionSpec",
    "image_split",
    "distribution_basis",
    "unitary_generators",
    "image_equivalence_check",
    "complex_closure_check",
    "AnchorImage",
    "FullTangent",
    "Intersection",
    "SpanSum",
    "refinement_check",
    "involutivity_residual",
]

FLAVORS = ("plain", "unitary")


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    j: np.ndarray
    q: QPolynomial = field(default_factory=lambda: QPolynomial([1.0]))
    s_tag: str = "one"
    flavor: str = "plain"

    def __post_init__(self):
        if self.s_tag not in S_TAGS:
            raise ValueError(f"unknown S tag {self.s_tag!r}")
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}; expected one of {FLAVORS}")
        object.__setattr__(self, "j", np.asarray(self.j, dtype=float))

    @property
    def dim(self) -> int:
        return len(self.j)

    def f_matrix(self, k) -> np.ndarray:
        return self.q.evaluate(self.j, k) @ s_matrix(self.s_tag, self.j, k)

    def basis(self, k, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
        return distribution_basis(self, k, tol)

    def subspace(self, k, tol: Tolerances = DEFAULT_TOL) -> Subspace:
        return Subspace.from_matrices(self.basis(k, tol), ambient=self.dim ** 2, rank_tol=tol.rank_tol)

    def with_flavor(self, flavor: str) -> "DistributionSpec":
        return DistributionSpec(self.j, self.q, self.s_tag, flavor)

    def to_json(self) -> dict:
        out = self.q.to_json()
        out.update({"S": self.s_tag, "flavor": self.flavor})
        return out

    @classmethod
    def from_json(cls, obj, j) -> "DistributionSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        q = QPolynomial.from_json(obj) if "coeffs" in obj else QPolynomial([1.0])
        return cls(j, q, obj.get("S", "one"), obj.get("flavor", "plain"))


def image_split(spec: DistributionSpec, k, tol: Tolerances = DEFAULT_TOL) -> tuple[Subspace, Subspace]:
    """``(Ker F, Im F)`` at ``K``, checking the standing hypotheses on ``Q``.

    Singular values below ``rank_tol * max(1, |F|_2)`` count as zero, so a
    coefficient polynomial vanishing at ``K`` up to round-off gives ``F = 0``.
    """
    res = spec.q.hypothesis_residuals(spec.j, k)
    bad = {name: r for name, r in res.items() if r > tol.check_tol}
    if bad:
        raise HypothesisViolated(f"Q fails its hypotheses at K: {bad}")
    f = spec.f_matrix(k)
    u, s, vt = np.linalg.svd(f)
    r = int(np.sum(s > tol.rank_tol * max(1.0, s[0] if s.size else 0.0)))
    return Subspace(vt[r:].T.copy()), Subspace(u[:, :r].copy())


def _constraints(spec, k, tol):
    ker, im = image_split(spec, k, tol)
    return [skew(), kills(ker), preserves(im)]


def unitary_generators(spec: DistributionSpec, k, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """Basis of ``{C in u(J) : C Ker F = 0, C Im F in Im F}``."""
    cons = _constraints(spec, k, tol) + [commutes_with(spec.j)]
    return constrained_matrix_space(spec.dim, cons, tol.rank_tol)


def distribution_basis(spec: DistributionSpec, k, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of the distribution at ``K``."""
    k = np.asarray(k, dtype=float)
    n = spec.dim
    if spec.flavor == "plain":
        cons = _constraints(spec, k, tol) + [anticommutes_with(k)]
        return constrained_matrix_space(n, cons, tol.rank_tol)
    vals = [c @ k - k @ c for c in unitary_generators(spec, k, tol)]
    if not vals:
        return []
    return Subspace.from_matrices(vals, ambient=n * n, rank_tol=tol.rank_tol).matrices((n, n))


def image_equivalence_check(spec: DistributionSpec, e_class: ConstraintClass, k,
                            tol: Tolerances = DEFAULT_TOL) -> bool:
    """``{F A F : A in E^S}`` equals ``{B in E : B Ker F = 0, B Im F in Im F}`` at ``K``."""
    j = spec.j
    n = spec.dim
    f = spec.f_matrix(k)
    lhs = [f @ a @ f for a in fiber_basis(twist_class(e_class, spec.s_tag), j, k, tol)]
    cons = _constraints(spec, k, tol)
    rel = class_relation(e_class)
    if rel is not None:
        (gs, gsym), (ds, dsym) = rel
        pick = {"J": j, "phi": k}
        cons.append(intertwines(gs * pick[gsym], ds * pick[dsym]))
    rhs = constrained_matrix_space(n, cons, tol.rank_tol)
    a = Subspace.from_matrices(lhs, ambient=n * n, rank_tol=tol.rank_tol)
    b = Subspace.from_matrices(rhs, ambient=n * n, rank_tol=tol.rank_tol)
    return subspace_relate(a, b, tol.rank_tol).equals


def complex_closure_check(spec: DistributionSpec, k, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Every ``K B`` with ``B`` in the distribution lies in it again."""
    basis = distribution_basis(spec, k, tol)
    if not basis:
        return True
    sub = Subspace.from_matrices(basis, rank_tol=tol.rank_tol)
    return all(sub.distance(k @ b) <= tol.check_tol for b in basis)


# ---------------------------------------------------------------------------
# subspaces of the tangent space for refinement checks


@dataclass(frozen=True, eq=False)
class AnchorImage:
    kind: AnchorKind
    j: np.ndarray

    def subspace(self, k, tol: Tolerances = DEFAULT_TOL) -> Subspace:
        return anchor_image_basis(self.kind, self.j, k, tol)


@dataclass(frozen=True)
class FullTangent:
    def subspace(self, k, tol: Tolerances = DEFAULT_TOL) -> Subspace:
        return Subspace.from_matrices(tangent_basis(k, tol), ambient=len(k) ** 2, rank_tol=tol.rank_tol)


@dataclass(frozen=True)
class Intersection:
    a: object
    b: object

    def subspace(self, k, tol: Tolerances = DEFAULT_TOL) -> Subspace:
        return self.a.subspace(k, tol).intersect(self.b.subspace(k, tol), tol.rank_tol)


@dataclass(frozen=True)
class SpanSum:
    a: object
    b: object

    def subspace(self, k, tol: Tolerances = DEFAULT_TOL) -> Subspace:
        return self.a.subspace(k, tol) + self.b.subspace(k, tol)


def refinement_check(a, b, k, relation: str = "subset", tol: Tolerances = DEFAULT_TOL) -> bool:
    """``a`` inside ``b`` (``relation="subset"``) or ``a == b`` (``"equal"``) at ``K``."""
    rel = subspace_relate(a.subspace(k, tol), b.subspace(k, tol), tol.rank_tol)
    if relation == "subset":
        return rel.contains
    if relation == "equal":
        return rel.equals
    raise ValueError(f"unknown relation {relation!r}")


# ---------------------------------------------------------------------------
# involutivity


def involutivity_residual(spec: DistributionSpec, k, tol: Tolerances = DEFAULT_TOL, *,
                          max_pairs: int | None = None) -> float:
    """Largest distance from the span of ``[X_i, X_j]`` computed by finite differences.

    Each basis vector ``b_i`` at ``K`` is extended to the vector field
    ``X_i(K') = P_{D(K')} b_i`` (orthogonal projection onto the distribution at
    ``K'``).  Derivatives are taken along curves inside the leaf: conjugation by
    ``exp(tC)`` with ``C`` in the unitary generators for the unitary flavor, and
    the default conjugation curve otherwise.  The rank is probed at radius
    ``10 * fd_step`` and at every evaluation point; a change raises RankJump.
    """
    k = np.asarray(k, dtype=float)
    basis = distribution_basis(spec, k, tol)
    rank = len(basis)
    if rank < 2:
        return 0.0
    n = spec.dim
    cache: dict[bytes, np.ndarray] = {}

    def projector(kk):
        key = np.round(kk, 15).tobytes()
        if key not in cache:
            bb = distribution_basis(spec, kk, tol)
            if len(bb) != rank:
                raise RankJump(f"distribution rank {len(bb)} != {rank} near K")
            m = np.stack([x.ravel() for x in bb], axis=1)
            cache[key] = m @ m.T
        return cache[key]

    def field(vec):
        return lambda kk: (projector(kk) @ vec.ravel()).reshape(n, n)

    if spec.flavor == "unitary":
        gens = unitary_generators(spec, k, tol)
        images = np.stack([(c @ k - k @ c).ravel() for c in gens], axis=1)

        def curve_factory(kk, v):
            coef, *_ = np.linalg.lstsq(images, v.ravel(), rcond=None)
            return Curve(kk, sum(a * c for a, c in zip(coef, gens)))
    else:
        def curve_factory(kk, v):
            return curve_from_tangent(kk, v, tol)

    radius = 10 * tol.fd_step
    for b in basis:
        c = curve_factory(k, b)
        for t in (radius, -radius):
            projector(c(t * np.sqrt(n)))

    sub = Subspace.from_matrices(basis, rank_tol=tol.rank_tol)
    pairs = list(combinations(range(rank), 2))
    if max_pairs is not None:
        pairs = pairs[:max_pairs]
    worst = 0.0
    for i, jdx in pairs:
        br = lie_bracket_fd(field(basis[i]), field(basis[jdx]), k, tol, curve_factory=curve_factory)
        worst = max(worst, sub.distance(br))
    return worst
