"""Anchors, explicit brackets and numerical checks of the skew-algebroid axioms.

The sections of ``gl(V)`` carry anchors into the tangent bundle of the
twistor space:

* ``delta_+-(A) = [S A + A^T S, phi]`` with ``S = J +- phi``;
* ``sigma(A) = [S A T - T A^T S, phi]`` with ``S = J + phi``, ``T = J - phi``;
* ``psi(A) = [F A F, phi]`` with ``F = Q S``, defined on ``E^S``.

The first two come with explicit brackets.  A skew algebroid needs the
anchor to be a bracket morphism and the Leibniz rule; the Jacobi identity is
only measured.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bundles import ConstraintClass, class_residual, fiber_basis, s_matrix, twist_class
from .errors import EvaluationFailure, NotInDomain
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    anticommutator,
    anticommutes_with,
    constrained_matrix_space,
    maps_into,
    null_space,
    skew,
    subspace_relate,
)
from .sections import (
    JJ,
    PHI,
    Const,
    Field,
    QPolynomial,
    ScalarFn,
    Section,
    _as_section,
)
from .twistor import lie_bracket_fd, random_point, standard_structure

__all__ = [
    "AnchorKind",
    "DeltaPlus",
    "DeltaMinus",
    "Sigma",
    "PsiQS",
    "parse_anchor",
    "anchor",
    "anchor_image_basis",
    "image_description_basis",
    "image_matches_description",
    "bracket",
    "random_section",
    "AxiomReport",
    "verify_axioms",
    "order_check",
]


@dataclass(frozen=True, eq=False)
class AnchorKind:
    tag: str
    q: QPolynomial | None = None
    s_tag: str = "one"
    e_class: ConstraintClass = ConstraintClass.O

    @property
    def has_bracket(self) -> bool:
        return self.tag in ("delta_plus", "delta_minus", "sigma")

    def __eq__(self, other):
        if not isinstance(other, AnchorKind):
            return NotImplemented
        if self.tag != "psi" or other.tag != "psi":
            return self.tag == other.tag
        return self is other

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return f"AnchorKind({self.tag})"


DeltaPlus = AnchorKind("delta_plus")
DeltaMinus = AnchorKind("delta_minus")
Sigma = AnchorKind("sigma")


def PsiQS(q: QPolynomial, s_tag: str = "one", e_class: ConstraintClass = ConstraintClass.O) -> AnchorKind:
    return AnchorKind("psi", q=q, s_tag=s_tag, e_class=e_class)


_NAMES = {
    "delta_plus": DeltaPlus, "delta+": DeltaPlus, "deltaplus": DeltaPlus,
    "delta_minus": DeltaMinus, "delta-": DeltaMinus, "deltaminus": DeltaMinus,
    "sigma": Sigma,
}


def parse_anchor(name: str) -> AnchorKind:
    try:
        return _NAMES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown anchor {name!r}; expected one of {sorted(set(_NAMES))}") from None


def _comm_k(x, k):
    return x @ k - k @ x


def _sign(kind: AnchorKind) -> int:
    return 1 if kind.tag == "delta_plus" else -1


def anchor(kind: AnchorKind, a, j, k, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Value of the anchor on the matrix ``a`` at the point ``K``."""
    a = np.asarray(a, dtype=float)
    j = np.asarray(j, dtype=float)
    k = np.asarray(k, dtype=float)
    if a.shape != k.shape:
        raise NotInDomain(f"section of shape {a.shape} at a point of shape {k.shape}")
    if kind.tag in ("delta_plus", "delta_minus"):
        s = j + _sign(kind) * k
        return _comm_k(s @ a + a.T @ s, k)
    if kind.tag == "sigma":
        s, t = j + k, j - k
        return _comm_k(s @ a @ t - t @ a.T @ s, k)
    if kind.tag == "psi":
        dom = twist_class(kind.e_class, kind.s_tag)
        if class_residual(a, dom, j, k) > tol.check_tol * max(1.0, np.linalg.norm(a)):
            raise NotInDomain(f"section is not in the {dom.name} fiber")
        f = kind.q.evaluate(j, k) @ s_matrix(kind.s_tag, j, k)
        return _comm_k(f @ a @ f, k)
    raise ValueError(f"unknown anchor {kind!r}")


def _domain_basis(kind: AnchorKind, j, k, tol):
    n = len(k)
    if kind.tag == "psi":
        return fiber_basis(twist_class(kind.e_class, kind.s_tag), j, k, tol)
    basis = []
    for r in range(n):
        for c in range(n):
            e = np.zeros((n, n))
            e[r, c] = 1.0
            basis.append(e)
    return basis


def anchor_image_basis(kind: AnchorKind, j, k, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Span of ``anchor(A)`` as ``A`` runs over a basis of the domain fiber."""
    vals = [anchor(kind, a, j, k, tol) for a in _domain_basis(kind, j, k, tol)]
    return Subspace.from_matrices(vals, ambient=len(k) ** 2, rank_tol=tol.rank_tol)


def _ker_im(m, rank_tol):
    ker = Subspace(null_space(m, rank_tol))
    return ker, ker.complement()


def image_description_basis(kind: AnchorKind, j, k, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """The image described by kernels: tangent ``B`` mapping ``Ker S`` into ``Im S``.

    ``S`` is ``J +- K`` for the delta anchors, both ``J + K`` and ``J - K``
    for sigma, and ``F = QS`` for psi (where ``B`` must also kill ``Ker F``).
    """
    n = len(k)
    cons = [skew(), anticommutes_with(k)]
    if kind.tag in ("delta_plus", "delta_minus"):
        mats = [j + _sign(kind) * k]
    elif kind.tag == "sigma":
        mats = [j + k, j - k]
    elif kind.tag == "psi":
        f = kind.q.evaluate(j, k) @ s_matrix(kind.s_tag, j, k)
        ker, im = _ker_im(f, tol.rank_tol)
        cons += [maps_into(ker, Subspace.zero(n)), maps_into(im, im)]
        mats = []
    else:
        raise ValueError(f"unknown anchor {kind!r}")
    for m in mats:
        ker, im = _ker_im(m, tol.rank_tol)
        cons.append(maps_into(ker, im))
    vals = constrained_matrix_space(n, cons, tol.rank_tol)
    return Subspace.from_matrices(vals, ambient=n * n, rank_tol=tol.rank_tol)


def image_matches_description(kind: AnchorKind, j, k, tol: Tolerances = DEFAULT_TOL) -> bool:
    rel = subspace_relate(anchor_image_basis(kind, j, k, tol),
                          image_description_basis(kind, j, k, tol), tol.rank_tol)
    return rel.equals


# ---------------------------------------------------------------------------
# brackets


def bracket(kind: AnchorKind, a, b, j, k) -> np.ndarray:
    """``[A, B]`` for the delta and sigma anchors at ``K``.

    ``a`` and ``b`` are sections (or constant matrices).  Derivative terms use
    the exact derivative of the section along the anchor direction, and the
    antisymmetrisation swaps A and B everywhere.
    """
    if not kind.has_bracket:
        raise ValueError(f"no bracket is defined for {kind!r}")
    a = _as_section(a)
    b = _as_section(b)
    j = np.asarray(j, dtype=float)
    k = np.asarray(k, dtype=float)
    try:
        av, bv = a.evaluate(j, k), b.evaluate(j, k)
        return _half(kind, a, av, bv, b, j, k) - _half(kind, b, bv, av, a, j, k)
    except EvaluationFailure:
        raise
    except Exception as exc:  # noqa: BLE001
        raise EvaluationFailure(str(exc)) from exc


def _half(kind, a, av, bv, b, j, k):
    va = anchor(kind, av, j, k)
    db = b.derivative(j, k, va)
    if kind.tag == "sigma":
        s, t = j + k, j - k
        return db + 0.5 * av @ s @ k @ s @ anticommutator(bv, j) - 0.5 * anticommutator(av, j) @ t @ k @ t @ bv
    sg = _sign(kind)
    # S = J + phi pairs with {A(J - phi), J}; S = J - phi with {A(J + phi), J}
    return db + 0.5 * j @ anticommutator(av @ (j - sg * k), j) @ bv - 0.5 * bv @ va @ k


# ---------------------------------------------------------------------------
# verification


def random_section(dim: int, rng: np.random.Generator, polynomial: bool = False) -> Section:
    """Unit-size random section of ``gl(V)``: constant, or polynomial in ``phi`` and ``f_1``."""
    def rnd():
        m = rng.standard_normal((dim, dim))
        return Const(m / np.linalg.norm(m))

    if not polynomial:
        return rnd()
    f1 = ScalarFn.f(1) * (1.0 / dim)
    return rnd() + rnd() @ PHI + f1 * rnd() + PHI @ rnd() @ JJ


@dataclass
class AxiomReport:
    axiom: str
    max_residual: float
    samples: int
    passed: bool | None
    values: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "max_residual": self.max_residual,
                "samples": self.samples, "pass": self.passed}


def _rel(diff, ref):
    return float(np.linalg.norm(diff)) / max(1.0, float(np.linalg.norm(ref)))


def _morphism_residual(kind, a, b, j, k, tol, step=None, richardson=True):
    lhs = anchor(kind, bracket(kind, a, b, j, k), j, k)
    lie = lie_bracket_fd(lambda kk: anchor(kind, a.evaluate(j, kk), j, kk),
                         lambda kk: anchor(kind, b.evaluate(j, kk), j, kk),
                         k, tol, step=step, richardson=richardson)
    return _rel(lhs - lie, lie)


def _leibniz_residual(kind, a, b, j, k):
    f = ScalarFn.f(1)
    lhs = bracket(kind, a, f * b, j, k)
    va = anchor(kind, a.evaluate(j, k), j, k)
    rhs = f.value(j, k) * bracket(kind, a, b, j, k) + f.derivative(j, k, va) * b.evaluate(j, k)
    return _rel(lhs - rhs, rhs)


def _jacobiator(kind, a, b, c, j, k, tol):
    def br(x, y):
        return Field(lambda jj, kk: bracket(kind, x, y, jj, kk), tol)

    terms = [bracket(kind, br(a, b), c, j, k), bracket(kind, br(b, c), a, j, k),
             bracket(kind, br(c, a), b, j, k)]
    return float(np.linalg.norm(sum(terms)))


def _samples(kind, n_sections, n_points, seed, dims):
    rng = np.random.default_rng(seed)
    for dim in dims:
        j = standard_structure(dim)
        for _ in range(n_points):
            k = random_point(dim, rng)
            for i in range(n_sections):
                poly = bool(i % 2)
                yield dim, j, k, random_section(dim, rng, poly), random_section(dim, rng, poly)


def verify_axioms(kind: AnchorKind, n_sections: int = 16, n_points: int = 8, seed=0,
                  dims=(4, 6), tol: Tolerances = DEFAULT_TOL, threshold: float = 1e-4,
                  jacobi_samples: int = 4) -> list[AxiomReport]:
    """Sample section pairs and points; report anchor-morphism, Leibniz and Jacobiator residuals.

    Sections alternate between constant and polynomial ones.  Morphism and
    Leibniz residuals are relative, ``|lhs - rhs| / max(1, |rhs|)``.  The
    Jacobiator is recorded for ``jacobi_samples`` triples per dimension without
    a verdict.
    """
    if not kind.has_bracket:
        raise ValueError("axioms are checked only for anchors with an explicit bracket")
    morph, leib = [], []
    for _, j, k, a, b in _samples(kind, n_sections, n_points, seed, dims):
        morph.append(_morphism_residual(kind, a, b, j, k, tol))
        leib.append(_leibniz_residual(kind, a, b, j, k))
    rng = np.random.default_rng(None if seed is None else [int(seed), 1])
    jac = []
    for dim in dims:
        j = standard_structure(dim)
        for i in range(jacobi_samples):
            k = random_point(dim, rng)
            a, b, c = (random_section(dim, rng, bool(i % 2)) for _ in range(3))
            jac.append(_jacobiator(kind, a, b, c, j, k, tol))
    m, l_ = max(morph, default=0.0), max(leib, default=0.0)
    return [
        AxiomReport("anchor_morphism", m, len(morph), m < threshold, morph),
        AxiomReport("leibniz", l_, len(leib), l_ < threshold, leib),
        AxiomReport("jacobiator", max(jac, default=0.0), len(jac), None, jac),
    ]


def order_check(kind: AnchorKind, steps=(1e-2, 1e-3), n_sections: int = 4, n_points: int = 2,
                seed=0, dims=(4, 6), tol: Tolerances = DEFAULT_TOL,
                floor: float = 1e-10) -> AxiomReport:
    """Check that the finite-difference part of the morphism residual is second order.

    Uses plain central differences (no extrapolation) at two step sizes in the
    truncation-dominated regime; the residual must drop by at least the
    step ratio, or already sit below ``floor`` at both steps.
    """
    ratios = []
    worst = 0.0
    for _, j, k, a, b in _samples(kind, n_sections, n_points, seed, dims):
        r1 = _morphism_residual(kind, a, b, j, k, tol, step=steps[0], richardson=False)
        r2 = _morphism_residual(kind, a, b, j, k, tol, step=steps[1], richardson=False)
        worst = max(worst, r2)
        if r1 < floor and r2 < floor:
            ratios.append(float("inf"))
        else:
            ratios.append(r1 / max(r2, 1e-300))
    need = steps[0] / steps[1]
    ok = all(r >= need for r in ratios)
    return AxiomReport("order_check", worst, len(ratios), ok, ratios)
