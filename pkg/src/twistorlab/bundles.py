"""Sub-bundles of o(V, g) over the twistor space and the twist ``E -> E^S``.

A constraint class is cut out of the skew matrices by one relation
``gamma A = A delta`` with ``gamma`` one of ``J, phi`` and ``delta = +-gamma``.
Conjugating through ``S`` moves ``gamma, delta`` to ``gamma~, delta~`` with
``gamma S = S gamma~`` and ``S delta = delta~ S``.
"""

from __future__ import annotations

import enum

import numpy as np

from .linalg import DEFAULT_TOL, Tolerances, commutator, constrained_matrix_space, intertwines, skew

__all__ = [
    "S_TAGS",
    "ConstraintClass",
    "s_matrix",
    "tilde",
    "twist_class",
    "class_relation",
    "fiber_basis",
    "class_residual",
    "sandwich_check",
]

S_TAGS = ("one", "jplus", "jminus", "comm")


class ConstraintClass(enum.Enum):
    O = "o"
    OAntiJ = "o_J"
    OAntiPhi = "o_phi"
    UJ = "u_J"
    UPhi = "u_phi"


# (symbol, sign of delta relative to gamma)
_RELATION = {
    ConstraintClass.UJ: ("J", 1),
    ConstraintClass.OAntiJ: ("J", -1),
    ConstraintClass.UPhi: ("phi", 1),
    ConstraintClass.OAntiPhi: ("phi", -1),
}


def s_matrix(tag: str, j, k) -> np.ndarray:
    """Value of ``S`` at ``K``: ``1``, ``J+K``, ``J-K`` or ``[J,K]``."""
    if tag == "one":
        return np.eye(len(j))
    if tag == "jplus":
        return j + k
    if tag == "jminus":
        return j - k
    if tag == "comm":
        return commutator(j, k)
    raise ValueError(f"unknown S tag {tag!r}; expected one of {S_TAGS}")


# gamma S = S gamma~  (and equally S gamma = gamma~ S) for gamma in {J, phi}:
#   J(J+phi) = (J+phi)phi,   phi(J+phi) = (J+phi)J
#   J(J-phi) = -(J-phi)phi,  phi(J-phi) = -(J-phi)J
#   J[J,phi] = -[J,phi]J,    phi[J,phi] = -[J,phi]phi
_TILDE = {
    "one": {"J": (1, "J"), "phi": (1, "phi")},
    "jplus": {"J": (1, "phi"), "phi": (1, "J")},
    "jminus": {"J": (-1, "phi"), "phi": (-1, "J")},
    "comm": {"J": (-1, "J"), "phi": (-1, "phi")},
}


def tilde(sign: int, symbol: str, s_tag: str) -> tuple[int, str]:
    """The unique ``gamma~`` in ``{+-J, +-phi}`` paired with ``sign*symbol`` by ``S``."""
    t_sign, t_sym = _TILDE[s_tag][symbol]
    return sign * t_sign, t_sym


def class_relation(e: ConstraintClass):
    """``((sign, symbol), (sign, symbol))`` for gamma and delta, or None for O."""
    if e is ConstraintClass.O:
        return None
    sym, rel = _RELATION[e]
    return (1, sym), (rel, sym)


def twist_class(e: ConstraintClass, s_tag: str) -> ConstraintClass:
    if s_tag not in S_TAGS:
        raise ValueError(f"unknown S tag {s_tag!r}")
    if e is ConstraintClass.O:
        return e
    (gs, gsym), (ds, dsym) = class_relation(e)
    gs2, gsym2 = tilde(gs, gsym, s_tag)
    ds2, dsym2 = tilde(ds, dsym, s_tag)
    assert gsym2 == dsym2
    rel = gs2 * ds2
    for cls, (sym, r) in _RELATION.items():
        if sym == gsym2 and r == rel:
            return cls
    raise AssertionError("unreachable")


def _sym(symbol, j, k):
    return j if symbol == "J" else k


def fiber_basis(e: ConstraintClass, j, k, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of the fiber of ``e`` at ``K``."""
    cons = [skew()]
    rel = class_relation(e)
    if rel is not None:
        (gs, gsym), (ds, dsym) = rel
        cons.append(intertwines(gs * _sym(gsym, j, k), ds * _sym(dsym, j, k)))
    return constrained_matrix_space(len(j), cons, tol.rank_tol)


def class_residual(b, e: ConstraintClass, j, k) -> float:
    """How far ``b`` is from the fiber of ``e`` at ``K``."""
    b = np.asarray(b, dtype=float)
    res = float(np.linalg.norm(b + b.T))
    rel = class_relation(e)
    if rel is not None:
        (gs, gsym), (ds, dsym) = rel
        g, d = gs * _sym(gsym, j, k), ds * _sym(dsym, j, k)
        res = max(res, float(np.linalg.norm(g @ b - b @ d)))
    return res


def sandwich_check(b, e: ConstraintClass, s_tag: str, j, k) -> float:
    """Relative residual of ``S B S`` against the defining relations of ``e``.

    For ``B`` in the fiber of ``E^S`` the result is at round-off level.
    """
    s = s_matrix(s_tag, j, k)
    sbs = s @ b @ s
    scale = max(1.0, float(np.linalg.norm(s, 2)) ** 2 * float(np.linalg.norm(b)))
    return class_residual(sbs, e, j, k) / scale
