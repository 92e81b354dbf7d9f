"""The twistor space of orthogonal complex structures as a submanifold of matrices.

Points are plain ``(2n, 2n)`` arrays in canonical coordinates.  A tangent
vector at ``K`` is a skew matrix anticommuting with ``K``; it is realised as
the conjugation curve ``t -> exp(tX) K exp(-tX)`` with ``X = -BK/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .errors import TwistorError, DimensionMismatch, EvaluationFailure, InvalidStructure, NotTangent
from .linalg import (
    DEFAULT_TOL,
    MetricSpace,
    Tolerances,
    anticommutes_with,
    constrained_matrix_space,
    skew,
)

__all__ = [
    "standard_structure",
    "PointDiagnostics",
    "validate_point",
    "require_point",
    "random_orthogonal",
    "random_point",
    "tangent_residual",
    "require_tangent",
    "tangent_basis",
    "project_tangent",
    "i_tau",
    "Curve",
    "curve_from_tangent",
    "curve_from_generator",
    "fd_derivative",
    "lie_bracket_fd",
    "covariant_derivative",
]


def standard_structure(dim: int) -> np.ndarray:
    """Block-diagonal ``J0`` with ``J0 e_{2i} = e_{2i+1}``."""
    if dim % 2:
        raise DimensionMismatch("complex structures need even dimension")
    j = np.zeros((dim, dim))
    for i in range(0, dim, 2):
        j[i + 1, i] = 1.0
        j[i, i + 1] = -1.0
    return j


@dataclass(frozen=True)
class PointDiagnostics:
    square_residual: float
    skew_residual: float
    ok: bool


def validate_point(j, tol: Tolerances = DEFAULT_TOL, dim: int | None = None) -> PointDiagnostics:
    j = np.asarray(j, dtype=float)
    if j.ndim != 2 or j.shape[0] != j.shape[1] or (dim is not None and j.shape[0] != dim):
        raise DimensionMismatch(f"unexpected shape {j.shape}")
    sq = float(np.linalg.norm(j @ j + np.eye(len(j))))
    sk = float(np.linalg.norm(j + j.T))
    return PointDiagnostics(sq, sk, sq < tol.check_tol and sk < tol.check_tol)


def require_point(j, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    j = np.asarray(j, dtype=float)
    d = validate_point(j, tol)
    if not d.ok:
        raise InvalidStructure(
            f"not an orthogonal complex structure (|J^2+1|={d.square_residual:.2e}, "
            f"|J+J^T|={d.skew_residual:.2e})"
        )
    return j


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_point(space, seed=None) -> np.ndarray:
    """Seeded sample ``A J0 A^T`` with ``A`` from QR of a Gaussian matrix.

    ``space`` is a :class:`MetricSpace` or an even dimension; ``seed`` may be an
    integer or a ``numpy.random.Generator``.
    """
    dim = space.dim if isinstance(space, MetricSpace) else int(space)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    a = random_orthogonal(dim, rng)
    return a @ standard_structure(dim) @ a.T


def tangent_residual(k, b) -> float:
    b = np.asarray(b, dtype=float)
    return float(max(np.linalg.norm(b + b.T), np.linalg.norm(k @ b + b @ k)))


def require_tangent(k, b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if tangent_residual(k, b) > tol.check_tol * max(1.0, np.linalg.norm(b)):
        raise NotTangent(f"matrix is not tangent at K (residual {tangent_residual(k, b):.2e})")
    return b


def tangent_basis(k, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of ``{A skew : AK + KA = 0}``."""
    k = require_point(k, tol)
    return constrained_matrix_space(len(k), [skew(), anticommutes_with(k)], tol.rank_tol)


def project_tangent(k, m) -> np.ndarray:
    """Orthogonal (Frobenius) projection of an arbitrary matrix onto ``T_K``."""
    a = 0.5 * (m - m.T)
    return 0.5 * (a + k @ a @ k)


def i_tau(k, a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The almost complex structure of the twistor space: ``A -> K A``."""
    require_tangent(k, a, tol)
    return k @ a


class Curve:
    """``t -> exp(tX) K exp(-tX)`` for a skew generator ``X``."""

    def __init__(self, base, generator):
        self.base = np.asarray(base, dtype=float)
        self.generator = np.asarray(generator, dtype=float)

    def __call__(self, t: float) -> np.ndarray:
        e = expm(t * self.generator)
        return e @ self.base @ e.T

    def velocity(self) -> np.ndarray:
        return self.generator @ self.base - self.base @ self.generator


def curve_from_tangent(k, b, tol: Tolerances = DEFAULT_TOL) -> Curve:
    b = require_tangent(k, b, tol)
    return Curve(k, -0.5 * b @ k)


def curve_from_generator(k, x) -> Curve:
    """Curve through ``K`` generated by any skew ``X``; its velocity is ``[X, K]``."""
    return Curve(k, x)


def fd_derivative(field: Callable, k, b, tol: Tolerances = DEFAULT_TOL, *,
                  curve: Curve | None = None, step: float | None = None,
                  richardson: bool = True):
    """Directional derivative of ``field`` at ``K`` along the tangent ``b``.

    Central differences along the conjugation curve, with one Richardson step
    unless ``richardson`` is false.  The curve parameter step is
    ``step * sqrt(2n) / |b|`` so the displacement is relative to ``|K|``.
    A ``curve`` with velocity ``b`` may be supplied instead of the default one.
    """
    k = np.asarray(k, dtype=float)
    b = np.asarray(b, dtype=float)
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return 0.0 * np.asarray(field(k), dtype=float)
    c = curve if curve is not None else curve_from_tangent(k, b, tol)
    h = (tol.fd_step if step is None else step) * np.sqrt(len(k)) / nb

    def central(hh):
        try:
            hi, lo = field(c(hh)), field(c(-hh))
        except TwistorError:
            raise
        except Exception as exc:  # noqa: BLE001 - surface as a library error
            raise EvaluationFailure(f"field evaluation failed near K: {exc}") from exc
        return (np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)) / (2 * hh)

    d1 = central(h)
    if not richardson:
        return d1
    d2 = central(h / 2)
    return (4 * d2 - d1) / 3


def lie_bracket_fd(x: Callable, y: Callable, k, tol: Tolerances = DEFAULT_TOL, *,
                   curve_factory: Callable | None = None, step: float | None = None,
                   richardson: bool = True) -> np.ndarray:
    """``[X, Y](K) = dY_{X(K)} - dX_{Y(K)}`` for vector fields given as callables.

    ``curve_factory(K, v)`` may supply the curve used to differentiate along
    ``v``; by default the conjugation curve of :func:`curve_from_tangent`.
    """
    k = np.asarray(k, dtype=float)
    xv = np.asarray(x(k), dtype=float)
    yv = np.asarray(y(k), dtype=float)

    def deriv(field, v):
        c = curve_factory(k, v) if curve_factory is not None and np.linalg.norm(v) > 0 else None
        return fd_derivative(field, k, v, tol, curve=c, step=step, richardson=richardson)

    return deriv(y, xv) - deriv(x, yv)


def covariant_derivative(section, k, b, j=None, *, kind: str = "endo",
                         tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Covariant derivative for the connection ``d + (1/2)(d phi) phi``.

    ``section`` is either an expression with ``evaluate(J, K)`` and
    ``derivative(J, K, B)`` methods (exact route) or a callable ``K -> value``
    (finite differences).  ``kind="vector"`` treats values as V-valued,
    giving ``ds_B + BKs/2``; ``kind="endo"`` gives ``dA_B + [BK, A]/2``.
    """
    k = np.asarray(k, dtype=float)
    b = require_tangent(k, b, tol)
    if hasattr(section, "derivative") and hasattr(section, "evaluate"):
        if j is None:
            raise ValueError("expression sections need the fixed structure J")
        val = section.evaluate(j, k)
        dval = section.derivative(j, k, b)
    else:
        val = np.asarray(section(k), dtype=float)
        dval = fd_derivative(section, k, b, tol)
    bk = b @ k
    if kind == "vector":
        return dval + 0.5 * bk @ val
    if kind == "endo":
        return dval + 0.5 * (bk @ val - val @ bk)
    raise ValueError(f"unknown section kind {kind!r}")
