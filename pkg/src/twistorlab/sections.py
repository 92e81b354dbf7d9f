"""Sections of End(V) over the twistor space and their exact derivatives.

Expressions are small immutable trees evaluated at a pair ``(J, K)``: ``J`` is
the fixed structure and ``K`` the base point, where the tautological section
``phi`` takes the value ``K``.  Scalar coefficients are polynomials in the
symmetric functions ``f_j`` of the eigenvalues of ``{J, K}``.

>>> from twistorlab.twistor import standard_structure
>>> J = standard_structure(4)
>>> bool(abs((J_PLUS_PHI).evaluate(J, -J)).max() == 0)
True
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Mapping, Sequence

import numpy as np

from .bundles import ConstraintClass, fiber_basis, s_matrix, twist_class
from .errors import EvaluationFailure
from .linalg import DEFAULT_TOL, Tolerances, anticommutator
from .twistor import fd_derivative, random_point, require_tangent

__all__ = [
    "power_sums",
    "symmetric_functions",
    "symmetric_function_derivatives",
    "ScalarField",
    "ScalarFn",
    "TraceCoupling",
    "BlackBoxScalar",
    "Section",
    "Const",
    "Identity",
    "Phi",
    "FixedJ",
    "Sum",
    "Product",
    "Adjoint",
    "ScalarMul",
    "Field",
    "PHI",
    "JJ",
    "ONE",
    "J_PHI",
    "J_PLUS_PHI",
    "J_MINUS_PHI",
    "COMM_J_PHI",
    "s_expr",
    "QPolynomial",
    "eval_section",
    "eval_scalar",
    "exact_derivative",
    "check_coefficient_conditions",
    "CoefficientReport",
]


# ---------------------------------------------------------------------------
# symmetric functions of the spectrum of {J, K}


def _spectral(j, k):
    m = anticommutator(j, k)
    lam, u = np.linalg.eigh(0.5 * (m + m.T))
    return lam, u


def power_sums(j, k) -> np.ndarray:
    """``p_1 .. p_{2n}`` with ``p_k = tr({J,K}^k)``."""
    lam, _ = _spectral(j, k)
    return np.array([np.sum(lam ** i) for i in range(1, len(lam) + 1)])


def _newton(p):
    # k e_k = sum_{i=1}^{k} (-1)^{i-1} e_{k-i} p_i
    e = [1.0]
    for kk in range(1, len(p) + 1):
        e.append(sum((-1) ** (i - 1) * e[kk - i] * p[i - 1] for i in range(1, kk + 1)) / kk)
    return np.array(e)


def symmetric_functions(j, k) -> np.ndarray:
    """``(f_1, ..., f_{2n})``: elementary symmetric polynomials of the spectrum of ``{J,K}``.

    Computed from power sums through Newton's identities, so that
    ``det(x - {J,K}) = x^{2n} - f_1 x^{2n-1} + ... + f_{2n}``.
    """
    return _newton(power_sums(j, k))[1:]


def symmetric_function_derivatives(j, k, b) -> np.ndarray:
    """Directional derivatives ``d f_j`` along the tangent vector ``b``.

    Uses ``d p_k = k tr({J,K}^{k-1} {J,B})`` evaluated in the eigenbasis of
    ``{J,K}``, then differentiates Newton's identities.
    """
    lam, u = _spectral(j, k)
    dm = u.T @ anticommutator(j, b) @ u
    diag = np.diag(dm)
    n = len(lam)
    p = np.array([np.sum(lam ** i) for i in range(1, n + 1)])
    dp = np.array([i * np.sum(lam ** (i - 1) * diag) for i in range(1, n + 1)])
    e = _newton(p)
    de = [0.0]
    for kk in range(1, n + 1):
        acc = 0.0
        for i in range(1, kk + 1):
            acc += (-1) ** (i - 1) * (de[kk - i] * p[i - 1] + e[kk - i] * dp[i - 1])
        de.append(acc / kk)
    return np.array(de[1:])


# ---------------------------------------------------------------------------
# scalar coefficient fields


class ScalarField:
    """A smooth function on the twistor space (depending on the fixed J)."""

    def value(self, j, k) -> float:
        raise NotImplementedError

    def derivative(self, j, k, b) -> float:
        raise NotImplementedError

    def __mul__(self, other):
        if isinstance(other, Section):
            return ScalarMul(self, other)
        return NotImplemented


def _as_scalar_field(a) -> ScalarField:
    if isinstance(a, ScalarField):
        return a
    return ScalarFn.constant(float(a))


@dataclass(frozen=True)
class ScalarFn(ScalarField):
    """Polynomial in ``f_1, ..., f_{2n}``.

    ``terms`` is a tuple of ``(coefficient, ((j, power), ...))``.
    """

    terms: tuple = ()

    @classmethod
    def constant(cls, c: float) -> "ScalarFn":
        return cls(((float(c), ()),)) if c else cls(())

    @classmethod
    def f(cls, index: int) -> "ScalarFn":
        if index < 1:
            raise ValueError("symmetric functions are indexed from 1")
        return cls(((1.0, ((index, 1),)),))

    @classmethod
    def from_terms(cls, terms: Sequence) -> "ScalarFn":
        out = []
        for c, exps in terms:
            if isinstance(exps, Mapping):
                exps = exps.items()
            merged: dict[int, int] = {}
            for jj, pw in exps:
                if int(pw):
                    merged[int(jj)] = merged.get(int(jj), 0) + int(pw)
            out.append((float(c), tuple(sorted(merged.items()))))
        return cls(tuple(out))

    @property
    def max_index(self) -> int:
        return max((jj for _, exps in self.terms for jj, _ in exps), default=0)

    @property
    def is_constant(self) -> bool:
        return all(not exps for _, exps in self.terms)

    def _check_dim(self, dim):
        if self.max_index > dim:
            raise EvaluationFailure(f"f_{self.max_index} undefined in dimension {dim}")

    def value(self, j, k) -> float:
        if self.is_constant:
            return float(sum(c for c, _ in self.terms))
        self._check_dim(len(j))
        f = symmetric_functions(j, k)
        return float(sum(c * np.prod([f[jj - 1] ** pw for jj, pw in exps]) for c, exps in self.terms))

    def derivative(self, j, k, b) -> float:
        if self.is_constant:
            return 0.0
        self._check_dim(len(j))
        f = symmetric_functions(j, k)
        df = symmetric_function_derivatives(j, k, b)
        total = 0.0
        for c, exps in self.terms:
            for idx, (jj, pw) in enumerate(exps):
                rest = np.prod([f[j2 - 1] ** p2 for i2, (j2, p2) in enumerate(exps) if i2 != idx])
                total += c * pw * f[jj - 1] ** (pw - 1) * df[jj - 1] * rest
        return float(total)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = ScalarFn.constant(other)
        if not isinstance(other, ScalarFn):
            return NotImplemented
        return ScalarFn(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return ScalarFn(tuple((-c, e) for c, e in self.terms))

    def __sub__(self, other):
        return self + (-other if isinstance(other, ScalarFn) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Section):
            return ScalarMul(self, other)
        if isinstance(other, (int, float)):
            return ScalarFn(tuple((c * other, e) for c, e in self.terms))
        if isinstance(other, ScalarFn):
            terms = []
            for c1, e1 in self.terms:
                for c2, e2 in other.terms:
                    terms.append((c1 * c2, tuple(e1) + tuple(e2)))
            return ScalarFn.from_terms(terms)
        return NotImplemented

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"terms": [{"c": c, "exp": {str(jj): pw for jj, pw in exps}} for c, exps in self.terms]}

    @classmethod
    def from_json(cls, obj) -> "ScalarFn":
        if isinstance(obj, (int, float)):
            return cls.constant(obj)
        terms = []
        for t in obj["terms"]:
            exp = t.get("exp", {})
            if isinstance(exp, Mapping):
                pairs = [(int(a), int(b)) for a, b in exp.items()]
            elif exp and all(isinstance(x, (list, tuple)) for x in exp):
                pairs = [(int(a), int(b)) for a, b in exp]
            else:
                # dense exponent vector, position i <-> f_{i+1}
                pairs = [(i + 1, int(p)) for i, p in enumerate(exp)]
            terms.append((float(t["c"]), pairs))
        return cls.from_terms(terms)


@dataclass(frozen=True, eq=False)
class TraceCoupling(ScalarField):
    """``K -> tr(M K)`` for a fixed matrix ``M``; not U(J)-invariant in general."""

    m: np.ndarray

    def value(self, j, k) -> float:
        return float(np.trace(self.m @ k))

    def derivative(self, j, k, b) -> float:
        return float(np.trace(self.m @ b))


class BlackBoxScalar(ScalarField):
    """Arbitrary smooth ``fn(J, K) -> float``, differentiated by finite differences."""

    def __init__(self, fn: Callable, tol: Tolerances = DEFAULT_TOL):
        self.fn = fn
        self.tol = tol

    def value(self, j, k) -> float:
        return float(self.fn(j, k))

    def derivative(self, j, k, b) -> float:
        return float(fd_derivative(lambda kk: self.fn(j, kk), k, b, self.tol))


# ---------------------------------------------------------------------------
# matrix-valued sections


class Section:
    """Base class for expression nodes."""

    # let ``ndarray @ section`` and ``ndarray + section`` reach the reflected operators
    __array_ufunc__ = None

    def evaluate(self, j, k) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, j, k, b) -> np.ndarray:
        raise NotImplementedError

    def __add__(self, other):
        other = _as_section(other)
        return Sum((self, other))

    def __radd__(self, other):
        return _as_section(other) + self

    def __neg__(self):
        return ScalarMul(ScalarFn.constant(-1.0), self)

    def __sub__(self, other):
        return self + (-_as_section(other))

    def __rsub__(self, other):
        return _as_section(other) + (-self)

    def __matmul__(self, other):
        return Product((self, _as_section(other)))

    def __rmatmul__(self, other):
        return Product((_as_section(other), self))

    def __mul__(self, other):
        if isinstance(other, (int, float, ScalarField)):
            return ScalarMul(_as_scalar_field(other), self)
        return NotImplemented

    __rmul__ = __mul__

    @property
    def T(self):
        return Adjoint(self)


def _as_section(x) -> Section:
    if isinstance(x, Section):
        return x
    if isinstance(x, (int, float)):
        return ScalarMul(ScalarFn.constant(float(x)), Identity())
    return Const(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class Const(Section):
    m: np.ndarray

    def evaluate(self, j, k):
        return np.asarray(self.m, dtype=float)

    def derivative(self, j, k, b):
        return np.zeros_like(k)


class Identity(Section):
    def evaluate(self, j, k):
        return np.eye(len(k))

    def derivative(self, j, k, b):
        return np.zeros_like(k)


class Phi(Section):
    """Tautological section: its value at ``K`` is ``K``."""

    def evaluate(self, j, k):
        return np.asarray(k, dtype=float)

    def derivative(self, j, k, b):
        return np.asarray(b, dtype=float)


class FixedJ(Section):
    def evaluate(self, j, k):
        return np.asarray(j, dtype=float)

    def derivative(self, j, k, b):
        return np.zeros_like(k)


@dataclass(frozen=True)
class Sum(Section):
    terms: tuple

    def evaluate(self, j, k):
        return reduce(np.add, (t.evaluate(j, k) for t in self.terms))

    def derivative(self, j, k, b):
        return reduce(np.add, (t.derivative(j, k, b) for t in self.terms))


@dataclass(frozen=True)
class Product(Section):
    factors: tuple

    def evaluate(self, j, k):
        return reduce(np.matmul, (f.evaluate(j, k) for f in self.factors))

    def derivative(self, j, k, b):
        vals = [f.evaluate(j, k) for f in self.factors]
        total = np.zeros_like(np.asarray(k, dtype=float))
        for i, f in enumerate(self.factors):
            parts = vals[:i] + [f.derivative(j, k, b)] + vals[i + 1:]
            total = total + reduce(np.matmul, parts)
        return total


@dataclass(frozen=True)
class Adjoint(Section):
    inner: Section

    def evaluate(self, j, k):
        return self.inner.evaluate(j, k).T

    def derivative(self, j, k, b):
        return self.inner.derivative(j, k, b).T


@dataclass(frozen=True)
class ScalarMul(Section):
    scalar: ScalarField
    inner: Section

    def evaluate(self, j, k):
        return self.scalar.value(j, k) * self.inner.evaluate(j, k)

    def derivative(self, j, k, b):
        return (self.scalar.derivative(j, k, b) * self.inner.evaluate(j, k)
                + self.scalar.value(j, k) * self.inner.derivative(j, k, b))


class Field(Section):
    """Black-box section ``fn(J, K) -> matrix`` with a finite-difference derivative."""

    def __init__(self, fn: Callable, tol: Tolerances = DEFAULT_TOL):
        self.fn = fn
        self.tol = tol

    def evaluate(self, j, k):
        return np.asarray(self.fn(j, k), dtype=float)

    def derivative(self, j, k, b):
        return fd_derivative(lambda kk: self.fn(j, kk), k, b, self.tol)


PHI = Phi()
JJ = FixedJ()
ONE = Identity()
J_PHI = JJ @ PHI + PHI @ JJ
J_PLUS_PHI = JJ + PHI
J_MINUS_PHI = JJ - PHI
COMM_J_PHI = JJ @ PHI - PHI @ JJ

_S_EXPR = {"one": ONE, "jplus": J_PLUS_PHI, "jminus": J_MINUS_PHI, "comm": COMM_J_PHI}


def s_expr(tag: str) -> Section:
    try:
        return _S_EXPR[tag]
    except KeyError:
        raise ValueError(f"unknown S tag {tag!r}") from None


def eval_section(expr: Section, j, k) -> np.ndarray:
    try:
        return expr.evaluate(j, k)
    except EvaluationFailure:
        raise
    except Exception as exc:  # noqa: BLE001
        raise EvaluationFailure(str(exc)) from exc


def eval_scalar(a: ScalarField, j, k) -> float:
    return _as_scalar_field(a).value(j, k)


def exact_derivative(expr: Section, j, k, b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    b = require_tangent(k, b, tol)
    return expr.derivative(j, k, b)


# ---------------------------------------------------------------------------
# polynomials in {J, phi}


class QPolynomial:
    """``Q = a_0 1 + a_1 {J,phi} + ... + a_k {J,phi}^k`` with scalar-field coefficients."""

    def __init__(self, coeffs: Sequence):
        if not coeffs:
            coeffs = [1.0]
        self.coeffs = tuple(_as_scalar_field(a) for a in coeffs)

    @classmethod
    def from_roots(cls, roots: Sequence) -> "QPolynomial":
        """``prod (x - r)`` in ``x = {J,phi}``; roots may be numbers or ScalarFn."""
        poly: list = [ScalarFn.constant(1.0)]
        for r in roots:
            r = r if isinstance(r, ScalarFn) else ScalarFn.constant(float(r))
            new = [ScalarFn.constant(0.0) for _ in range(len(poly) + 1)]
            for i, c in enumerate(poly):
                new[i + 1] = new[i + 1] + c
                new[i] = new[i] + (-1.0) * (r * c)
            poly = new
        return cls(poly)

    def expr(self) -> Section:
        terms = [self.coeffs[0] * ONE]
        power: Section = ONE
        for a in self.coeffs[1:]:
            power = J_PHI if power is ONE else Product((power, J_PHI))
            terms.append(a * power)
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def evaluate(self, j, k) -> np.ndarray:
        m = anticommutator(j, k)
        out = np.zeros_like(m)
        power = np.eye(len(m))
        for a in self.coeffs:
            out = out + a.value(j, k) * power
            power = power @ m
        return out

    def derivative(self, j, k, b) -> np.ndarray:
        return self.expr().derivative(j, k, b)

    @property
    def scalar_coefficients(self) -> tuple:
        return self.coeffs

    def hypothesis_residuals(self, j, k) -> dict:
        q = self.evaluate(j, k)
        scale = max(1.0, float(np.linalg.norm(q)))
        return {
            "symmetric": float(np.linalg.norm(q - q.T)) / scale,
            "commutes_j": float(np.linalg.norm(q @ j - j @ q)) / scale,
            "commutes_phi": float(np.linalg.norm(q @ k - k @ q)) / scale,
        }

    def to_json(self) -> dict:
        out = []
        for a in self.coeffs:
            if not isinstance(a, ScalarFn):
                raise TypeError("only polynomial coefficients are serialisable")
            out.append(a.to_json())
        return {"coeffs": out}

    @classmethod
    def from_json(cls, obj) -> "QPolynomial":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls([ScalarFn.from_json(c) for c in obj["coeffs"]])


# ---------------------------------------------------------------------------
# differential conditions on the coefficients


@dataclass(frozen=True)
class CoefficientReport:
    scalar_residual: float
    operator_residual: float
    samples: int
    passed: bool

    def to_json(self) -> dict:
        return {
            "axiom": "coefficient_conditions",
            "scalar_residual": self.scalar_residual,
            "operator_residual": self.operator_residual,
            "samples": self.samples,
            "pass": self.passed,
        }


def check_coefficient_conditions(q: QPolynomial, s_tag: str, e_class: ConstraintClass, j,
                                 n_samples: int = 8, seed=0,
                                 tol: Tolerances = DEFAULT_TOL) -> CoefficientReport:
    """Sample ``C`` in ``E^S`` and test the conditions that make ``psi`` an anchor.

    Scalar: ``d a_i`` along ``[SCS, phi]`` vanishes.  Operator:
    ``dQ_{[FCF,phi]} = Q (dQ_{[SCS,phi]}) Q`` with ``F = QS``.  Residuals are
    relative to the size of the quantities compared.
    """
    rng = np.random.default_rng(seed)
    j = np.asarray(j, dtype=float)
    twisted = twist_class(e_class, s_tag)
    scal, oper = 0.0, 0.0
    for _ in range(n_samples):
        k = random_point(len(j), rng)
        basis = fiber_basis(twisted, j, k, tol)
        if not basis:
            continue
        c = sum(rng.standard_normal() * bb for bb in basis)
        c = c / np.linalg.norm(c)
        s = s_matrix(s_tag, j, k)
        qv = q.evaluate(j, k)
        f = qv @ s
        v_s = s @ c @ s @ k - k @ s @ c @ s
        v_f = f @ c @ f @ k - k @ f @ c @ f
        # directions of round-off size carry no information, so scale by max(1, |v|)
        for a in q.coeffs:
            scal = max(scal, abs(a.derivative(j, k, v_s)) / max(1.0, float(np.linalg.norm(v_s))))
        dq_f = q.derivative(j, k, v_f)
        dq_s = q.derivative(j, k, v_s)
        rhs = qv @ dq_s @ qv
        scale = 1.0 + float(np.linalg.norm(rhs)) + float(np.linalg.norm(dq_f))
        oper = max(oper, float(np.linalg.norm(dq_f - rhs)) / scale)
    return CoefficientReport(float(scal), float(oper), n_samples,
                             bool(scal < tol.check_tol and oper < tol.check_tol))
