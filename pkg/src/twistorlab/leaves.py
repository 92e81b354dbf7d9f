"""Leaf models, U(J)-orbit types and the two worked reproductions.

The orbit of ``K`` under ``U(J)`` is ``U(n) / Sp(k_1) x ... x Sp(k_l) x U(m_1) x U(m_-1)``
where ``dim V_eps_i = 4 k_i`` and ``dim Ker(J +- K) = 2 m_{+-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, distribution_basis, image_split
from .errors import SubspaceMismatch, UnknownCase
from .linalg import DEFAULT_TOL, Subspace, Tolerances, null_space, subspace_relate
from .pairs import decompose_pair, synthesize_partner
from .sections import QPolynomial, ScalarFn
from .twistor import require_point, standard_structure

__all__ = [
    "LeafClass",
    "classify_orbit",
    "orbit_equivalent",
    "LeafReport",
    "leaf_report",
    "restrict",
    "splice",
    "membership",
    "s2_frame",
    "s2_case",
    "repro_s2",
    "S2Report",
    "DIM12_CASES",
    "dim12_spectrum",
    "repro_dim12",
    "Dim12Report",
]


@dataclass(frozen=True)
class LeafClass:
    n: int
    sp_factors: tuple = ()
    m1: int = 0
    m_minus1: int = 0

    def __post_init__(self):
        if 2 * sum(self.sp_factors) + self.m1 + self.m_minus1 != self.n:
            raise ValueError("factor sizes do not add up to n")

    @property
    def dimension(self) -> int:
        return (self.n ** 2 - sum(k * (2 * k + 1) for k in self.sp_factors)
                - self.m1 ** 2 - self.m_minus1 ** 2)

    @property
    def model(self) -> str:
        if self.n == 0:
            return "point"
        parts = [f"Sp({k})" for k in self.sp_factors]
        parts += [f"U({m})" for m in (self.m1, self.m_minus1) if m]
        return f"U({self.n})/" + " x ".join(parts) if parts else f"U({self.n})"

    def to_json(self) -> dict:
        return {"n": self.n, "sp_factors": list(self.sp_factors), "m1": self.m1,
                "m_minus1": self.m_minus1, "dimension": self.dimension, "model": self.model}


def classify_orbit(j, k, tol: Tolerances = DEFAULT_TOL) -> LeafClass:
    d = decompose_pair(j, k, tol)
    return LeafClass(d.dim // 2, tuple(sorted(d.ks)), d.m1, d.m_minus1)


def orbit_equivalent(j, k, l, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Same spectrum of ``{J,K}`` and ``{J,L}``, with multiplicities."""
    a = decompose_pair(j, k, tol).spectrum()
    b = decompose_pair(j, l, tol).spectrum()
    if len(a) != len(b):
        return False
    return all(ma == mb and abs(ea - eb) <= max(tol.cluster_tol, tol.check_tol)
               for (ea, ma), (eb, mb) in zip(a, b))


def restrict(m, sub: Subspace) -> np.ndarray:
    """Matrix of ``m`` on an invariant subspace, in the subspace's basis."""
    return sub.basis.T @ np.asarray(m, dtype=float) @ sub.basis


@dataclass
class LeafReport:
    spec: DistributionSpec
    base: np.ndarray
    ker_dim: int
    im_dim: int
    model: str
    dim: int
    distribution_dim: int
    im_basis: Subspace = field(repr=False)
    orbit: LeafClass | None = None

    @property
    def consistent(self) -> bool:
        return self.dim == self.distribution_dim

    def to_json(self) -> dict:
        out = {"flavor": self.spec.flavor, "S": self.spec.s_tag, "ker_dim": self.ker_dim,
               "im_dim": self.im_dim, "model": self.model, "dim": self.dim,
               "distribution_dim": self.distribution_dim, "consistent": self.consistent}
        if self.orbit is not None:
            out["orbit"] = self.orbit.to_json()
        return out


def leaf_report(spec: DistributionSpec, k, tol: Tolerances = DEFAULT_TOL) -> LeafReport:
    """Model of the leaf through ``K``.

    Plain flavor: the twistor space of ``Im F``, ``O(2r)/U(r)`` of dimension
    ``r(r-1)``.  Unitary flavor: the ``U(J^b)`` orbit of ``K^b`` on ``Im F``.
    """
    k = require_point(k, tol)
    ker, im = image_split(spec, k, tol)
    ddim = len(distribution_basis(spec, k, tol))
    orbit = None
    if spec.flavor == "plain":
        r = im.rank // 2
        dim = r * (r - 1)
        model = f"O({2 * r})/U({r})" if r else "point"
    elif im.rank == 0:
        orbit = LeafClass(0)
        dim, model = 0, "point"
    else:
        orbit = classify_orbit(restrict(spec.j, im), restrict(k, im), tol)
        dim, model = orbit.dimension, orbit.model
    return LeafReport(spec, k, ker.rank, im.rank, model, dim, ddim, im, orbit)


def splice(k, lb, spec: DistributionSpec, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``K^a + L^b``: keep ``K`` on ``Ker F`` and put ``L^b`` (in ``Im F`` coordinates) on ``Im F``."""
    k = require_point(k, tol)
    ker, im = image_split(spec, k, tol)
    lb = np.asarray(lb, dtype=float)
    if lb.shape != (im.rank, im.rank):
        raise SubspaceMismatch(f"L^b has shape {lb.shape}, Im F has dimension {im.rank}")
    if im.rank:
        require_point(lb, tol)
    p = ker.projector
    out = p @ k @ p + im.basis @ lb @ im.basis.T
    return require_point(out, tol)


def _kernel(m, tol):
    return Subspace(null_space(m, tol.rank_tol))


def _s_only(spec: DistributionSpec) -> bool:
    q = spec.q
    return (spec.s_tag != "one" and len(q.coeffs) == 1 and isinstance(q.coeffs[0], ScalarFn)
            and q.coeffs[0].is_constant and q.coeffs[0].value(None, None) != 0)


def membership(kprime, k, spec: DistributionSpec, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether ``K'`` lies in the leaf model through ``K``.

    Constant-``Q`` specs with ``S = J +- phi`` or ``[J, phi]`` compare
    ``Ker(J +- K')`` with ``Ker(J +- K)`` directly.  Otherwise ``Im F`` must
    agree at both points, ``K'`` must equal ``K`` on ``Ker F``, and for the
    unitary flavor the two restrictions to ``Im F`` must share a ``U(J^b)`` orbit.
    """
    k = require_point(k, tol)
    kprime = require_point(kprime, tol)
    j = spec.j
    if _s_only(spec):
        signs = {"jplus": (1,), "jminus": (-1,), "comm": (1, -1)}[spec.s_tag]
        return all(subspace_relate(_kernel(j + s * k, tol), _kernel(j + s * kprime, tol),
                                   tol.rank_tol).equals for s in signs)
    ker, im = image_split(spec, k, tol)
    _, im2 = image_split(spec, kprime, tol)
    if not subspace_relate(im, im2, tol.rank_tol).equals:
        return False
    if np.linalg.norm((kprime - k) @ ker.projector) > tol.check_tol:
        return False
    if spec.flavor == "unitary" and im.rank:
        jb = restrict(j, im)
        return orbit_equivalent(jb, restrict(k, im), restrict(kprime, im), tol)
    return True


# ---------------------------------------------------------------------------
# four-dimensional example: Q = {J,phi}({J,phi} - 2 e0)


def s2_frame():
    """``(J, I, L)`` on R^4 with ``{I, J} = 0`` and ``L = I J``."""
    j = standard_structure(4)
    i = np.zeros((4, 4))
    i[2, 0], i[0, 2], i[3, 1], i[1, 3] = 1.0, -1.0, -1.0, 1.0
    return j, i, i @ j


def s2_case(b: float, e0: float, atol: float = 1e-9) -> str:
    """Case label of ``K = aI + bJ + cL`` by the value of ``b``."""
    if abs(b) <= atol:
        return "1"
    if abs(b + e0) <= atol:
        return "2"
    if b > 0:
        return "3a"
    if b > -e0:
        return "3b"
    return "3c"


@dataclass
class S2Report:
    e0: float
    rows: list
    consistent: bool

    def to_json(self) -> list:
        return [{"point": r["point"], "leaf_dim": r["leaf_dim"], "case": r["case"]} for r in self.rows]


def _latitudes(grid_size, e0):
    lats = set(np.round(np.linspace(-1.0, 1.0, grid_size), 12).tolist()) | {0.0, -e0}
    return sorted(lats)


def repro_s2(e0: float, grid_size: int = 16, n_lon: int = 4,
             tol: Tolerances = DEFAULT_TOL) -> S2Report:
    """Sweep ``K = aI + bJ + cL`` over a latitude/longitude grid on the sphere.

    The grid has ``grid_size`` equally spaced latitudes ``b`` plus ``b = 0`` and
    ``b = -e0``, with ``n_lon`` longitudes each (one at the poles).  The leaf
    dimension is the rank of the plain distribution for ``S = 1``.  The case
    label is read off ``b`` recovered from the spectrum (``{J,K} = -2b``) and
    cross-checked against the grid value and the expected dimension.
    """
    if not 0.0 < e0 < 1.0:
        raise ValueError("e0 must lie in (0, 1)")
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    j, i, l = s2_frame()
    spec = DistributionSpec(j, QPolynomial.from_roots([0.0, 2.0 * e0]), "one", "plain")
    rows, ok = [], True
    for b in _latitudes(grid_size, e0):
        rad = np.sqrt(max(0.0, 1.0 - b * b))
        lons = [0.0] if rad < 1e-12 else [2 * np.pi * t / n_lon for t in range(n_lon)]
        for th in lons:
            a, c = rad * np.cos(th), rad * np.sin(th)
            k = a * i + b * j + c * l
            dim = len(distribution_basis(spec, k, tol))
            b_rec = -float(np.trace(j @ k + k @ j)) / 8.0
            case = s2_case(b_rec, e0)
            expected = 0 if case in ("1", "2") else 2
            if case != s2_case(b, e0) or dim != expected:
                ok = False
            rows.append({"point": [round(float(a), 12), round(float(b), 12), round(float(c), 12)],
                         "leaf_dim": dim, "case": case})
    return S2Report(e0, rows, ok)


# ---------------------------------------------------------------------------
# twelve-dimensional example: Q = {J,phi} - tr{J,phi}/4


DIM12_CASES = {
    # case: (expected model, expected dimension)
    "1a.i": ("U(4)/U(2) x U(2)", 8),
    "1a.ii": ("U(4)/Sp(2)", 6),
    "1a.iii": ("U(4)/Sp(1) x Sp(1)", 10),
    "1b": ("point", 0),
    "1c.i": ("U(2)/U(2)", 0),
    "1c.ii": ("U(2)/Sp(1)", 1),
    "2": (None, None),
}


def dim12_spectrum(case_id: str, a: float = 0.3, b: float = 0.6,
                   triple=(0.3, 0.5, -0.1)) -> dict:
    """``{eps: real multiplicity}`` of ``{J,K}/2`` for a case of the example."""
    table = {
        "1a.i": {a: 4, 1.0: 4, -1.0: 4},
        "1a.ii": {a: 4, 0.0: 8},
        "1a.iii": {a: 4, b: 4, -b: 4},
        "1b": {0.0: 12},
        "1c.i": {1.0: 8, -1.0: 4},
        "1c.ii": {a: 8, -a: 4},
    }
    if case_id == "2":
        out: dict = {}
        for x in triple:
            out[x] = out.get(x, 0) + 4
        return out
    try:
        return table[case_id]
    except KeyError:
        raise UnknownCase(f"unknown case {case_id!r}; expected one of {sorted(DIM12_CASES)}") from None


def dim12_q() -> QPolynomial:
    return QPolynomial([ScalarFn.f(1) * -0.25, 1.0])


@dataclass
class Dim12Report:
    case: str
    spectrum: dict
    report: LeafReport
    expected_model: str
    expected_dim: int

    @property
    def passed(self) -> bool:
        r = self.report
        return r.consistent and r.model == self.expected_model and r.dim == self.expected_dim

    def to_json(self) -> dict:
        return {"case": self.case,
                "spectrum": [{"eps": e, "mult": m} for e, m in sorted(self.spectrum.items())],
                "leaf": self.report.to_json(), "expected_model": self.expected_model,
                "expected_dim": self.expected_dim, "pass": self.passed}


def repro_dim12(case_id: str, a: float = 0.3, b: float = 0.6, triple=(0.3, 0.5, -0.1),
                tol: Tolerances = DEFAULT_TOL) -> Dim12Report:
    """Synthesize the case's spectrum in dimension 12 and report the unitary leaf."""
    if case_id not in DIM12_CASES:
        raise UnknownCase(f"unknown case {case_id!r}; expected one of {sorted(DIM12_CASES)}")
    spectrum = dim12_spectrum(case_id, a, b, triple)
    j = standard_structure(12)
    k = synthesize_partner(j, spectrum, tol)
    spec = DistributionSpec(j, dim12_q(), "one", "unitary")
    rep = leaf_report(spec, k, tol)
    model, dim = DIM12_CASES[case_id]
    if case_id == "2":
        full = classify_orbit(j, k, tol)
        model, dim = full.model, full.dimension
    return Dim12Report(case_id, spectrum, rep, model, dim)
