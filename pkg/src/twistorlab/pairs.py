"""Structure attached to a pair of complex structures ``(J, K)``.

The symmetric matrix ``{J, K}`` has spectrum in ``[-2, 2]``.  Its eigenspace
for ``2`` is ``Ker(J+K)``, for ``-2`` it is ``Ker(J-K)``, and every other
eigenspace ``V_eps`` (eigenvalue ``2 eps``) is a quaternionic module of rank
divisible by four.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import BlockFailure, DegenerateCluster, InfeasibleSpec, InvalidStructure
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    anticommutator,
    clustered_sym_eig,
    commutator,
    null_space,
    orientation_sign,
    subspace_relate,
)
from .twistor import require_point, standard_structure

__all__ = [
    "PairDecomposition",
    "QuaternionicRefinement",
    "SchubertSignature",
    "decompose_pair",
    "decomposition_residuals",
    "refine_blocks",
    "derived_kprime",
    "kprime_residuals",
    "same_orientation",
    "schubert_signature",
    "schubert_nonempty",
    "adapted_basis",
    "normalize_spec",
    "synthesize_partner",
    "spec_to_json",
    "spec_from_json",
]


@dataclass(frozen=True)
class PairDecomposition:
    middle: list[tuple[float, Subspace]]
    plus_one: Subspace
    minus_one: Subspace

    @property
    def dim(self) -> int:
        return self.plus_one.ambient_dim

    @property
    def m1(self) -> int:
        return self.plus_one.rank // 2

    @property
    def m_minus1(self) -> int:
        return self.minus_one.rank // 2

    @property
    def ks(self) -> list[int]:
        return [sub.rank // 4 for _, sub in self.middle]

    def spectrum(self) -> list[tuple[float, int]]:
        """``(eps, multiplicity)`` pairs, with ``+-1`` included when present."""
        out = [(eps, sub.rank) for eps, sub in self.middle]
        if self.plus_one.rank:
            out.append((1.0, self.plus_one.rank))
        if self.minus_one.rank:
            out.append((-1.0, self.minus_one.rank))
        return sorted(out)

    def pieces(self) -> list[Subspace]:
        return [sub for _, sub in self.middle] + [self.plus_one, self.minus_one]


@dataclass(frozen=True)
class QuaternionicRefinement:
    blocks: list[tuple[float, Subspace]]
    plus_one: Subspace
    minus_one: Subspace


@dataclass(frozen=True)
class SchubertSignature:
    m1: int
    m_minus1: int


def decompose_pair(j, k, tol: Tolerances = DEFAULT_TOL) -> PairDecomposition:
    j = require_point(j, tol)
    k = require_point(k, tol)
    if j.shape != k.shape:
        raise InvalidStructure("J and K live on different spaces")
    dim = len(j)
    # the spectrum of {J,K} lies in [-2, 2]; cluster values are compared on that scale
    edge = max(tol.cluster_tol * 2, 10 * tol.check_tol)
    middle, plus, minus = [], Subspace.zero(dim), Subspace.zero(dim)
    for lam, sub in clustered_sym_eig(anticommutator(j, k), tol):
        if abs(lam - 2.0) <= edge:
            plus = sub
        elif abs(lam + 2.0) <= edge:
            minus = sub
        else:
            middle.append((lam / 2.0, sub))
    return PairDecomposition(middle, plus, minus)


def decomposition_residuals(j, k, d: PairDecomposition, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Numerical checks of the orthogonal, J,K-invariant splitting.

    Returns residuals for orthogonality/direct sum, invariance, the scalar
    action of ``{J,K}`` on each piece, and the identifications
    ``Im[J,K] = sum V_eps``, ``Ker(J+K) = V_1``, ``Ker(J-K) = V_-1``,
    ``Ker[J,K] = V_1 + V_-1``, plus the rank divisibility of each ``V_eps``.
    """
    pieces = d.pieces()
    basis = np.hstack([p.basis for p in pieces])
    dim = len(j)
    ortho = float(np.linalg.norm(basis.T @ basis - np.eye(basis.shape[1]))) if basis.size else 0.0
    direct = basis.shape[1] == dim
    inv = 0.0
    for p in pieces:
        if p.rank == 0:
            continue
        q = np.eye(dim) - p.projector
        inv = max(inv, float(np.linalg.norm(q @ j @ p.basis)), float(np.linalg.norm(q @ k @ p.basis)))
    ac = anticommutator(j, k)
    scalar = 0.0
    for eps, p in d.middle + [(1.0, d.plus_one), (-1.0, d.minus_one)]:
        if p.rank:
            scalar = max(scalar, float(np.linalg.norm(ac @ p.basis - 2 * eps * p.basis)))
    comm = commutator(j, k)
    im_comm = Subspace.span(comm, tol.rank_tol)
    mid = Subspace(np.hstack([p.basis for _, p in d.middle])) if d.middle else Subspace.zero(dim)
    ker_plus = Subspace(null_space(j + k, tol.rank_tol))
    ker_minus = Subspace(null_space(j - k, tol.rank_tol))
    ker_comm = Subspace(null_space(comm, tol.rank_tol))
    return {
        "orthogonality": ortho,
        "direct_sum": direct,
        "invariance": inv,
        "scalar_action": scalar,
        "im_commutator_is_middle": subspace_relate(im_comm, mid, tol.rank_tol).equals,
        "ker_plus_is_v1": subspace_relate(ker_plus, d.plus_one, tol.rank_tol).equals,
        "ker_minus_is_v_minus1": subspace_relate(ker_minus, d.minus_one, tol.rank_tol).equals,
        "ker_commutator_split": subspace_relate(ker_comm, d.plus_one + d.minus_one, tol.rank_tol).equals,
        "middle_ranks_div4": all(p.rank % 4 == 0 for _, p in d.middle),
    }


def refine_blocks(j, k, d: PairDecomposition, tol: Tolerances = DEFAULT_TOL) -> QuaternionicRefinement:
    """Split each ``V_eps`` into orthogonal 4-dimensional J,K-invariant blocks."""
    blocks = []
    for eps, sub in d.middle:
        remaining = sub.basis
        while remaining.shape[1]:
            v = remaining[:, 0]
            cand = np.stack([v, j @ v, k @ v, j @ k @ v], axis=1)
            u, s, _ = np.linalg.svd(cand, full_matrices=False)
            if s[-1] < 1e3 * tol.rank_tol * s[0] + tol.check_tol:
                raise BlockFailure(f"block for eps={eps:.6g} is rank deficient (s_min={s[-1]:.2e})")
            w = Subspace(u)
            blocks.append((eps, w))
            # orthogonal complement of the block inside the remaining space
            rest = remaining - w.basis @ (w.basis.T @ remaining)
            uu, ss, _ = np.linalg.svd(rest, full_matrices=False)
            keep = int(np.sum(ss > 1e-6)) if ss.size else 0
            remaining = uu[:, :keep]
    return QuaternionicRefinement(blocks, d.plus_one, d.minus_one)


def _restrict(m, basis):
    return basis.T @ m @ basis


def derived_kprime(j, k, eps: float, basis=None) -> np.ndarray:
    """``K' = (JK - eps)/f`` with ``f = +sqrt(1 - eps^2)``, restricted to ``basis``.

    ``basis`` holds orthonormal columns spanning ``V_eps``; the result is in
    those coordinates.  Without a basis the whole space is used.
    """
    if abs(eps) >= 1.0:
        raise DegenerateCluster(f"eps={eps} is not in (-1, 1)")
    j = np.asarray(j, dtype=float)
    k = np.asarray(k, dtype=float)
    if basis is not None:
        basis = basis.basis if isinstance(basis, Subspace) else np.asarray(basis)
        j, k = _restrict(j, basis), _restrict(k, basis)
    f = np.sqrt(1.0 - eps * eps)
    return (j @ k - eps * np.eye(len(j))) / f


def kprime_residuals(j, k, eps: float, basis=None) -> dict:
    kp = derived_kprime(j, k, eps, basis)
    if basis is not None:
        b = basis.basis if isinstance(basis, Subspace) else np.asarray(basis)
        j, k = _restrict(j, b), _restrict(k, b)
    one = np.eye(len(kp))
    return {
        "square": float(np.linalg.norm(kp @ kp + one)),
        "skew": float(np.linalg.norm(kp + kp.T)),
        "anti_j": float(np.linalg.norm(anticommutator(j, kp))),
        "anti_k": float(np.linalg.norm(anticommutator(k, kp))),
    }


def schubert_signature(j, k, tol: Tolerances = DEFAULT_TOL) -> SchubertSignature:
    d = decompose_pair(j, k, tol)
    return SchubertSignature(d.m1, d.m_minus1)


def same_orientation(j, k, tol: Tolerances = DEFAULT_TOL) -> bool:
    return schubert_signature(j, k, tol).m1 % 2 == 0


def schubert_nonempty(n: int, m1: int, m_minus1: int) -> bool:
    rest = n - m1 - m_minus1
    return m1 >= 0 and m_minus1 >= 0 and rest >= 0 and rest % 2 == 0


def adapted_basis(j) -> np.ndarray:
    """Orthogonal ``P = [u1, J u1, u2, J u2, ...]``, so ``P^T J P = J0``."""
    j = np.asarray(j, dtype=float)
    dim = len(j)
    cols: list[np.ndarray] = []
    for _ in range(dim // 2):
        q = np.stack(cols, axis=1) if cols else np.zeros((dim, 0))
        resid = np.eye(dim) - q @ q.T
        idx = int(np.argmax(np.linalg.norm(resid, axis=0)))
        u = resid[:, idx] / np.linalg.norm(resid[:, idx])
        cols.extend([u, j @ u])
    return np.stack(cols, axis=1)


def normalize_spec(spec) -> list[tuple[float, int]]:
    """Accept ``{eps: mult}``, ``[(eps, mult)]`` or ``[{"eps":..,"mult":..}]``."""
    if isinstance(spec, dict):
        items = list(spec.items())
    else:
        items = [(s["eps"], s["mult"]) if isinstance(s, dict) else tuple(s) for s in spec]
    merged: Counter = Counter()
    for eps, mult in items:
        merged[float(eps)] += int(mult)
    return sorted(merged.items())


def synthesize_partner(j, spec, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Build ``K`` whose ``{J,K}`` has the prescribed ``(eps, multiplicity)`` spectrum.

    In a J-adapted orthonormal basis, each eigenvalue ``+-1`` contributes 2-dim
    blocks with ``K = -+J`` and each ``eps`` in ``(-1,1)`` contributes 4-dim
    blocks ``K = -eps J + sqrt(1-eps^2) J'`` with ``J'`` a fixed structure
    anticommuting with ``J``.
    """
    j = require_point(j, tol)
    dim = len(j)
    spec = normalize_spec(spec)
    total = sum(m for _, m in spec)
    if total != dim:
        raise InfeasibleSpec(f"multiplicities sum to {total}, expected {dim}")
    j0 = standard_structure(4)
    jp = np.zeros((4, 4))
    # J' u1 = u2, J' u2 = -u1, J' (J u1) = -J u2, J' (J u2) = J u1
    jp[2, 0], jp[0, 2], jp[3, 1], jp[1, 3] = 1.0, -1.0, -1.0, 1.0
    blocks = []
    for eps, mult in spec:
        if abs(eps) > 1.0:
            raise InfeasibleSpec(f"eps={eps} outside [-1, 1]")
        if abs(abs(eps) - 1.0) <= tol.cluster_tol:
            if mult % 2:
                raise InfeasibleSpec(f"multiplicity of {eps:+g} must be even")
            blk = -np.sign(eps) * standard_structure(2)
            blocks.extend([blk] * (mult // 2))
        else:
            if mult % 4:
                raise InfeasibleSpec(f"multiplicity of eps={eps} must be divisible by 4")
            blk = -eps * j0 + np.sqrt(1.0 - eps * eps) * jp
            blocks.extend([blk] * (mult // 4))
    kk = np.zeros((dim, dim))
    pos = 0
    for blk in blocks:
        s = len(blk)
        kk[pos:pos + s, pos:pos + s] = blk
        pos += s
    p = adapted_basis(j)
    return p @ kk @ p.T


def spec_to_json(spec) -> str:
    return json.dumps([{"eps": e, "mult": m} for e, m in normalize_spec(spec)])


def spec_from_json(text: str) -> list[tuple[float, int]]:
    return normalize_spec(json.loads(text))
