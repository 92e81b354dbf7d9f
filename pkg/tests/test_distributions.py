import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistorlab.algebroid import DeltaMinus, DeltaPlus, Sigma
from twistorlab.bundles import ConstraintClass
from twistorlab.distributions import (
    AnchorImage,
    DistributionSpec,
    FullTangent,
    Intersection,
    SpanSum,
    complex_closure_check,
    distribution_basis,
    image_equivalence_check,
    image_split,
    involutivity_residual,
    refinement_check,
)
from twistorlab.errors import HypothesisViolated, RankJump
from twistorlab.leaves import classify_orbit
from twistorlab.linalg import DEFAULT_TOL, subspace_relate
from twistorlab.pairs import synthesize_partner
from twistorlab.sections import BlackBoxScalar, QPolynomial, ScalarFn
from twistorlab.twistor import random_point, standard_structure

from conftest import s2_frame_matrices

FD2 = DEFAULT_TOL.fd_step ** 2
E0 = 0.5
S2_Q = QPolynomial.from_roots([0.0, 2 * E0])

PLANTED_8 = [
    {0.3: 4, 1.0: 2, -1.0: 2},
    {0.3: 4, -0.5: 4},
    {0.2: 8},
    {1.0: 4, -1.0: 4},
    {0.6: 4, 1.0: 4},
]


def s2_point(b, theta=0.7):
    j, i, l = s2_frame_matrices()
    r = np.sqrt(1 - b * b)
    return r * np.cos(theta) * i + b * j + r * np.sin(theta) * l


def test_s2_generic_point_is_full_tangent():
    j = standard_structure(4)
    spec = DistributionSpec(j, S2_Q)
    assert len(distribution_basis(spec, s2_point(0.3))) == 2
    assert len(distribution_basis(spec, s2_point(-0.8))) == 2


@pytest.mark.parametrize("b", [0.0, -E0])
def test_s2_special_points_are_leaves_of_dim_zero(b):
    spec = DistributionSpec(standard_structure(4), S2_Q)
    assert distribution_basis(spec, s2_point(b)) == []


def _f_poly(roots):
    return QPolynomial.from_roots(roots)


@pytest.mark.parametrize("spec_k", PLANTED_8 + [{0.4: 4}, {1.0: 2, -1.0: 2}, {0.1: 4, 0.7: 4, 1.0: 4}])
@pytest.mark.parametrize("s_tag", ["one", "jplus", "jminus", "comm"])
def test_plain_dimension_formula(spec_k, s_tag):
    dim = sum(spec_k.values())
    j = standard_structure(dim)
    k = synthesize_partner(j, spec_k)
    spec = DistributionSpec(j, QPolynomial([1.0]), s_tag)
    _, im = image_split(spec, k)
    r = im.rank // 2
    assert im.rank % 2 == 0
    assert len(distribution_basis(spec, k)) == r * (r - 1)


def test_plain_dimension_with_vanishing_cluster():
    j = standard_structure(8)
    k = synthesize_partner(j, {0.3: 4, -0.5: 4})
    # {J,K} is 2*eps on each cluster; kill the first one
    spec = DistributionSpec(j, _f_poly([0.6]))
    ker, im = image_split(spec, k)
    assert (ker.rank, im.rank) == (4, 4)
    assert len(distribution_basis(spec, k)) == 2 * 1


def test_split_is_orthogonal_and_invariant():
    j = standard_structure(8)
    k = synthesize_partner(j, {0.3: 4, 1.0: 2, -1.0: 2})
    spec = DistributionSpec(j, QPolynomial([1.0]), "jplus")
    ker, im = image_split(spec, k)
    assert ker.rank + im.rank == 8
    assert np.linalg.norm(ker.basis.T @ im.basis) < 1e-10
    for m in (j, k):
        for sub in (ker, im):
            assert all(sub.distance(col) < 1e-10 for col in (m @ sub.basis).T)


def test_hypothesis_violation():
    class Broken(QPolynomial):
        def evaluate(self, j, k):
            m = np.zeros((len(j), len(j)))
            m[0, 1] = 1.0
            return m

    spec = DistributionSpec(standard_structure(4), Broken([1.0]))
    with pytest.raises(HypothesisViolated):
        distribution_basis(spec, random_point(4, 0))


def test_bad_spec_fields():
    with pytest.raises(ValueError):
        DistributionSpec(standard_structure(4), s_tag="bogus")
    with pytest.raises(ValueError):
        DistributionSpec(standard_structure(4), flavor="twisted")


def test_json_round_trip():
    j = standard_structure(6)
    q = QPolynomial([ScalarFn.f(1) * -0.25, 1.0])
    spec = DistributionSpec(j, q, "jminus", "unitary")
    back = DistributionSpec.from_json(spec.to_json(), j)
    assert back.to_json() == spec.to_json()
    k = random_point(6, 4)
    assert np.allclose(back.f_matrix(k), spec.f_matrix(k))


@pytest.mark.parametrize("spec_k", PLANTED_8)
def test_unitary_inside_plain_inside_s(spec_k):
    j = standard_structure(8)
    k = synthesize_partner(j, spec_k)
    q = _f_poly([0.6])
    for s_tag in ("one", "jplus", "jminus", "comm"):
        plain = DistributionSpec(j, q, s_tag, "plain")
        unit = plain.with_flavor("unitary")
        s_only = DistributionSpec(j, QPolynomial([1.0]), s_tag, "plain")
        assert refinement_check(unit, plain, k)
        assert refinement_check(plain, s_only, k)
        assert refinement_check(plain, plain, k, "equal")


@pytest.mark.parametrize("spec_k", PLANTED_8)
@pytest.mark.parametrize("s_tag", ["jplus", "jminus", "comm"])
def test_unitary_s_is_intersection(spec_k, s_tag):
    j = standard_structure(8)
    k = synthesize_partner(j, spec_k)
    lhs = DistributionSpec(j, QPolynomial([1.0]), s_tag, "unitary")
    rhs = Intersection(DistributionSpec(j, flavor="unitary"), DistributionSpec(j, s_tag=s_tag))
    assert refinement_check(lhs, rhs, k, "equal")


def test_refinement_bad_relation():
    j = standard_structure(4)
    with pytest.raises(ValueError):
        refinement_check(FullTangent(), FullTangent(), j, "overlaps")


@pytest.mark.parametrize("dim", [6, 8])
def test_transversality(dim):
    j = standard_structure(dim)
    for seed in range(4):
        k = random_point(dim, seed)
        full = FullTangent()
        assert refinement_check(SpanSum(AnchorImage(DeltaPlus, j), AnchorImage(DeltaMinus, j)), full, k, "equal")
        assert refinement_check(AnchorImage(Sigma, j),
                                Intersection(AnchorImage(DeltaPlus, j), AnchorImage(DeltaMinus, j)), k, "equal")


def test_s_distribution_inside_delta_image():
    j = standard_structure(8)
    k = synthesize_partner(j, {0.3: 4, 1.0: 2, -1.0: 2})
    assert refinement_check(DistributionSpec(j, s_tag="jplus"), AnchorImage(DeltaPlus, j), k)
    assert refinement_check(DistributionSpec(j, flavor="unitary"), AnchorImage(Sigma, j), k)


@pytest.mark.parametrize("e_class", [ConstraintClass.UJ, ConstraintClass.UPhi, ConstraintClass.O])
def test_image_equivalence_invertible_f(e_class):
    j = standard_structure(6)
    k = random_point(6, 1)
    assert image_equivalence_check(DistributionSpec(j), e_class, k)


def test_image_equivalence_zero_f():
    j = standard_structure(4)
    spec = DistributionSpec(j, S2_Q)
    assert image_equivalence_check(spec, ConstraintClass.UJ, s2_point(0.0))


@pytest.mark.parametrize("spec_k", PLANTED_8)
@pytest.mark.parametrize("e_class", list(ConstraintClass))
@pytest.mark.parametrize("s_tag", ["one", "jplus"])
def test_image_equivalence_planted(spec_k, e_class, s_tag):
    j = standard_structure(8)
    k = synthesize_partner(j, spec_k)
    assert image_equivalence_check(DistributionSpec(j, _f_poly([0.6]), s_tag), e_class, k)


def test_complex_closure():
    j = standard_structure(4)
    assert complex_closure_check(DistributionSpec(j, S2_Q), s2_point(0.0))
    assert complex_closure_check(DistributionSpec(j), random_point(4, 2))
    j8 = standard_structure(8)
    for spec_k in PLANTED_8:
        k = synthesize_partner(j8, spec_k)
        assert complex_closure_check(DistributionSpec(j8, _f_poly([0.6]), "jplus"), k)


@given(st.integers(0, 10_000))
def test_unitary_dim_matches_orbit(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.choice([4, 6, 8]))
    j = standard_structure(dim)
    k = random_point(dim, rng)
    got = len(distribution_basis(DistributionSpec(j, flavor="unitary"), k))
    assert got == classify_orbit(j, k).dimension


def test_involutivity_full_tangent():
    j = standard_structure(4)
    assert involutivity_residual(DistributionSpec(j), random_point(4, 3)) < 1e3 * FD2


def test_involutivity_trivial_ranks():
    j = standard_structure(4)
    assert involutivity_residual(DistributionSpec(j, S2_Q), s2_point(0.0)) == 0.0
    k = synthesize_partner(j, {0.3: 4})
    assert len(distribution_basis(DistributionSpec(j, flavor="unitary"), k)) == 1
    assert involutivity_residual(DistributionSpec(j, flavor="unitary"), k) == 0.0


def test_involutivity_dim8_unitary():
    j = standard_structure(8)
    k = synthesize_partner(j, {0.3: 4, 1.0: 2, -1.0: 2})
    q = QPolynomial([ScalarFn.f(1) * -0.125, 1.0])
    spec = DistributionSpec(j, q, "one", "unitary")
    assert len(distribution_basis(spec, k)) > 1
    assert involutivity_residual(spec, k, max_pairs=20) < 1e-4


def test_involutivity_rank_jump():
    # coefficient equal to 1 at K and 0 everywhere else: rank collapses off the base point
    j = standard_structure(4)
    k = random_point(4, 5)
    bump = BlackBoxScalar(lambda jj, kk: float(np.linalg.norm(kk - k) < 1e-12))
    spec = DistributionSpec(j, QPolynomial([bump]))
    assert len(distribution_basis(spec, k)) == 2
    with pytest.raises(RankJump):
        involutivity_residual(spec, k)
