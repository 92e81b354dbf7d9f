import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistorlab.algebroid import (
    DeltaMinus,
    DeltaPlus,
    PsiQS,
    Sigma,
    anchor,
    anchor_image_basis,
    bracket,
    image_description_basis,
    image_matches_description,
    order_check,
    parse_anchor,
    random_section,
    verify_axioms,
)
from twistorlab.bundles import ConstraintClass, fiber_basis, twist_class
from twistorlab.errors import NotInDomain
from twistorlab.linalg import DEFAULT_TOL, subspace_relate
from twistorlab.pairs import synthesize_partner
from twistorlab.sections import Const, QPolynomial, ScalarFn
from twistorlab.twistor import lie_bracket_fd, random_point, standard_structure, tangent_residual

BRACKETED = [DeltaPlus, DeltaMinus, Sigma]
FD2 = DEFAULT_TOL.fd_step ** 2


def test_parse_anchor():
    assert parse_anchor("sigma") is Sigma
    assert parse_anchor("delta+") is DeltaPlus
    assert parse_anchor("DELTA_MINUS") is DeltaMinus
    with pytest.raises(ValueError):
        parse_anchor("gamma")


@pytest.mark.parametrize("kind", BRACKETED)
def test_anchor_of_zero(kind):
    j = standard_structure(4)
    k = random_point(4, 0)
    assert np.array_equal(anchor(kind, np.zeros((4, 4)), j, k), np.zeros((4, 4)))


def test_delta_plus_degenerate_fiber(rng):
    j = standard_structure(4)
    for _ in range(3):
        assert np.linalg.norm(anchor(DeltaPlus, rng.standard_normal((4, 4)), j, -j)) == 0.0
    assert anchor_image_basis(DeltaPlus, j, -j).rank == 0


@given(st.integers(0, 10_000), st.sampled_from(BRACKETED), st.sampled_from([4, 6, 8]))
def test_anchor_images_are_tangent(seed, kind, dim):
    rng = np.random.default_rng(seed)
    j = random_point(dim, rng)
    k = random_point(dim, rng)
    a = rng.standard_normal((dim, dim))
    v = anchor(kind, a, j, k)
    assert tangent_residual(k, v) < 1e-10 * max(1.0, np.linalg.norm(v))


def test_anchor_shape_mismatch():
    j = standard_structure(4)
    with pytest.raises(NotInDomain):
        anchor(Sigma, np.zeros((6, 6)), j, j)


@pytest.mark.parametrize("kind", BRACKETED)
@pytest.mark.parametrize("spec", [{0.3: 4}, {1.0: 2, -1.0: 2}, {0.0: 4}, {-1.0: 4}])
def test_image_characterisation_dim4(kind, spec):
    j = standard_structure(4)
    k = synthesize_partner(j, spec)
    assert image_matches_description(kind, j, k)


@pytest.mark.parametrize("kind", BRACKETED)
@pytest.mark.parametrize("spec", [{0.3: 4, 1.0: 2, -1.0: 2}, {0.5: 4, 1.0: 4}, {-0.2: 8}, {1.0: 2, -1.0: 6}])
def test_image_characterisation_dim8(kind, spec):
    j = standard_structure(8)
    k = synthesize_partner(j, spec)
    img = anchor_image_basis(kind, j, k)
    desc = image_description_basis(kind, j, k)
    rel = subspace_relate(img, desc)
    assert rel.equals and img.rank == desc.rank


def test_sigma_image_is_intersection_of_delta_images():
    j = standard_structure(8)
    k = synthesize_partner(j, {0.3: 4, 1.0: 2, -1.0: 2})
    plus = anchor_image_basis(DeltaPlus, j, k)
    minus = anchor_image_basis(DeltaMinus, j, k)
    sig = anchor_image_basis(Sigma, j, k)
    assert subspace_relate(sig, plus.intersect(minus)).equals


def test_psi_anchor_domain_and_image():
    j = standard_structure(8)
    k = synthesize_partner(j, {0.3: 4, 0.6: 4})
    q = QPolynomial([ScalarFn.f(1) * -0.125, 1.0])
    kind = PsiQS(q, "jplus", ConstraintClass.UJ)
    dom = fiber_basis(twist_class(ConstraintClass.UJ, "jplus"), j, k)
    for a in dom[:3]:
        assert tangent_residual(k, anchor(kind, a, j, k)) < 1e-10
    bad = fiber_basis(ConstraintClass.OAntiJ, j, k)[0]
    with pytest.raises(NotInDomain):
        anchor(kind, bad, j, k)
    assert anchor_image_basis(kind, j, k).rank > 0


@pytest.mark.parametrize("kind", BRACKETED)
def test_bracket_antisymmetry(kind, rng):
    j = standard_structure(6)
    k = random_point(6, rng)
    a = random_section(6, rng, polynomial=True)
    b = random_section(6, rng, polynomial=True)
    assert np.linalg.norm(bracket(kind, a, a, j, k)) < 1e-12
    assert np.allclose(bracket(kind, a, b, j, k), -bracket(kind, b, a, j, k))


def test_bracket_rejects_psi():
    q = QPolynomial([1.0])
    with pytest.raises(ValueError):
        bracket(PsiQS(q), np.eye(4), np.eye(4), np.eye(4), np.eye(4))


@pytest.mark.parametrize("kind", BRACKETED)
def test_constant_section_morphism_dim4(kind, rng):
    j = standard_structure(4)
    for _ in range(4):
        k = random_point(4, rng)
        a, b = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
        lhs = anchor(kind, bracket(kind, a, b, j, k), j, k)
        rhs = lie_bracket_fd(lambda kk: anchor(kind, a, j, kk), lambda kk: anchor(kind, b, j, kk), k)
        assert np.linalg.norm(lhs - rhs) < 1e3 * FD2 * max(1.0, np.linalg.norm(rhs))


@pytest.mark.parametrize("kind", BRACKETED)
def test_leibniz_with_f1(kind, rng):
    j = standard_structure(6)
    f = ScalarFn.f(1)
    for _ in range(4):
        k = random_point(6, rng)
        a = random_section(6, rng, polynomial=True)
        b = random_section(6, rng, polynomial=True)
        lhs = bracket(kind, a, f * b, j, k)
        va = anchor(kind, a.evaluate(j, k), j, k)
        rhs = f.value(j, k) * bracket(kind, a, b, j, k) + f.derivative(j, k, va) * b.evaluate(j, k)
        assert np.linalg.norm(lhs - rhs) < 1e-10 * max(1.0, np.linalg.norm(rhs))


def test_verify_axioms_zero_sections(monkeypatch):
    import twistorlab.algebroid as alg
    monkeypatch.setattr(alg, "random_section", lambda dim, rng, polynomial=False: Const(np.zeros((dim, dim))))
    for r in verify_axioms(DeltaPlus, n_sections=2, n_points=2, dims=(4,), jacobi_samples=1):
        assert r.max_residual == 0.0


@pytest.mark.parametrize("kind", BRACKETED)
def test_verify_axioms_gate(kind):
    reports = {r.axiom: r for r in verify_axioms(kind, n_sections=16, n_points=8, seed=1)}
    assert reports["anchor_morphism"].passed and reports["anchor_morphism"].samples == 256
    assert reports["leibniz"].passed
    jac = reports["jacobiator"]
    assert jac.passed is None and len(jac.values) == jac.samples
    assert set(reports["leibniz"].to_json()) == {"axiom", "max_residual", "samples", "pass"}


@pytest.mark.parametrize("kind", BRACKETED)
def test_order_check(kind):
    rep = order_check(kind, seed=3)
    assert rep.passed
    assert all(r >= 10 for r in rep.values)


def test_verify_axioms_deterministic():
    a = [r.to_json() for r in verify_axioms(Sigma, 2, 2, seed=5, jacobi_samples=1)]
    b = [r.to_json() for r in verify_axioms(Sigma, 2, 2, seed=5, jacobi_samples=1)]
    assert a == b


def test_verify_axioms_rejects_psi():
    with pytest.raises(ValueError):
        verify_axioms(PsiQS(QPolynomial([1.0])))
