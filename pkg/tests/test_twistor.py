import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistorlab.errors import DimensionMismatch, InvalidStructure, NotTangent
from twistorlab.linalg import DEFAULT_TOL, MetricSpace
from twistorlab.sections import PHI, Const, symmetric_functions
from twistorlab.twistor import (
    covariant_derivative,
    curve_from_tangent,
    fd_derivative,
    i_tau,
    lie_bracket_fd,
    project_tangent,
    random_orthogonal,
    random_point,
    require_point,
    tangent_basis,
    tangent_residual,
    validate_point,
)

FD2 = DEFAULT_TOL.fd_step ** 2


def random_tangent(k, rng):
    b = project_tangent(k, rng.standard_normal(k.shape))
    return b / np.linalg.norm(b)


def test_validate_standard(j4):
    d = validate_point(j4)
    assert d.ok and d.square_residual == 0 and d.skew_residual == 0


def test_validate_perturbed(j4):
    bad = j4.copy()
    bad[0, 1] += 1e-3
    d = validate_point(bad)
    assert not d.ok
    assert 0.5e-3 < max(d.square_residual, d.skew_residual) < 3e-3
    with pytest.raises(InvalidStructure):
        require_point(bad)


def test_validate_conjugated(j4, rng):
    a = random_orthogonal(4, rng)
    assert validate_point(a @ j4 @ a.T).ok


def test_validate_dimension_mismatch(j4):
    with pytest.raises(DimensionMismatch):
        validate_point(j4, dim=6)
    with pytest.raises(DimensionMismatch):
        validate_point(np.zeros((4, 3)))


def test_random_point_deterministic_and_valid():
    a = random_point(6, 11)
    b = random_point(MetricSpace(6), 11)
    assert np.array_equal(a, b)
    assert validate_point(a).ok


def test_random_point_f1_mean_is_zero(j4):
    rng = np.random.default_rng(5)
    f1 = np.array([symmetric_functions(j4, random_point(4, rng))[0] for _ in range(1000)])
    assert abs(f1.mean()) < 3 * f1.std() / np.sqrt(len(f1))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_tangent_dimension(n):
    k = random_point(2 * n, n)
    assert len(tangent_basis(k)) == n * (n - 1)


def test_tangent_basis_closed_under_k(rng):
    k = random_point(6, rng)
    for b in tangent_basis(k):
        assert tangent_residual(k, k @ b) < 1e-12
        assert np.isclose(np.linalg.norm(k @ b), np.linalg.norm(b))


def test_i_tau(rng):
    k = random_point(6, rng)
    a = random_tangent(k, rng)
    assert tangent_residual(k, i_tau(k, a)) < 1e-12
    assert np.allclose(i_tau(k, i_tau(k, a)), -a)
    assert np.array_equal(i_tau(k, np.zeros_like(k)), np.zeros_like(k))
    with pytest.raises(NotTangent):
        i_tau(k, np.eye(6))


def test_curve_zero_tangent(j4):
    c = curve_from_tangent(j4, np.zeros((4, 4)))
    assert np.array_equal(c(0.7), j4)


def test_curve_stays_on_manifold(rng):
    k = random_point(4, rng)
    b = tangent_basis(k)[0]
    c = curve_from_tangent(k, b)
    for t in (0.3, np.pi * np.linalg.norm(b), 5.0):
        assert validate_point(c(t)).ok
    assert np.allclose(c.velocity(), b)


def test_curve_velocity_matches_by_fd(rng):
    k = random_point(6, rng)
    b = random_tangent(k, rng)
    c = curve_from_tangent(k, b)
    h = 1e-4
    d = (c(h) - c(-h)) / (2 * h)
    assert np.linalg.norm(d - b) / np.linalg.norm(b) < 10 * h ** 2


def test_fd_of_trace_coupling(rng):
    k = random_point(6, rng)
    b = random_tangent(k, rng)
    m = rng.standard_normal((6, 6))
    exact = np.trace(m @ b)
    fd = fd_derivative(lambda kk: np.trace(m @ kk), k, b)
    assert abs(fd - exact) / max(1.0, abs(exact)) < 10 * FD2


def _chart_fields(rng, n=4):
    m1, m2 = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    return (lambda kk: project_tangent(kk, m1)), (lambda kk: project_tangent(kk, m2))


def test_lie_bracket_self_is_zero(rng):
    k = random_point(4, rng)
    x, _ = _chart_fields(rng)
    assert np.linalg.norm(lie_bracket_fd(x, x, k)) < 1e3 * FD2


def test_lie_bracket_tangent_and_antisymmetric(rng):
    k = random_point(4, rng)
    x, y = _chart_fields(rng)
    xy = lie_bracket_fd(x, y, k)
    yx = lie_bracket_fd(y, x, k)
    assert tangent_residual(k, xy) < 1e3 * FD2
    assert np.linalg.norm(xy + yx) < 1e3 * FD2


def test_connection_kills_phi(rng):
    j = random_point(6, rng)
    for _ in range(5):
        k = random_point(6, rng)
        b = random_tangent(k, rng)
        assert np.linalg.norm(covariant_derivative(PHI, k, b, j)) < DEFAULT_TOL.check_tol
        # the finite-difference route agrees
        assert np.linalg.norm(covariant_derivative(lambda kk: kk, k, b)) < 1e3 * FD2


def test_connection_on_constant_section(rng):
    k = random_point(4, rng)
    b = random_tangent(k, rng)
    m = rng.standard_normal((4, 4))
    got = covariant_derivative(Const(m), k, b, np.eye(4))
    bk = b @ k
    assert np.allclose(got, 0.5 * (bk @ m - m @ bk))


def test_connection_vector_kind(rng):
    k = random_point(4, rng)
    b = random_tangent(k, rng)
    s = rng.standard_normal(4)
    got = covariant_derivative(lambda kk: s, k, b, kind="vector")
    assert np.allclose(got, 0.5 * b @ k @ s)
    with pytest.raises(ValueError):
        covariant_derivative(lambda kk: s, k, b, kind="spinor")


@given(st.integers(0, 10_000))
def test_connection_preserves_complex_structure(seed):
    # nabla(phi A) - phi nabla A = 0 for tangent-valued A
    rng = np.random.default_rng(seed)
    k = random_point(4, rng)
    b = random_tangent(k, rng)
    m = rng.standard_normal((4, 4))
    a = lambda kk: project_tangent(kk, m)
    lhs = covariant_derivative(lambda kk: kk @ a(kk), k, b)
    rhs = k @ covariant_derivative(a, k, b)
    assert np.linalg.norm(lhs - rhs) < 1e3 * FD2 * max(1.0, np.linalg.norm(m))


@given(st.integers(0, 10_000))
def test_connection_is_torsion_free(seed):
    rng = np.random.default_rng(seed)
    k = random_point(4, rng)
    x, y = _chart_fields(rng)
    xv, yv = x(k), y(k)
    torsion = covariant_derivative(y, k, xv) - covariant_derivative(x, k, yv) - lie_bracket_fd(x, y, k)
    assert np.linalg.norm(torsion) < 1e3 * FD2 * max(1.0, np.linalg.norm(xv) * np.linalg.norm(yv))
