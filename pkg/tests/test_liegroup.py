import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kobalab import automorphisms as au
from kobalab.domains import Ball, Ellipse
from kobalab.dynamics import classify
from kobalab.errors import PreconditionError
from kobalab.liegroup import (
    SU1kElement, a_t, ad_norm, classify_lie, distance_norm_fit, equivariance_residual, equivariant_map,
    jet2_boundary, jet_difference, jordan_decomposition, kak_decomposition, lie_algebra_basis, pu_equal,
    random_element,
)

seeds = st.integers(0, 2**31 - 1)
ks = st.sampled_from([1, 2])


def test_element_validation():
    with pytest.raises(PreconditionError):
        SU1kElement(2 * np.eye(2))  # det 4
    with pytest.raises(PreconditionError):
        SU1kElement(np.array([[1, 1], [0, 1]]))  # not J-unitary
    g = SU1kElement.from_moebius(au.rotation(0.4))
    assert abs(np.linalg.det(g.matrix) - 1) < 1e-12


def test_classify_examples():
    c = classify_lie(a_t(1.0))
    assert c.label == "L-hyperbolic"
    assert np.allclose(sorted(c.eigenvalues.real), [np.exp(-0.5), np.exp(0.5)])
    assert classify_lie(au.cayley_translation(0.7)).label == "L-unipotent"
    assert classify_lie(np.eye(3)).label == "L-elliptic"
    assert classify_lie(-np.eye(2)).label == "L-elliptic"
    assert classify_lie(au.rotation([0.3, 1.1])).label == "L-elliptic"


def test_sign_normalization():
    # -a_t is hyperbolic up to the center of SU(1,1)
    assert classify_lie(-a_t(1.0).matrix).label == "L-hyperbolic"
    assert classify_lie(-au.cayley_translation(0.5).matrix).label == "L-unipotent"


def test_loxodromic_is_mixed():
    g = SU1kElement.from_matrix(au.rotation([0.7, 0.0]).matrix @ a_t(1.0, 2).matrix)
    assert classify_lie(g).label == "mixed"


def test_jordan_trivial_cases():
    e, hh, u = jordan_decomposition(np.eye(3))
    assert all(np.allclose(f, np.eye(3)) for f in (e, hh, u))
    g = a_t(1.3)
    e, hh, u = jordan_decomposition(g)
    assert np.allclose(hh, g.matrix, atol=1e-12) and np.allclose(e, np.eye(2)) and np.allclose(u, np.eye(2))


def test_jordan_defective_three_block():
    # Heisenberg-type unipotent in SU(1,2) with a Jordan block of size 3
    X = np.array([[0.5j, 0.3, -0.5j], [0.3, 0, -0.3], [0.5j, 0.3, -0.5j]])
    J = np.diag([1.0, -1.0, -1.0])
    assert np.allclose(X.conj().T @ J + J @ X, 0)
    assert np.allclose(np.linalg.matrix_power(X, 3), 0, atol=1e-15)
    g = np.eye(3) + X + X @ X / 2
    jd = jordan_decomposition(g)
    assert jd.residuals["reconstruction"] < 1e-9
    assert np.allclose(jd.g_e, np.eye(3), atol=1e-8) and np.allclose(jd.g_h, np.eye(3), atol=1e-8)
    assert classify_lie(g).label == "L-unipotent"


@settings(max_examples=60, deadline=None)
@given(seeds, ks)
def test_jordan_properties(seed, k):
    g = random_element(k, np.random.default_rng(seed))
    jd = jordan_decomposition(g)
    assert jd.residuals["reconstruction"] <= 1e-9
    assert jd.residuals["commutators"] <= 1e-9
    assert jd.residuals["j_compatibility"] <= 1e-9
    jd2 = jordan_decomposition(g, order=list(range(len(jd.clusters)))[::-1])
    for a, b in zip(jd, jd2):
        assert pu_equal(SU1kElement.from_matrix(a), SU1kElement.from_matrix(b), 1e-8)
    labels = [classify_lie(SU1kElement.from_matrix(f)).label for f in jd]
    assert labels[0] == "L-elliptic"
    assert labels[1] in ("L-hyperbolic", "L-elliptic") and labels[2] in ("L-unipotent", "L-elliptic")


@settings(max_examples=60, deadline=None)
@given(seeds, ks)
def test_kak_properties(seed, k):
    g = random_element(k, np.random.default_rng(seed))
    kd = kak_decomposition(g)
    assert kd.t >= 0
    assert kd.residuals["reconstruction"] <= 1e-9
    assert kd.residuals["k1_block"] <= 1e-9 and kd.residuals["k2_block"] <= 1e-9
    assert abs(np.linalg.det(kd.k1) - 1) < 1e-9
    assert abs(kd.t - kd.residuals["t_from_singular_value"]) < 1e-9


def test_kak_examples():
    kd = kak_decomposition(a_t(2.5, 2))
    assert abs(kd.t - 2.5) < 1e-10
    kd = kak_decomposition(SU1kElement.from_moebius(au.rotation([0.3, 0.2])))
    assert kd.t == 0 and np.allclose(kd.a, np.eye(3))


def test_lie_algebra_basis():
    for k, dim in ((1, 3), (2, 8)):
        B = lie_algebra_basis(k)
        assert B.shape == (dim, k + 1, k + 1)
        G = np.einsum("aij,bij->ab", B.conj(), B).real
        assert np.allclose(G, np.eye(dim))
        J = np.diag([1.0] + [-1.0] * k)
        for X in B:
            assert np.allclose(X.conj().T @ J + J @ X, 0) and abs(np.trace(X)) < 1e-14


def test_ad_norm_examples():
    assert ad_norm(np.eye(2)) == pytest.approx(1.0)
    for t in (0.3, 1.0, 2.5):
        assert ad_norm(a_t(t)) == pytest.approx(np.exp(t), rel=1e-12)
        assert ad_norm(a_t(t, 2)) == pytest.approx(np.exp(t), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, ks)
def test_ad_norm_inverse_and_submultiplicative(seed, k):
    rng = np.random.default_rng(seed)
    g, h = random_element(k, rng), random_element(k, rng)
    assert abs(ad_norm(g) - ad_norm(g.inverse())) <= 1e-9 * ad_norm(g)
    assert ad_norm(g @ h) <= ad_norm(g) * ad_norm(h) * (1 + 1e-9)


def test_distance_norm_relation():
    rng = np.random.default_rng(0)
    fit = distance_norm_fit([random_element(2, rng) for _ in range(100)])
    assert fit["violations"] == 0
    diag = distance_norm_fit([a_t(t, 2) for t in np.linspace(0.1, 4, 20)])
    assert diag["alpha"] == pytest.approx(0.5, abs=1e-9) and abs(diag["beta"]) < 1e-9


def test_cross_module_hyperbolic():
    g = a_t(1.0, 2)
    assert classify(Ball(2), g.to_moebius()).classification == "hyperbolic"
    assert classify_lie(g).label == "L-hyperbolic"


def test_equivariant_map():
    E = Ellipse((1, 2))
    x0 = np.array([np.exp(0.4j), 0])
    ident = au.webster_from_moebius(E, au.moebius_identity(1))
    assert np.allclose(equivariant_map(E, x0, ident), x0[:1])
    g = au.webster_from_moebius(E, au.h_a(0.5), [1.3])
    assert equivariance_residual(E, x0, g) <= 1e-9
    with pytest.raises(PreconditionError):
        equivariant_map(E, [0.5, 0], g)
    with pytest.raises(PreconditionError):
        equivariant_map(E, [1, 0.1], g)


def test_jets():
    j = jet2_boundary(au.moebius_identity(2), [0, 1])
    assert np.allclose(j.value, 0) and np.allclose(j.first, np.eye(3)) and np.allclose(j.second, 0)
    assert jet_difference(au.rotation(0.3), au.rotation(0.5), [1], order=1) > 1e-3
    # identity and a parabolic fixing 1 share the 1-jet at 1 but not the 2-jet
    u = au.cayley_translation(0.4)
    assert jet_difference(au.moebius_identity(1), u, [1], order=1) < 1e-12
    assert jet_difference(au.moebius_identity(1), u, [1], order=2) > 1e-3
    with pytest.raises(PreconditionError):
        jet2_boundary(u, [0.5])


def test_jet_chart_rotation():
    # the image of x = 1 under a rotation by pi is the default target pole -x
    j = jet2_boundary(au.rotation(np.pi), [1])
    assert j.rotated and np.all(np.isfinite(j.second))


@pytest.mark.parametrize("k", [1, 2])
def test_jet_matches_finite_differences(k):
    from kobalab.liegroup import _tangent_frame

    rng = np.random.default_rng(k)
    phi = au.random_moebius(k, rng, 1.0)
    x = np.zeros(k, dtype=complex)
    x[0] = np.exp(0.3j)
    Q = np.zeros(k, dtype=complex)
    Q[-1] = 1j
    j = jet2_boundary(phi, x, target_pole=Q)
    P = -x
    fs, ft = _tangent_frame(P), _tangent_frame(Q)

    def chart_map(u):
        v = u @ fs
        n2 = np.vdot(v, v).real
        y = (2 * v + (n2 - 1) * P) / (n2 + 1)
        w = moebius(y)
        return np.array([np.vdot(f, w).real for f in ft]) / (1 - np.vdot(Q, w).real)

    def moebius(y):
        return au.moebius_apply(phi, y, check=False)

    n = 2 * k - 1
    h = 1e-4
    f0 = chart_map(np.zeros(n))
    assert np.allclose(j.value, f0, atol=1e-12)
    for a in range(n):
        e = np.eye(n)[a] * h
        fd1 = (chart_map(e) - chart_map(-e)) / (2 * h)
        assert np.allclose(j.first[:, a], fd1, atol=1e-6)
        fd2 = (chart_map(e) - 2 * f0 + chart_map(-e)) / h ** 2
        assert np.allclose(j.second[:, a, a], fd2, atol=1e-4)
