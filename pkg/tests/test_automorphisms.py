import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kobalab import automorphisms as au
from kobalab.domains import WHP, Ball, Ellipse, random_interior_points
from kobalab.errors import PreconditionError
from kobalab.kobayashi.lower import ball_distance


def test_h_a_oracle():
    z = np.array([0.3 - 0.2j])
    assert np.allclose(au.h_a(0.5)(z), (z + 0.5) / (1 + 0.5 * z))


def test_cayley_translation_is_parabolic_at_e1():
    u = au.cayley_translation(0.8)
    assert np.allclose(au.boundary_extend(u, [1.0]), [1.0])
    g = u.matrix
    assert np.allclose((g - np.eye(2)) @ (g - np.eye(2)), 0, atol=1e-15)


def test_non_j_unitary_rejected():
    with pytest.raises(PreconditionError):
        au.BallMoebius(np.array([[2.0, 0], [0, 1.0]]))
    with pytest.raises(PreconditionError):
        au.BallMoebius(np.eye(1))


seeds = st.integers(0, 2**31 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([1, 2, 3]))
def test_moebius_is_isometry(seed, k):
    rng = np.random.default_rng(seed)
    g = au.random_moebius(k, rng)
    Z = random_interior_points(Ball(k), 2, seed=seed % 1000, max_radius=0.95)
    gz, gw = g(Z)
    assert np.all(np.linalg.norm(g(Z), axis=1) < 1)
    assert ball_distance(gz, gw) == pytest.approx(ball_distance(*Z), rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_moebius_group_law(seed):
    rng = np.random.default_rng(seed)
    g, h = au.random_moebius(2, rng), au.random_moebius(2, rng)
    z = random_interior_points(Ball(2), 5, seed=1)
    assert np.allclose(au.compose(g, h)(z), g(h(z)), atol=1e-10)
    assert np.allclose(au.inverse(g)(g(z)), z, atol=1e-10)


def test_s_phi_identity(rng):
    for _ in range(20):
        g = au.random_moebius(2, rng)
        z = random_interior_points(Ball(2), 1, seed=int(rng.integers(1000)))[0]
        lhs = 1 - np.linalg.norm(g(z)) ** 2
        rhs = abs(au.s_phi(g, z)) * (1 - np.linalg.norm(z) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_pushforward_matches_difference_quotient(rng):
    E = Ellipse((1, 2))
    g = au.random_webster(E, rng, 1.0)
    z = np.array([0.2 + 0.1j, 0.3j])
    v = np.array([0.3 - 0.1j, 0.2 + 0.4j])
    h = 1e-6
    fd = (g(z + h * v) - g(z - h * v)) / (2 * h)
    assert np.allclose(au.pushforward(g, z, v), fd, atol=1e-8)


@pytest.mark.parametrize("E", [Ellipse((1, 2)), Ellipse((1, 1, 3))])
def test_webster_group_law(E, rng):
    Z = random_interior_points(E, 20, seed=4, max_radius=0.99)
    for _ in range(20):
        g1, g2 = au.random_webster(E, rng), au.random_webster(E, rng)
        assert np.abs(au.compose(g1, g2)(Z) - g1(g2(Z))).max() < 1e-9
        assert np.abs(au.inverse(g1)(g1(Z)) - Z).max() < 1e-9
        assert np.all(E.r_batch(g1(Z))[0] < 0)


def test_webster_preserves_boundary(rng):
    E = Ellipse((1, 1, 3))
    Z = random_interior_points(E, 50, seed=5)
    X = Z * E.ray_scales(Z)[:, None]
    g = au.random_webster(E, rng)
    assert np.abs(E.r_batch(g(X))[0]).max() < 1e-9


def test_webster_needs_matching_ball():
    with pytest.raises(PreconditionError):
        au.WebsterAut(Ellipse((1, 2)), au.boost(1.0, 2))
    with pytest.raises(PreconditionError):
        au.WebsterAut(Ellipse((2, 3)), au.boost(1.0, 1))


def test_power_and_flows():
    g = au.h_a(0.3)
    assert np.allclose(au.power(g, 5)([0.1]), g(g(g(g(g([0.1]))))))
    assert np.allclose(au.power(g, -2)(au.power(g, 2)([0.1])), [0.1])
    W = WHP(2, (1, 2), ((((1,), (1,), 1.0)),))
    p = np.array([0.3 + 2j, 0.5 + 0.1j])
    for kind in ("translation", "dilation"):
        f = au.WHPFlow(W, kind, 0.7)
        assert W.r(f(p)) < 0
        assert np.allclose(au.inverse(f)(f(p)), p)


def test_json_roundtrip_and_rejection(rng):
    E = Ellipse((1, 2))
    g = au.random_webster(E, rng)
    h = au.automorphism_from_json(au.automorphism_to_json(g))
    z = np.array([0.2, 0.3j])
    assert np.allclose(h(z), g(z), atol=1e-14)
    with pytest.raises(PreconditionError):
        au.automorphism_from_json({"kind": "moebius", "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]], "x": 1})
    with pytest.raises(PreconditionError):
        au.automorphism_from_json({"kind": "moebius", "matrix": "nope"})


def test_webster_walk_matches_apply(rng):
    E = Ellipse((1, 2))
    gens = [au.random_webster(E, rng, 1.0) for _ in range(2)]
    word = [0, 1, 1, 0, 1]
    traj = au.webster_walk(gens, word, np.array([0.1, 0.2]))
    z = np.array([0.1, 0.2], dtype=complex)
    for i, w in enumerate(word):
        z = gens[w](z)
        assert np.allclose(traj[i + 1], z, atol=1e-12)
