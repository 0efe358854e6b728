import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kobalab.domains import (
    WHP, Ball, Ellipse, Polydisc, boundary_distance_lower, boundary_distance_upper, boundary_project, cayley,
    cayley_inverse, complex_tangent_basis, contains, defining_function, domain_from_json, random_interior_points,
    weighted_homogeneity_residual,
)
from kobalab.errors import PreconditionError


def test_ball_defining_function_oracle():
    B = Ball(2)
    z = np.array([0.3 + 0.1j, -0.2j])
    val, grad = defining_function(B, z)
    assert val == pytest.approx(np.sum(np.abs(z) ** 2) - 1, abs=1e-15)
    assert np.allclose(grad, z.conj())


def test_polydisc_and_ellipse_values():
    assert Polydisc(2).r([0.5, 0.9j]) == pytest.approx(0.81 - 1)
    E = Ellipse((1, 2))
    assert E.r([0.5, 0.5]) == pytest.approx(0.25 + 0.0625 - 1)
    assert E.k == 1 and Ellipse((1, 1, 3)).k == 2


@pytest.mark.parametrize("bad", [
    {"kind": "ball", "dim": 2, "colour": "red"},
    {"kind": "torus"},
    {"kind": "ellipse", "exponents": [2, 1]},
    {"kind": "ellipse", "exponents": [1, 2.5]},
    {"dim": 2},
    "ball",
])
def test_domain_json_rejects(bad):
    with pytest.raises(PreconditionError):
        domain_from_json(bad)


@pytest.mark.parametrize("D", [Ball(2), Polydisc(3), Ellipse((1, 1, 3)), WHP.siegel(3)])
def test_domain_json_roundtrip(D):
    assert domain_from_json(D.to_json()) == D


def test_whp_validation():
    with pytest.raises(PreconditionError):
        WHP(2, (1, 2), ((((2,), (0,), 1.0)),))  # not Hermitian
    with pytest.raises(PreconditionError):
        WHP(2, (1, 2), ((((2,), (2,), 1.0)),))  # weighted degree 2
    W = WHP(2, (1, 4), ((((2,), (2,), 1.0)),))
    assert W.r([1j, 0.5]) < 0


def test_weighted_homogeneity():
    W = WHP(3, (1, 2, 4), (((1, 0), (1, 0), 1.0), ((0, 2), (0, 2), 0.5)))
    assert weighted_homogeneity_residual(W, np.array([0.2 - 0.1j, 0.4j]), 0.7) < 1e-12


def test_cayley_roundtrip(rng):
    for _ in range(50):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        z *= 0.9 * rng.uniform() / np.linalg.norm(z)
        p = cayley(z)
        assert WHP.siegel(2).r(p) < 0
        assert np.allclose(cayley_inverse(p), z, atol=1e-12)


def test_random_points_inside(bounded_domain):
    Z = random_interior_points(bounded_domain, 200, seed=3, max_radius=0.99)
    assert np.all(bounded_domain.r_batch(Z)[0] < 0)


def test_boundary_project_lands_on_boundary(bounded_domain):
    for z in random_interior_points(bounded_domain, 20, seed=1):
        if not np.any(z):
            continue
        x = boundary_project(bounded_domain, z)
        assert abs(bounded_domain.r(x)) < 1e-10


def test_boundary_distance_bracket_orders(bounded_domain):
    Z = random_interior_points(bounded_domain, 50, seed=2)
    lo = boundary_distance_lower(bounded_domain, Z)
    up = boundary_distance_upper(bounded_domain, Z)
    assert np.all(lo <= up + 1e-14)


def test_ball_boundary_distance_exact():
    z = np.array([0.6, 0.0])
    assert boundary_distance_upper(Ball(2), z[None])[0] == pytest.approx(0.4)


def test_complex_tangent_basis_is_tangent():
    E = Ellipse((1, 2))
    x = boundary_project(E, np.array([0.4, 0.3 + 0.2j]))
    _, grad = defining_function(E, x)
    for v in complex_tangent_basis(E, x):
        assert abs(np.dot(grad, v)) < 1e-12


def test_contains_and_preconditions():
    assert contains(Ball(2), [0.1, 0.1])
    assert not contains(Ball(2), [1.0, 0.1])
    with pytest.raises(PreconditionError):
        Ball(2).r([0.1, 0.1, 0.1])
    with pytest.raises(PreconditionError):
        Ball(2).r([np.nan, 0])


coords = st.floats(-0.7, 0.7, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(coords, coords, coords, coords)
def test_ray_scale_hits_boundary(a, b, c, d):
    z = np.array([a + 1j * b, c + 1j * d])
    if np.linalg.norm(z) < 1e-6:
        return
    for D in (Ball(2), Polydisc(2), Ellipse((1, 2)), Ellipse((2, 3))):
        t = D.ray_scales(z[None])[0]
        assert abs(D.r(t * z)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(coords, coords, coords, coords)
def test_support_function_bounds_domain(a, b, c, d):
    u = np.array([a + 1j * b, c + 1j * d])
    if np.linalg.norm(u) < 1e-3:
        return
    u = u / np.linalg.norm(u)
    E = Ellipse((1, 2))
    h = E.support(u)
    Z = random_interior_points(E, 64, seed=0, max_radius=1.0)
    assert np.all(np.real(Z @ u.conj()) <= h + 1e-12)
