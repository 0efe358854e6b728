"""The compiled kernels agree with the numpy fallback."""
import numpy as np
import pytest

from kobalab import _pycore, kernels

backends = kernels.backends()
needs_compiled = pytest.mark.skipif("compiled" not in backends, reason="extension not built")


def _points(rng, n, d, scale=0.6):
    return scale * (rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))) / np.sqrt(2 * d)


CASES = [(_pycore.KIND_POWER_SUM, [1.0, 2.0], 1.0), (_pycore.KIND_POWER_SUM, [1.0, 1.0, 3.0], 1.0),
         (_pycore.KIND_POWER_SUM, [1.0, 1.0], 1.5), (_pycore.KIND_POLYDISC, [1.0, 1.0], 1.0)]


@needs_compiled
@pytest.mark.parametrize("kind,exps,R", CASES)
def test_defining_values_agree(kind, exps, R, rng):
    c = backends["compiled"]
    Z = _points(rng, 500, len(exps))
    v1, g1 = _pycore.defining_values(kind, np.array(exps), R, Z)
    v2, g2 = c.defining_values(kind, np.array(exps), R, Z)
    assert np.allclose(v1, v2, atol=1e-14) and np.allclose(g1, g2, atol=1e-14)


@needs_compiled
@pytest.mark.parametrize("kind,exps,R", CASES)
def test_ray_scales_and_hits_agree(kind, exps, R, rng):
    c = backends["compiled"]
    e = np.array(exps)
    Z = _points(rng, 300, len(exps))
    assert np.allclose(_pycore.ray_scales(kind, e, R, Z), c.ray_scales(kind, e, R, Z), rtol=1e-13)
    X = 0.3 * Z
    U = _points(rng, 300, len(exps), 1.0)
    t0 = np.full(300, 50.0)
    assert np.allclose(_pycore.ray_hits(kind, e, R, X, U, t0), c.ray_hits(kind, e, R, X, U, t0), rtol=1e-12)


@needs_compiled
def test_webster_walk_agrees(rng):
    from kobalab.automorphisms import random_webster
    from kobalab.domains import Ellipse

    E = Ellipse((1, 1, 3))
    gens = [random_webster(E, rng, 1.0) for _ in range(2)]
    mats = np.array([g.phi.matrix for g in gens])
    phases = np.array([g.phases for g in gens])
    word = rng.integers(0, 2, size=200)
    z0 = np.array([0.1, 0.2j, 0.3])
    c = backends["compiled"]
    a = _pycore.webster_walk(mats, phases, np.array([3.0]), word, z0)
    b = c.webster_walk(mats, phases, np.array([3.0]), word, z0)
    assert np.allclose(a, b, atol=1e-12)


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")
