"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (the lines are collected in the
terminal summary) or directly as ``python3 tests/test_acceptance.py``.
Each check is oracle based; the time budget is part of the criterion.
"""
import time
import warnings

import numpy as np
import pytest

from kobalab import automorphisms as au
from kobalab.domains import Ball, Ellipse, Polydisc, random_interior_points
from kobalab.dynamics import (classify, limit_set_sample, pingpong_witness, reduced_words,
                              translated_almost_geodesic, translation_length)
from kobalab.kobayashi import infinitesimal_metric, kobayashi_distance, visibility_probe
from kobalab.liegroup import (SU1kElement, a_t, ad_norm, classify_lie, distance_norm_fit, equivariance_residual,
                              jet_difference, jordan_decomposition, kak_decomposition, pu_equal, random_element)

BUDGET = 60.0
D, B2, E12 = Ball(1), Ball(2), Ellipse((1, 2))
h = au.h_a(0.5)


# ---------------------------------------------------------------------------
# oracles, written independently of the library


def ball_points(rng, d, n, rmax=0.95):
    V = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    return V * (rmax * rng.uniform(size=(n, 1)) ** (1 / (2 * d)))


def ball_metric_oracle(z, v):
    s = 1 - np.vdot(z, z).real
    return np.sqrt(np.vdot(v, v).real / s + abs(np.vdot(z, v)) ** 2 / s ** 2)


def ball_distance_oracle(z, w):
    # |phi_z(w)|^2 = 1 - (1 - |z|^2)(1 - |w|^2) / |1 - <z, w>|^2
    q = (1 - np.vdot(z, z).real) * (1 - np.vdot(w, w).real) / abs(1 - np.vdot(z, w)) ** 2
    return np.arctanh(np.sqrt(1 - q))


def poincare(a, b):
    return np.arctanh(abs(a - b) / abs(1 - np.conj(a) * b))


def contains(bracket, value, rel=1e-12):
    tol = rel * max(1.0, abs(value))
    return bracket.lower - tol <= value <= bracket.upper + tol


def finish(acceptance, number, title, ok, detail, t0, budget=BUDGET):
    elapsed = time.perf_counter() - t0
    ok = bool(ok) and elapsed <= budget
    acceptance(number, title, ok, f"{detail}; {elapsed:.1f}s of {budget:.0f}s")
    assert ok


# ---------------------------------------------------------------------------
# metric and distance oracles


def test_c01_ball_metric(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_rel, outside = 0.0, 0
    for d in (1, 2, 3):
        Z = ball_points(rng, d, 200)
        V = rng.normal(size=(200, d)) + 1j * rng.normal(size=(200, d))
        for z, v in zip(Z, V):
            b = infinitesimal_metric(Ball(d), z, v)
            exact = ball_metric_oracle(z, v)
            worst_rel = max(worst_rel, abs(b.estimate - exact) / exact)
            outside += not contains(b, exact)
    finish(acceptance, 1, "ball metric oracle", worst_rel <= 0.02 and outside == 0,
           f"worst rel err {worst_rel:.2e}, {outside} brackets miss", t0, budget=300.0)


def test_c02_ball_distance(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    Z, W = ball_points(rng, 2, 100), ball_points(rng, 2, 100)
    worst_rel, outside = 0.0, 0
    for z, w in zip(Z, W):
        b = kobayashi_distance(B2, z, w)
        exact = ball_distance_oracle(z, w)
        worst_rel = max(worst_rel, abs(b.estimate - exact) / exact)
        outside += not contains(b, exact)
    finish(acceptance, 2, "ball distance oracle", worst_rel <= 0.02 and outside == 0,
           f"worst rel err {worst_rel:.2e}, {outside} brackets miss", t0)


def test_c03_polydisc_product(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    Z = np.hstack([ball_points(rng, 1, 100), ball_points(rng, 1, 100)])
    W = np.hstack([ball_points(rng, 1, 100), ball_points(rng, 1, 100)])
    worst_rel = 0.0
    for z, w in zip(Z, W):
        exact = max(poincare(z[0], w[0]), poincare(z[1], w[1]))
        worst_rel = max(worst_rel, abs(kobayashi_distance(Polydisc(2), z, w).estimate - exact) / exact)
    finish(acceptance, 3, "polydisc product law", worst_rel <= 0.02, f"worst rel err {worst_rel:.2e}", t0)


# ---------------------------------------------------------------------------
# automorphisms


def test_c04_webster_group_law(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = {"composition": 0.0, "inverse": 0.0, "identity": 0.0, "interior": -np.inf, "boundary": 0.0}
    for E in (E12, Ellipse((1, 1, 3))):
        Z = random_interior_points(E, 1000, seed=4, max_radius=0.99)
        X = Z * E.ray_scales(Z)[:, None]
        for z, x in zip(Z, X):
            g1, g2 = au.random_webster(E, rng), au.random_webster(E, rng)
            worst["composition"] = max(worst["composition"], np.abs(au.compose(g1, g2)(z) - g1(g2(z))).max())
            worst["inverse"] = max(worst["inverse"], np.abs(au.inverse(g1)(g1(z)) - z).max(),
                                   np.abs(au.compose(g1, au.inverse(g1))(z) - z).max())
            worst["identity"] = max(worst["identity"], np.abs(au.identity_like(g1)(z) - z).max())
            worst["interior"] = max(worst["interior"], E.r(g1(z)))  # must stay negative
            worst["boundary"] = max(worst["boundary"], abs(E.r(au.apply(g1, x, check=False))))
    ok = (max(worst["composition"], worst["inverse"], worst["identity"], worst["boundary"]) <= 1e-9
          and worst["interior"] < 0)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    finish(acceptance, 4, "Webster group law", ok, detail, t0)


def test_c05_isometry_invariance(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    Z = random_interior_points(E12, 100, seed=5, max_radius=0.9)
    bad, worst = 0, 0.0
    for z, w in zip(Z[:50], Z[50:]):
        b = kobayashi_distance(E12, z, w)
        for _ in range(20):
            g = au.random_webster(E12, rng)
            c = kobayashi_distance(E12, g(z), g(w))
            gap = abs(c.estimate - b.estimate)
            worst = max(worst, gap / max(b.width + c.width, 1e-300))
            bad += gap > b.width + c.width
    finish(acceptance, 5, "isometry invariance on E(1,2)", bad == 0,
           f"{bad} of 1000 exceed the combined width, worst ratio {worst:.2e}", t0)


# ---------------------------------------------------------------------------
# dynamics


def test_c06_trichotomy(acceptance):
    t0 = time.perf_counter()
    rot, par = au.rotation(np.pi / 7), au.cayley_translation(1.0)
    cases = [
        (D, rot, [0.3], "elliptic", None, None),
        (D, par, [0.0], "parabolic", [1], [1]),
        (D, h, [0.0], "hyperbolic", [1], [-1]),
        (B2, au.lift_to_ball(rot, 2), [0.1, 0.3], "elliptic", None, None),
        (B2, au.lift_to_ball(par, 2), [0.1, 0.2j], "parabolic", [1, 0], [1, 0]),
        (B2, au.lift_to_ball(h, 2), [0.1, 0.3], "hyperbolic", [1, 0], [-1, 0]),
        (E12, au.webster_from_moebius(E12, rot), [0.3, 0.2], "elliptic", None, None),
        (E12, au.webster_from_moebius(E12, par), [0.1, 0.2], "parabolic", [1, 0], [1, 0]),
        (E12, au.webster_from_moebius(E12, h), [0.2, 0.3], "hyperbolic", [1, 0], [-1, 0]),
    ]
    wrong, worst = 0, 0.0
    for dom, g, z0, label, lp, lm in cases:
        rep = classify(dom, g, z0)
        wrong += rep.classification != label
        if lp is not None and rep.ell_plus is not None:
            worst = max(worst, np.linalg.norm(rep.ell_plus - lp), np.linalg.norm(rep.ell_minus - lm))
    finish(acceptance, 6, "trichotomy scenarios", wrong == 0 and worst <= 1e-6,
           f"{wrong} of {len(cases)} misclassified, fixed-point error {worst:.1e}", t0)


def test_c07_translation_length(acceptance):
    t0 = time.perf_counter()
    L = translation_length(D, h, [0], n_max=200)
    err_h = abs(L.estimate - np.arctanh(0.5))
    La = translation_length(B2, a_t(1.0, 2).to_moebius(), [0, 0], n_max=200)
    err_a = abs(La.estimate - 0.5)
    L2 = translation_length(D, au.power(h, 2), [0], n_max=200)
    # doubling law inside the combined brackets (plus roundoff)
    gap = abs(L2.estimate - 2 * L.estimate)
    room = L2.bracket.width + 2 * L.bracket.width + 1e-12
    ok = err_h <= 1e-3 and err_a <= 1e-3 and gap <= room
    finish(acceptance, 7, "translation length", ok,
           f"|L(h)-artanh .5| {err_h:.1e}, |L(a_1)-.5| {err_a:.1e}, |L(g^2)-2L| {gap:.1e}", t0)


def test_c08_translated_geodesic(acceptance):
    t0 = time.perf_counter()
    tg = translated_almost_geodesic(D, h, [0])
    ok = tg.equivariance_residual <= 1e-12 and tg.certificate == (1.05, 0.1) and max(tg.tail_diameter) < 1e-3
    finish(acceptance, 8, "translated almost-geodesic", ok,
           f"equivariance {tg.equivariance_residual:.1e}, certificate {tg.certificate}, "
           f"tail diameter {max(tg.tail_diameter):.1e}", t0)


def test_c09_visibility(acceptance):
    t0 = time.perf_counter()
    res = visibility_probe(E12, [1, 0], [-1, 0], n_levels=6)
    finish(acceptance, 9, "visibility probe on E(1,2)", res["pass"],
           f"level statistics max {max(res['statistics']):.2e}", t0)


def test_c10_limit_set(acceptance):
    t0 = time.perf_counter()
    gens = [au.webster_from_moebius(E12, h), au.webster_from_moebius(E12, au.rotation(1.0))]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pts, info = limit_set_sample(E12, gens, 1000, seed=10)
    # distance to the circle {(e^{i theta}, 0)}
    dist = np.hypot(np.abs(np.abs(pts[:, 0]) - 1), np.abs(pts[:, 1]))
    bins = np.floor((np.angle(pts[:, 0]) + np.pi) / (2 * np.pi / 64)).astype(int) % 64
    n_bins = len(set(bins.tolist()))
    ok = len(pts) == 1000 and dist.max() <= 1e-3 and n_bins >= 50
    finish(acceptance, 10, "limit set of E(1,2)", ok,
           f"{len(pts)} samples, max distance {dist.max():.1e}, {n_bins} of 64 bins", t0)


def test_c11_pingpong(acceptance):
    t0 = time.perf_counter()
    r = au.rotation(np.pi / 2)
    h2 = au.compose(au.compose(r, h), au.inverse(r))
    cert = pingpong_witness(D, h, h2, max_word_len=6)
    # brute-force oracle: every reduced word through matrix products and the exact disc distance
    g1, g2 = au.power(h, cert.powers[0]), au.power(h2, cert.powers[1])
    mats = {(0, 1): g1.matrix, (0, -1): np.linalg.inv(g1.matrix),
            (1, 1): g2.matrix, (1, -1): np.linalg.inv(g2.matrix)}
    words = list(reduced_words(2, 6))
    disp = []
    for word in words:
        M = np.eye(2, dtype=complex)
        for letter in word:
            M = M @ mats[letter]
        disp.append(np.arctanh(abs(M[1, 0] / M[0, 0])))  # image of 0 is M[1,0] / M[0,0]
    oracle = min(disp)
    ok = (cert.words_checked == len(words) == 1456 and cert.min_displacement > 1e-6
          and cert.min_displacement <= oracle * (1 + 1e-12) and oracle - cert.min_displacement <= 1e-6)
    finish(acceptance, 11, "ping-pong certificate", ok,
           f"{cert.words_checked} reduced words of length <= 6, powers {cert.powers}, "
           f"certified {cert.min_displacement:.4f} vs oracle {oracle:.4f}", t0)


# ---------------------------------------------------------------------------
# Lie group


def _lie_samples(k, rng, n=1000):
    """Random elements plus random conjugates of hyperbolic, elliptic and unipotent elements."""
    out = []
    for i in range(n):
        kind = i % 4
        if kind == 0:
            out.append((random_element(k, rng), None))
            continue
        c = random_element(k, rng, max_t=1.5)
        if kind == 1:
            x, label = a_t(rng.uniform(0.1, 3), k), "L-hyperbolic"
        elif kind == 2:
            x, label = SU1kElement.from_moebius(au.rotation(rng.uniform(-3, 3, size=k))), "L-elliptic"
        else:
            x, label = SU1kElement.from_moebius(au.cayley_translation(rng.uniform(0.2, 2), k)), "L-unipotent"
        out.append((c @ x @ c.inverse(), label))
    return out


def _eigen_consistent(label, g, tol=1e-6):
    mu = np.linalg.eigvals(g)
    mod = np.abs(mu)
    phases = mu / mod
    one_phase = np.abs(phases - phases[0]).max() <= tol
    if label == "L-hyperbolic":
        return mod.max() > 1 + tol and one_phase
    if label == "L-elliptic":
        return np.abs(mod - 1).max() <= tol
    if label == "L-unipotent":
        return np.abs(mu - mu[0]).max() <= 1e-4  # defective eigenvalues split like eps^(1/size)
    return not one_phase or np.abs(mod - 1).max() > tol


def test_c12_decompositions(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(12)
    worst = {"reconstruction": 0.0, "commutators": 0.0, "kak": 0.0, "t_unique": 0.0}
    negative_t = inconsistent = mislabeled = 0
    for k in (1, 2):
        for g, expected in _lie_samples(k, rng):
            jd = jordan_decomposition(g)
            kd = kak_decomposition(g)
            lab = classify_lie(g).label
            worst["reconstruction"] = max(worst["reconstruction"], jd.residuals["reconstruction"])
            worst["commutators"] = max(worst["commutators"], jd.residuals["commutators"])
            worst["kak"] = max(worst["kak"], kd.residuals["reconstruction"])
            worst["t_unique"] = max(worst["t_unique"], abs(kd.t - kd.residuals["t_from_singular_value"]))
            negative_t += kd.t < 0
            inconsistent += not _eigen_consistent(lab, g.matrix)
            mislabeled += expected is not None and lab != expected
    ok = max(worst.values()) <= 1e-9 and negative_t == 0 and inconsistent == 0 and mislabeled == 0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    finish(acceptance, 12, "Jordan and KAK decompositions", ok,
           f"{detail}, {inconsistent} labels inconsistent with eigenvalues, {mislabeled} conjugates mislabeled", t0)


def test_c13_distance_norm(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(13)
    fit = distance_norm_fit([random_element(2, rng) for _ in range(1000)])
    diag = max(abs(ball_distance_oracle(np.zeros(2), a_t(t, 2).to_moebius()(np.zeros(2))) - 0.5 * np.log(ad_norm(a_t(t, 2))))
               for t in np.linspace(0.05, 6, 60))
    ok = fit["violations"] == 0 and diag <= 1e-9
    finish(acceptance, 13, "distance-norm bound on Ball(2)", ok,
           f"alpha {fit['alpha']:.4f}, beta {fit['beta']:.2e}, {fit['violations']} violations, "
           f"diagonal residual {diag:.1e}", t0)


def test_c14_equivariance(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(1000):
        x0 = np.array([np.exp(1j * rng.uniform(-np.pi, np.pi)), 0])
        worst = max(worst, equivariance_residual(E12, x0, au.random_webster(E12, rng)))
    finish(acceptance, 14, "boundary equivariance on E(1,2)", worst <= 1e-9, f"worst F-residual {worst:.1e}", t0)


def test_c15_jets(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(15)
    smallest = np.inf
    for k in (1, 2):
        x = np.eye(k)[0]
        for _ in range(1000):
            phi1, phi2 = au.random_moebius(k, rng), au.random_moebius(k, rng)
            smallest = min(smallest, jet_difference(phi1, phi2, x, order=2))
    # identity and a parabolic fixing 1: equal 1-jets, different elements
    u = au.cayley_translation(0.4)
    ident = au.moebius_identity(1)
    one = jet_difference(ident, u, [1], order=1)
    two = jet_difference(ident, u, [1], order=2)
    distinct = not pu_equal(SU1kElement.from_moebius(ident), SU1kElement.from_moebius(u))
    ok = smallest > 1e-8 and one <= 1e-12 and two > 1e-8 and distinct
    finish(acceptance, 15, "2-jet injectivity", ok,
           f"smallest random 2-jet difference {smallest:.2e}; shared 1-jet pair differs by {one:.1e} "
           f"at order 1 and {two:.2f} at order 2", t0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
