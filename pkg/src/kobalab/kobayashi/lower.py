"""Certified lower bounds from holomorphic maps out of the domain.

If ``pi: Omega -> D`` is holomorphic, then ``k_Omega(z; v) >= k_D(pi z; d pi v)``
and ``K_Omega(z, w) >= K_D(pi z, pi w)``. The library used here:

* linear functionals ``zeta -> <zeta, e> / h(e)`` where ``h`` is an upper
  bound of the support function, so the image lies in the unit disc;
* supporting half-planes ``Re sum (zeta_i - x_i) dr/dz_i(x) < 0`` at boundary
  points ``x`` (valid because the canonical ``r`` is convex);
* the concentric circumscribing ball, whose metric and distance are known in
  closed form.

All maps are evaluated on points already in normal position (see
:mod:`kobalab.kobayashi.charts`), which makes the functional bound exact on
balls and polydiscs.
"""
from __future__ import annotations

import numpy as np
from scipy import optimize

from ..domains import Domain

SLACK = 1e-12


def ball_metric(z, v, R=1.0):
    """``k`` of the ball of radius ``R`` centred at the origin."""
    z = np.asarray(z, dtype=complex) / R
    v = np.asarray(v, dtype=complex) / R
    n2 = 1.0 - np.vdot(z, z).real
    return float(np.sqrt(np.vdot(v, v).real / n2 + abs(np.vdot(z, v)) ** 2 / n2 ** 2))


def ball_distance(z, w, R=1.0):
    """``K`` of the ball of radius ``R``: ``artanh rho`` with ``rho = |phi_z(w)|``.

    Nearby points use ``rho^2 |1 - <w,z>|^2 = |z - w|^2 - |z ^ w|^2`` (Lagrange
    identity); far apart ones use ``1 - rho^2 = (1-|z|^2)(1-|w|^2) / |1 - <w,z>|^2``
    and ``artanh rho = log((1 + rho)^2 / (1 - rho^2)) / 2``. Both keep full
    relative accuracy in their range.
    """
    z = np.asarray(z, dtype=complex) / R
    w = np.asarray(w, dtype=complex) / R
    den = abs(1 - np.vdot(z, w))
    d2 = np.vdot(z - w, z - w).real
    wedge = np.outer(z, w) - np.outer(w, z)
    rho = np.sqrt(max(0.0, d2 - 0.5 * np.vdot(wedge, wedge).real)) / den
    if rho < 0.5:
        return float(np.arctanh(rho))
    nz, nw = np.linalg.norm(z), np.linalg.norm(w)
    q = (1 - nz) * (1 + nz) * (1 - nw) * (1 + nw) / den ** 2
    if q <= 0:
        return float("inf")
    rho = np.sqrt(max(0.0, 1 - q))
    return float(0.5 * np.log((1 + rho) ** 2 / q))


def disc_pseudo(a, b):
    """Pseudo-hyperbolic distance ``|a - b| / |1 - a conj(b)|`` in the unit disc (broadcasting)."""
    return np.abs(a - b) / np.abs(1 - a * np.conj(b))


def _functional_values(domain, E, pts):
    h = domain.support_batch(E)
    ok = h > 0
    vals = np.full((E.shape[0], len(pts)), 0j)
    vals[ok] = (np.asarray(pts) @ E[ok].conj().T).T / h[ok, None]
    return vals, h


def _candidate_functionals(domain, base, extra, rng, n_random):
    d = domain.dim
    cands = [np.eye(d, dtype=complex)]
    for x in list(extra) + [base]:
        x = np.asarray(x, dtype=complex)
        if np.linalg.norm(x) > 0:
            cands.append(x[None, :])
    _, grad = domain.r_batch(np.asarray(base, dtype=complex)[None, :])
    if np.linalg.norm(grad) > 0:
        cands.append(grad.conj())
    if n_random:
        cands.append(rng.normal(size=(n_random, d)) + 1j * rng.normal(size=(n_random, d)))
    E = np.vstack(cands)
    return E / np.linalg.norm(E, axis=1, keepdims=True)


def _boundary_touch_points(domain, base, dirs):
    dirs = np.asarray(dirs, dtype=complex)
    dirs = dirs[np.linalg.norm(dirs, axis=1) > 0]
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    t = domain.ray_hits(np.broadcast_to(base, dirs.shape), dirs)
    return base[None, :] + t[:, None] * dirs


def _halfplane_forms(domain, X):
    """``(x, grad)`` pairs giving ``Re sum (zeta - x) grad < 0`` on the domain."""
    _, grads = domain.r_batch(X)
    keep = np.linalg.norm(grads, axis=1) > 0
    return X[keep], grads[keep]


def _refine(objective, e0, maxfev):
    d = e0.size
    x0 = np.concatenate([e0.real, e0.imag])
    res = optimize.minimize(lambda x: -objective(x[:d] + 1j * x[d:]), x0, method="Nelder-Mead",
                            options={"maxfev": maxfev, "xatol": 1e-9, "fatol": 1e-13})
    return -res.fun


def metric_lower(domain: Domain, z, v, seed=0, n_random=32, refine=True) -> float:
    """Lower bound for ``k_domain(z; v)`` (``z`` in normal position)."""
    z = np.asarray(z, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if not np.any(v):
        return 0.0
    rng = np.random.default_rng(seed)
    best = 0.0
    # circumscribing ball
    best = max(best, ball_metric(z, v, domain.circumradius()))
    # linear functionals into the disc
    E = _candidate_functionals(domain, z, [v], rng, n_random)
    vals, h = _functional_values(domain, E, [z])
    pz = vals[:, 0]
    dv = (E.conj() @ v) / np.where(h > 0, h, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        kk = np.abs(dv) / (1 - np.abs(pz) ** 2)
    kk = np.where(np.abs(pz) < 1, kk, 0.0)
    i = int(np.argmax(kk))
    best = max(best, float(kk[i]))
    if refine:
        def obj(e):
            hh = domain.support(e)
            if hh <= 0:
                return 0.0
            p = np.vdot(e, z) / hh
            if abs(p) >= 1:
                return 0.0
            return abs(np.vdot(e, v)) / hh / (1 - abs(p) ** 2)

        best = max(best, _refine(obj, E[i], 40 * domain.dim))
    # supporting half-planes at boundary points hit from z
    X = _boundary_touch_points(domain, z, np.vstack([v[None, :], E[: 2 * domain.dim + 2]]))
    X, G = _halfplane_forms(domain, X)
    if len(X):
        a = np.sum((z[None, :] - X) * G, axis=1)
        dv = G @ v
        with np.errstate(divide="ignore", invalid="ignore"):
            kk = np.abs(dv) / (2 * np.abs(a.real))
        kk = np.where(a.real < 0, kk, 0.0)
        best = max(best, float(np.max(kk)))
    return best * (1 - SLACK)


def distance_lower(domain: Domain, z, w, seed=0, n_random=32, refine=True) -> float:
    """Lower bound for ``K_domain(z, w)`` (``z`` in normal position)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.array_equal(z, w):
        return 0.0
    rng = np.random.default_rng(seed)
    best = ball_distance(z, w, domain.circumradius())
    E = _candidate_functionals(domain, z, [w - z, w], rng, n_random)
    vals, _ = _functional_values(domain, E, [z, w])
    rho = disc_pseudo(vals[:, 0], vals[:, 1])
    rho = np.where((np.abs(vals[:, 0]) < 1) & (np.abs(vals[:, 1]) < 1), rho, 0.0)
    i = int(np.argmax(rho))
    best = max(best, float(np.arctanh(min(rho[i], 1.0))))
    if refine:
        def obj(e):
            hh = domain.support(e)
            if hh <= 0:
                return 0.0
            a, b = np.vdot(e, z) / hh, np.vdot(e, w) / hh
            if abs(a) >= 1 or abs(b) >= 1:
                return 0.0
            return float(np.arctanh(min(disc_pseudo(a, b), 1.0 - 1e-16)))

        best = max(best, _refine(obj, E[i], 40 * domain.dim))
    X = _boundary_touch_points(domain, z, np.vstack([(w - z)[None, :], E[: 2 * domain.dim + 2]]))
    X2 = _boundary_touch_points(domain, w, np.vstack([(w - z)[None, :], E[: 2 * domain.dim + 2]]))
    X, G = _halfplane_forms(domain, np.vstack([X, X2]))
    if len(X):
        a = np.sum((z[None, :] - X) * G, axis=1)
        b = np.sum((w[None, :] - X) * G, axis=1)
        ok = (a.real < 0) & (b.real < 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.abs(a - b) / np.abs(a + np.conj(b))
        rho = np.where(ok, rho, 0.0)
        best = max(best, float(np.arctanh(min(rho.max(), 1.0))))
    return best * (1 - SLACK)


def distance_lower_many(domain: Domain, Z, W, seed=0, n_random=16) -> np.ndarray:
    """Vectorized distance lower bounds over row pairs using a fixed functional family (no refinement)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    rng = np.random.default_rng(seed)
    d = domain.dim
    R = domain.circumradius()
    out = np.array([ball_distance(a, b, R) for a, b in zip(Z, W)])
    E = np.vstack([np.eye(d, dtype=complex), W - Z, rng.normal(size=(n_random, d)) + 1j * rng.normal(size=(n_random, d))])
    nrm = np.linalg.norm(E, axis=1)
    E = E[nrm > 0] / nrm[nrm > 0, None]
    h = domain.support_batch(E)
    A = (Z @ E.conj().T) / h[None, :]
    B = (W @ E.conj().T) / h[None, :]
    rho = disc_pseudo(A, B)
    rho = np.where((np.abs(A) < 1) & (np.abs(B) < 1), rho, 0.0).max(axis=1)
    out = np.maximum(out, np.arctanh(np.minimum(rho, 1.0)))
    same = np.all(Z == W, axis=1)
    out[same] = 0.0
    return out * (1 - SLACK)
