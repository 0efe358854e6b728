"""Kobayashi metric, curve length and distance with certified brackets."""
from __future__ import annotations

import numpy as np
from scipy import optimize

from functools import lru_cache

from ..domains import Ball, Domain, Ellipse, Polydisc, as_point, boundary_distance_lower
from ..errors import PreconditionError
from .charts import model_domain, normalizing_chart
from .discs import metric_disc, slice_polygon, two_point_disc
from .lower import SLACK, ball_distance, ball_metric, distance_lower, metric_lower
from .types import AnalyticDisc, MetricBracket, PathCurve

METRIC_DEFAULTS = {"degree": 8, "samples": 256, "iterations": 150, "seed": 0, "starts": 2}
DISTANCE_DEFAULTS = {"degree": 8, "samples": 128, "iterations": 200, "seed": 0}


def _require_inside(domain, z, name="z"):
    z = as_point(z, domain.dim)
    if domain.r(z) >= 0:
        raise PreconditionError(f"{name} is not inside the domain")
    return z


def _canonical_direction(v):
    """``(|v|, u, err)``: a unit direction shared by ``v`` and every ``c v``.

    The phase of the largest entry is removed and the result snapped to a
    grid of ``2^-40``, so that the optimizer sees bit-identical input for
    ``v`` and ``c v``; ``err = |v/|v| - u|`` (up to the phase) is added to the
    bracket as ``k(z; v - |v| u) <= |v| err / delta(z)``.
    """
    nv = np.linalg.norm(v)
    u = v / nv
    j = int(np.argmax(np.round(np.abs(u), 12)))
    u = u * np.exp(-1j * np.angle(u[j]))
    q = np.round(u * 2.0 ** 40) / 2.0 ** 40
    q = q / np.linalg.norm(q)
    return nv, q, float(np.linalg.norm(u - q))


def infinitesimal_metric(domain: Domain, z, v, degree=None, samples=None, iterations=None, seed=None,
                         starts=None) -> MetricBracket:
    """Bracket for ``k_domain(z; v)``.

    ``z`` is first moved to normal position by an automorphism. On balls and
    polydiscs the extremal discs are then linear and both ends of the bracket
    are closed form; on ellipses the upper end comes from the certified
    polynomial-disc search and the lower end from the map library.
    """
    p = dict(METRIC_DEFAULTS)
    p.update({k: val for k, val in dict(degree=degree, samples=samples, iterations=iterations, seed=seed,
                                        starts=starts).items() if val is not None})
    z = _require_inside(domain, z)
    v = as_point(v, domain.dim)
    if not np.any(v):
        raise PreconditionError("v must be nonzero")
    chart = normalizing_chart(domain, z)
    T = chart.target
    zp = chart.forward(z)[0]
    vp = chart.push(z, v)
    nv, vhat, snap = _canonical_direction(vp)
    info = {"params": p, "seed": p["seed"]}
    if isinstance(T, Ball):
        exact = ball_metric(zp, vhat)
        lower, upper = exact * (1 - SLACK), exact * (1 + SLACK)
        info["method"] = "closed-form"
    elif isinstance(T, Polydisc):
        exact = float(np.max(np.abs(vhat) / (1 - np.abs(zp) ** 2)))
        lower, upper = exact * (1 - SLACK), exact * (1 + SLACK)
        info["method"] = "closed-form"
    else:
        disc, kf, dinfo = metric_disc(T, zp, vhat, degree=p["degree"], samples=p["samples"], starts=p["starts"],
                                      seed=p["seed"], maxiter=p["iterations"])
        upper = kf
        lower = metric_lower(T, zp, vhat, seed=p["seed"])
        info.update({"method": "disc-search", "disc": AnalyticDisc(disc.coefficients, disc.centre, chart), **dinfo})
        if snap:
            pad = snap * T.gradient_lipschitz() / abs(T.r(zp))
            upper += pad
            lower = max(lower - pad, 0.0)
        lower = min(lower, upper)
    return MetricBracket(upper * nv, lower * nv, upper * nv, info)


# ---------------------------------------------------------------------------
# distance


def _line_discs(zp, wp):
    """Two-point data of the linear disc ``zeta -> zeta * w / |w|`` through ``0`` and ``w``."""
    n = np.linalg.norm(wp)
    coeffs = np.zeros((2, zp.size), dtype=complex)
    coeffs[0] = zp
    coeffs[1] = (wp - zp) / n
    return coeffs, 0.0, complex(n)


def kobayashi_distance(domain: Domain, z, w, degree=None, samples=None, iterations=None, seed=None,
                       method="disc", segments=64, rounds=3) -> MetricBracket:
    """Bracket for ``K_domain(z, w)``.

    ``method="disc"`` (default) bounds the distance from above by a certified
    analytic disc through both points. ``method="path"`` instead refines a
    piecewise-linear path and reports its quadrature length as the upper end.
    The lower end always comes from the map library.
    """
    p = dict(DISTANCE_DEFAULTS)
    p.update({k: val for k, val in dict(degree=degree, samples=samples, iterations=iterations,
                                        seed=seed).items() if val is not None})
    z = _require_inside(domain, z)
    w = _require_inside(domain, w, "w")
    info = {"params": p, "seed": p["seed"], "method": method}
    if np.array_equal(z, w):
        return MetricBracket(0.0, 0.0, 0.0, info)
    chart = normalizing_chart(domain, z)
    T = chart.target
    zp, wp = chart.forward(np.vstack([z, w]))
    info["chart"] = chart
    if method == "path":
        path = refine_path(domain, z, w, segments=segments, rounds=rounds)
        L = path_length(domain, path, cheap=True)
        lower = distance_lower(T, zp, wp, seed=p["seed"])
        info["path"] = path
        return MetricBracket(L.upper, min(lower, L.upper), L.upper, info)
    if method != "disc":
        raise PreconditionError(f"unknown distance method {method!r}")
    if isinstance(T, Ball):
        exact = ball_distance(zp, wp)
        lower, upper = exact * (1 - SLACK), exact * (1 + SLACK)
        coeffs, pp, qq = _line_discs(zp, wp)
        info.update({"disc": AnalyticDisc(coeffs, 0.0, chart), "p": pp, "q": qq, "shrink": 1.0})
    elif isinstance(T, Polydisc):
        exact = float(np.max(np.arctanh(np.abs(wp))))
        lower, upper = exact * (1 - SLACK), exact * (1 + SLACK)
        t = float(np.max(np.abs(wp)))
        coeffs = np.zeros((2, T.dim), dtype=complex)
        coeffs[1] = wp / t
        info.update({"disc": AnalyticDisc(coeffs, 0.0, chart), "p": 0.0, "q": complex(t), "shrink": 1.0})
    else:
        upper, lower, coeffs, dinfo = _ellipse_distance(T, zp, wp, p)
        info.update({"disc": AnalyticDisc(coeffs, 0.0, chart), **dinfo})
    return MetricBracket(upper, lower, upper, info)


GRID = 2.0 ** -40


def _torus_normal_form(zp, wp):
    """Phases ``e^{i theta_j}`` (a coordinate rotation, an automorphism of every
    generalized ellipse) making the larger of ``zp_j``, ``wp_j`` real positive."""
    pick = np.where(np.abs(zp) >= np.abs(wp), zp, wp)
    return np.where(np.abs(pick) > 0, np.exp(-1j * np.angle(pick)), 1.0)


def _snap(x):
    return np.round(x / GRID) * GRID + 0.0  # + 0.0 clears signed zeros from the key


def _ellipse_distance(T, zp, wp, p):
    """Disc upper bound and library lower bound on an ellipse, computed in a normal form.

    The pair is rotated to its torus normal form and snapped to a ``2^-40``
    grid, so that pairs related by an automorphism reach the disc search as
    bit-identical input and share one memoized result. Moving the endpoints by
    ``eps`` changes ``K`` by at most ``eps / (delta - eps)`` each, with
    ``delta`` a certified boundary-distance lower bound; this pad widens the
    bracket on both sides.
    """
    rot = _torus_normal_form(zp, wp)
    zc, wc = zp * rot, wp * rot
    zs, ws = _snap(zc), _snap(wc)
    dz, dw = np.linalg.norm(zs - zc), np.linalg.norm(ws - wc)
    delta = boundary_distance_lower(T, np.vstack([zc, wc]))
    if min(delta[0] - dz, delta[1] - dw) <= 1e3 * max(dz, dw, GRID):
        zs, ws, pad = zc, wc, 0.0  # too close to the boundary to snap safely
    else:
        pad = dz / (delta[0] - dz) + dw / (delta[1] - dw)
    key = (p["degree"], p["samples"], p["seed"], p["iterations"])
    upper, lower, coeffs, dinfo = _ellipse_distance_cached(T, zs.tobytes(), ws.tobytes(), key)
    dinfo = dict(dinfo, normal_form_pad=pad)
    # disc coefficients back to the unrotated normal position
    return upper + pad, max(lower - pad, 0.0), coeffs * np.conj(rot)[None, :], dinfo


@lru_cache(maxsize=4096)
def _ellipse_distance_cached(T, zb, wb, key):
    zs = np.frombuffer(zb, dtype=complex).copy()
    ws = np.frombuffer(wb, dtype=complex).copy()
    degree, samples, seed, iterations = key
    upper, disc, dinfo = two_point_disc(T, zs, ws, degree=degree, samples=samples, seed=seed, maxiter=iterations)
    lower = min(distance_lower(T, zs, ws, seed=seed), upper)
    return upper, lower, disc.coefficients, dinfo


# ---------------------------------------------------------------------------
# cheap certified metric upper bound


def line_disc_metric_upper(domain: Domain, x, v, n=128) -> float:
    """Certified upper bound for ``k(x; v)`` from round discs in the complex line ``x + C v``.

    The slice polygon is inscribed in the (convex) slice, so any round disc in
    the polygon lies in the domain; the best disc ``D(c, rho)`` containing ``x``
    gives ``k(x; v) <= |v| rho / (rho^2 - |c|^2)``.
    """
    x = as_point(x, domain.dim)
    v = as_point(v, domain.dim)
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0
    u = v / nv
    _, normals, offsets = slice_polygon(domain, x, u, n)

    def k_of(c):
        rho = np.min(offsets - np.real(np.conj(normals) * c))
        if rho <= abs(c):
            return np.inf
        return rho / (rho * rho - abs(c) ** 2)

    res = optimize.minimize(lambda y: k_of(y[0] + 1j * y[1]), [0.0, 0.0], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxfev": 300})
    return float(nv * min(res.fun, k_of(0.0)) * (1 + SLACK))


def metric_bracket_fast(domain: Domain, x, v) -> MetricBracket:
    """Metric bracket without the disc search: closed forms on balls and polydiscs,
    the line-disc bound and the map library elsewhere."""
    model, to_model, _, push = model_domain(domain)
    if isinstance(model, (Ball, Polydisc)):
        xm = to_model(x)[0]
        vm = push(as_point(x), as_point(v))
        if isinstance(model, Ball):
            exact = ball_metric(xm, vm)
        else:
            exact = float(np.max(np.abs(vm) / (1 - np.abs(xm) ** 2)))
        return MetricBracket(exact, exact * (1 - SLACK), exact * (1 + SLACK))
    chart = normalizing_chart(domain, x)
    T = chart.target
    xp = chart.forward(x)[0]
    vp = chart.push(x, v)
    up = line_disc_metric_upper(T, xp, vp)
    lo = min(metric_lower(T, xp, vp, refine=False), up)
    return MetricBracket(up, lo, up)


# ---------------------------------------------------------------------------
# curves


def path_length(domain: Domain, path: PathCurve, cheap=False, **params) -> MetricBracket:
    """Length of a sampled curve by Simpson's rule on each segment of its polygonal interpolation.

    Each segment ``x_i -> x_{i+1}`` contributes
    ``(k(x_i; D) + 4 k(m_i; D) + k(x_{i+1}; D)) / 6`` with ``D = x_{i+1} - x_i`` and
    ``m_i`` its midpoint; the lower and upper ends integrate the metric
    brackets the same way.
    """
    path.validate(domain)
    P = path.points
    lo = up = est = 0.0
    for i in range(len(P) - 1):
        D = P[i + 1] - P[i]
        if not np.any(D):
            continue
        nodes = [P[i], 0.5 * (P[i] + P[i + 1]), P[i + 1]]
        weights = [1 / 6, 4 / 6, 1 / 6]
        for x, wt in zip(nodes, weights):
            b = metric_bracket_fast(domain, x, D) if cheap else infinitesimal_metric(domain, x, D, **params)
            lo += wt * b.lower
            up += wt * b.upper
            est += wt * b.estimate
    return MetricBracket(est, lo, up)


def refine_path(domain: Domain, z, w, segments=64, rounds=3) -> PathCurve:
    """Piecewise-linear path from ``z`` to ``w`` refined by node-wise coordinate descent.

    Each interior node is moved (one real coordinate at a time, golden-section
    style step halving) to lower the sum of its two adjacent segment costs,
    with segment cost ``|D| * k_upper(midpoint; D)`` from the line-disc bound.
    """
    z = _require_inside(domain, z)
    w = _require_inside(domain, w, "w")
    t = np.linspace(0.0, 1.0, segments + 1)
    P = z[None, :] + t[:, None] * (w - z)[None, :]
    d = domain.dim

    def seg_cost(a, b):
        D = b - a
        if not np.any(D):
            return 0.0
        m = 0.5 * (a + b)
        if domain.r(m) >= 0:
            return np.inf
        return metric_bracket_fast(domain, m, D).upper

    step0 = np.linalg.norm(w - z) / segments
    for _ in range(rounds):
        for i in range(1, segments):
            best = seg_cost(P[i - 1], P[i]) + seg_cost(P[i], P[i + 1])
            step = step0
            while step > 1e-3 * step0:
                moved = False
                for j in range(2 * d):
                    for sgn in (1, -1):
                        trial = P[i].copy()
                        trial[j % d] += sgn * step * (1 if j < d else 1j)
                        if domain.r(trial) >= 0:
                            continue
                        c = seg_cost(P[i - 1], trial) + seg_cost(trial, P[i + 1])
                        if c < best:
                            best, P[i], moved = c, trial, True
                if not moved:
                    step *= 0.5
    # reparameterize by accumulated (upper) length
    seg = np.array([seg_cost(P[i], P[i + 1]) for i in range(segments)])
    times = np.concatenate([[0.0], np.cumsum(np.maximum(seg, 1e-15))])
    return PathCurve(times, P)
