"""Polynomial analytic discs: certification and extremal searches.

Certification. For a polynomial ``g`` and a convex (hence plurisubharmonic)
defining function ``r``, ``zeta -> r(g(zeta))`` is subharmonic, so its maximum
over the closed unit disc is attained on the circle. On the circle,
``theta -> r(g(e^{i theta}))`` is sampled at ``M`` equally spaced angles and the
gap between samples is closed by ``h^2/8 * sup |d^2/d theta^2 r(g)|``, with
the second derivative bounded from the coefficient sums
``A = sum |c_j|, B = sum j |c_j|, C = sum j^2 |c_j|`` of every coordinate.
If the resulting bound ``U`` is not negative, the disc is shrunk towards its
base point ``z``: by convexity ``r(z + s (g - z)) <= (1 - s) r(z) + s U``.

Searches. Both searches use SLSQP with analytic constraint Jacobians on a
coarse sample of the circle, then certify the result on a dense one.

* metric: ``g(zeta) = z + s v (zeta - c) + sum_{j>=2} b_j (zeta - c)^j``, composed
  with ``phi_c``, maximizing ``|f'(0)| = s (1 - c^2)``;
* distance: ``g(zeta) = z + (w - z)(zeta - p)/(q - p) + (zeta - p)(zeta - q) sum_j b_j zeta^j``,
  minimizing the pseudo-hyperbolic distance between ``p`` and ``q``.
"""
from __future__ import annotations

import warnings
from math import comb

import numpy as np
from scipy import optimize

from ..domains import Ball, Domain, Polydisc
from .lower import disc_pseudo
from .types import AnalyticDisc

CERT_SAMPLES = 8192
CERT_SAMPLES_MAX = 1 << 17


# ---------------------------------------------------------------------------
# certification


def circle_values(coeffs, M):
    """``g(e^{2 pi i k / M})`` for ``k = 0..M-1`` via one FFT per coordinate."""
    coeffs = np.atleast_2d(coeffs)
    N1 = coeffs.shape[0]
    if M < N1:
        raise ValueError("need at least degree + 1 samples")
    padded = np.zeros((M, coeffs.shape[1]), dtype=complex)
    padded[:N1] = coeffs
    return M * np.fft.ifft(padded, axis=0)


def second_derivative_bound(domain: Domain, coeffs) -> float:
    """Upper bound for ``|d^2/d theta^2 r(g(e^{i theta}))|`` (one smooth piece for the polydisc)."""
    c = np.abs(np.atleast_2d(coeffs))
    j = np.arange(c.shape[0], dtype=float)[:, None]
    A = c.sum(axis=0)
    B = (j * c).sum(axis=0)
    C = (j * j * c).sum(axis=0)
    if isinstance(domain, Polydisc):
        m = np.ones(domain.dim)
        R = 1.0
    elif isinstance(domain, Ball):
        m = np.ones(domain.dim)
        R = domain.radius
    else:
        m = np.asarray(domain.exponents, dtype=float)
        R = 1.0
    per = (m * A ** (2 * m - 2) * (2 * A * C + 2 * B * B) + 4 * m * (m - 1) * A ** (2 * m - 2) * B * B) / R ** (2 * m)
    return float(per.max() if isinstance(domain, Polydisc) else per.sum())


def circle_max_bound(domain: Domain, coeffs, M=CERT_SAMPLES, target=0.0):
    """Certified upper bound of ``max_{|zeta|=1} r(g(zeta))``.

    The sample count is doubled (up to ``CERT_SAMPLES_MAX``) while the
    interpolation slack is what keeps the bound above ``target``.
    """
    K = second_derivative_bound(domain, coeffs)
    while True:
        vals = domain.r_batch(circle_values(coeffs, M))[0]
        slack = (2 * np.pi / M) ** 2 / 8 * K
        U = float(vals.max() + slack)
        if U < target or vals.max() >= target or M >= CERT_SAMPLES_MAX:
            return U, M
        M *= 2


def shrink_factor(r_base, U):
    """Largest ``s`` with ``(1 - s) r_base + s U < 0`` (1 if ``U < 0``)."""
    if U < 0:
        return 1.0
    return float(-r_base / (U - r_base) * (1 - 1e-12))


def shifted_powers(c, N):
    """``P[j, i]`` = coefficient of ``zeta^i`` in ``(zeta - c)^j`` for ``0 <= i, j <= N``."""
    P = np.zeros((N + 1, N + 1))
    for j in range(N + 1):
        for i in range(j + 1):
            P[j, i] = comb(j, i) * (-c) ** (j - i)
    return P


# ---------------------------------------------------------------------------
# metric discs


def _metric_coeffs(z, vhat, s, c, B, N):
    """Coefficients (in zeta) of ``z + s v (zeta - c) + sum_{j=2}^N B[j-2] (zeta - c)^j``."""
    P = shifted_powers(c, N)
    coeffs = np.zeros((N + 1, z.size), dtype=complex)
    coeffs[0] += z
    coeffs += np.outer(P[1], s * vhat)
    if N >= 2:
        coeffs += P[2:].T @ B
    return coeffs


class _MetricProblem:
    def __init__(self, domain, z, vhat, N, M, eps):
        self.domain, self.z, self.vhat, self.N, self.eps = domain, z, vhat, N, eps
        self.d = z.size
        self.nb = max(N - 1, 0)
        theta = 2 * np.pi * np.arange(M) / M
        self.ei = np.exp(1j * theta)

    def unpack(self, x):
        nbd = self.nb * self.d
        B = (x[2:2 + nbd] + 1j * x[2 + nbd:]).reshape(self.nb, self.d)
        return x[0], x[1], B

    def curve(self, x):
        s, c, B = self.unpack(x)
        w = self.ei - c
        P = w[:, None] ** np.arange(2, self.N + 1)[None, :]
        return self.z + s * w[:, None] * self.vhat + P @ B, w, P, B, s, c

    def cons(self, x):
        G = self.curve(x)[0]
        return -self.eps - self.domain.r_batch(G)[0]

    def cons_jac(self, x):
        G, w, P, B, s, c = self.curve(x)
        _, gr = self.domain.r_batch(G)
        M = G.shape[0]
        J = np.empty((M, x.size))
        J[:, 0] = 2 * np.real((gr @ self.vhat) * w)
        if self.nb:
            dP = np.arange(2, self.N + 1)[None, :] * w[:, None] ** np.arange(1, self.N)[None, :]
            dG_dc = -s * self.vhat[None, :] - dP @ B
        else:
            dG_dc = np.broadcast_to(-s * self.vhat[None, :], G.shape)
        J[:, 1] = 2 * np.real(np.sum(gr * dG_dc, axis=1))
        nbd = self.nb * self.d
        if nbd:
            prod = P[:, :, None] * gr[:, None, :]
            J[:, 2:2 + nbd] = 2 * np.real(prod).reshape(M, -1)
            J[:, 2 + nbd:] = -2 * np.imag(prod).reshape(M, -1)
        return -J

    @staticmethod
    def obj(x):
        return -x[0] * (1 - x[1] ** 2)

    @staticmethod
    def obj_jac(x):
        g = np.zeros_like(x)
        g[0] = -(1 - x[1] ** 2)
        g[1] = 2 * x[0] * x[1]
        return g


def _line_inradius(domain, z, u, n=64):
    """Smallest boundary hit from ``z`` along ``e^{i theta} u`` (a sampled, not certified, radius)."""
    th = 2 * np.pi * np.arange(n) / n
    U = np.exp(1j * th)[:, None] * u[None, :]
    return float(domain.ray_hits(np.broadcast_to(z, U.shape), U).min())


def _run_slsqp(fun, jac, x0, cons, bounds, maxiter):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return optimize.minimize(fun, x0, jac=jac, constraints=cons, bounds=bounds, method="SLSQP",
                                 options={"maxiter": maxiter, "ftol": 1e-13})


def metric_disc(domain: Domain, z, vhat, degree=8, samples=256, starts=2, seed=0, maxiter=150):
    """Search for a disc through ``z`` with large derivative along the unit vector ``vhat``.

    Returns ``(disc, k_factor, info)``: the certified disc (after shrinking if
    needed) and ``1/|f'(0)|``, so that ``k(z; v) <= |v| * k_factor``.
    """
    z = np.asarray(z, dtype=complex)
    vhat = np.asarray(vhat, dtype=complex)
    d = z.size
    r_z = domain.r(z)
    eps = min(1e-6, 1e-3 * abs(r_z))
    rho = _line_inradius(domain, z, vhat)
    rng = np.random.default_rng(seed)
    # affine start: a round disc in the complex line, already feasible
    best = (0.9 * rho, 0.0, np.zeros((0, d), dtype=complex), 1)
    stages = sorted({1, min(4, degree), degree})
    x_prev = None
    info = {"stages": [], "starts": starts}
    for N in stages:
        prob = _MetricProblem(domain, z, vhat, N, max(samples, 4 * N), eps)
        nbd = prob.nb * d
        bounds = [(1e-12, None), (-0.999, 0.999)] + [(None, None)] * (2 * nbd)
        seeds = []
        if x_prev is None:
            seeds.append(np.concatenate([[0.9 * rho, 0.0], np.zeros(2 * nbd)]))
        else:
            s0, c0, B0 = x_prev
            B = np.zeros((prob.nb, d), dtype=complex)
            B[: B0.shape[0]] = B0
            seeds.append(np.concatenate([[s0, c0], B.real.ravel(), B.imag.ravel()]))
        if N == degree:
            for _ in range(starts - 1):
                x = seeds[0].copy()
                x[2:] += 0.05 * rho * rng.normal(size=2 * nbd)
                x[1] = np.clip(x[1] + 0.05 * rng.normal(), -0.9, 0.9)
                seeds.append(x)
        cons = [{"type": "ineq", "fun": prob.cons, "jac": prob.cons_jac}]
        for x0 in seeds:
            res = _run_slsqp(prob.obj, prob.obj_jac, x0, cons, bounds, maxiter)
            s, c, B = prob.unpack(res.x)
            feasible = prob.cons(res.x).min() >= -1e-9
            info["stages"].append({"degree": N, "status": int(res.status), "nit": int(res.nit),
                                   "value": float(s * (1 - c * c)), "feasible": bool(feasible)})
            if feasible and s * (1 - c * c) > best[0] * (1 - best[1] ** 2):
                best = (s, c, B, N)
        x_prev = best[:3]
    s, c, B, N = best
    coeffs = _metric_coeffs(z, vhat, s, c, B, B.shape[0] + 1)
    U, Mc = circle_max_bound(domain, coeffs)
    shrink = shrink_factor(r_z, U)
    if shrink < 1:
        coeffs = coeffs * shrink
        coeffs[0] += (1 - shrink) * z
    disc = AnalyticDisc(coeffs, centre=float(c))
    info.update({"certified_max_r": U, "cert_samples": Mc, "shrink": shrink, "degree": int(coeffs.shape[0] - 1)})
    return disc, 1.0 / (s * shrink * (1 - c * c)), info


# ---------------------------------------------------------------------------
# two-point discs


def _two_point_coeffs(z, w, p, q, B):
    """Coefficients of ``z + (w - z)(zeta - p)/(q - p) + (zeta - p)(zeta - q) sum_j B[j] zeta^j``."""
    nb = B.shape[0]
    N = max(1, nb + 1)
    coeffs = np.zeros((N + 1, z.size), dtype=complex)
    delta = (w - z) / (q - p)
    coeffs[0] = z - p * delta
    coeffs[1] = delta
    quad = np.array([p * q, -(p + q), 1.0])
    for j in range(nb):
        for i, a in enumerate(quad):
            coeffs[i + j] += a * B[j]
    return coeffs


class _TwoPointProblem:
    def __init__(self, domain, z, w, nb, M, eps):
        self.domain, self.z, self.w, self.nb, self.eps = domain, z, w, nb, eps
        self.d = z.size
        self.delta = w - z
        theta = 2 * np.pi * np.arange(M) / M
        self.ei = np.exp(1j * theta)
        self.E = self.ei[:, None] ** np.arange(nb)[None, :]

    def unpack(self, x):
        nbd = self.nb * self.d
        B = (x[3:3 + nbd] + 1j * x[3 + nbd:]).reshape(self.nb, self.d)
        return x[0], x[1] + 1j * x[2], B

    def curve(self, x):
        p, q, B = self.unpack(x)
        L = (self.ei - p) / (q - p)
        Q = (self.ei - p) * (self.ei - q)
        SB = self.E @ B
        return self.z + L[:, None] * self.delta + Q[:, None] * SB, p, q, SB

    def cons(self, x):
        G = self.curve(x)[0]
        return np.concatenate([-self.eps - self.domain.r_batch(G)[0], [1 - 1e-9 - x[1] ** 2 - x[2] ** 2]])

    def cons_jac(self, x):
        G, p, q, SB = self.curve(x)
        _, gr = self.domain.r_batch(G)
        M = G.shape[0]
        ei = self.ei
        dL_dp = (ei - q) / (q - p) ** 2
        dL_dq = -(ei - p) / (q - p) ** 2
        dG_dp = dL_dp[:, None] * self.delta - (ei - q)[:, None] * SB
        dG_dq = dL_dq[:, None] * self.delta - (ei - p)[:, None] * SB
        J = np.zeros((M + 1, x.size))
        J[:M, 0] = 2 * np.real(np.sum(gr * dG_dp, axis=1))
        gq = np.sum(gr * dG_dq, axis=1)
        J[:M, 1] = 2 * np.real(gq)
        J[:M, 2] = 2 * np.real(1j * gq)
        nbd = self.nb * self.d
        if nbd:
            Q = (ei - p) * (ei - q)
            prod = (Q[:, None] * self.E)[:, :, None] * gr[:, None, :]
            J[:M, 3:3 + nbd] = 2 * np.real(prod).reshape(M, -1)
            J[:M, 3 + nbd:] = -2 * np.imag(prod).reshape(M, -1)
        J[:M] *= -1
        J[M, 1] = -2 * x[1]
        J[M, 2] = -2 * x[2]
        return J

    @staticmethod
    def obj(x):
        return float(disc_pseudo(x[0], x[1] + 1j * x[2]))

    @staticmethod
    def obj_jac(x):
        g = np.zeros_like(x)
        h = 1e-7
        for i in range(3):
            e = np.zeros_like(x)
            e[i] = h
            g[i] = (_TwoPointProblem.obj(x + e) - _TwoPointProblem.obj(x - e)) / (2 * h)
        return g


def slice_polygon(domain, z, u, n=256):
    """Convex polygon inscribed in the slice ``{z + lam u}`` of the domain, as (vertices, normals, offsets).

    The vertices are boundary hits from ``z`` (pulled inside by a relative
    1e-12), so the polygon lies in the closed slice by convexity.
    """
    th = 2 * np.pi * np.arange(n) / n
    U = np.exp(1j * th)[:, None] * u[None, :]
    t = domain.ray_hits(np.broadcast_to(z, U.shape), U) * (1 - 1e-12)
    V = t * np.exp(1j * th)
    tau = np.roll(V, -1) - V
    normals = -1j * tau / np.abs(tau)
    offsets = np.real(np.conj(normals) * V)
    return V, normals, offsets


def best_round_disc(domain, z, w, n=256):
    """Round disc ``D(c, rho)`` in the complex line through ``z, w`` minimizing their pseudo-distance.

    Returns ``(p, q, value)`` in two-point form (``p`` real), or ``None`` if no
    disc of the polygon contains both points.
    """
    L = np.linalg.norm(w - z)
    u = (w - z) / L
    _, normals, offsets = slice_polygon(domain, z, u, n)

    def radius(c):
        return np.min(offsets - np.real(np.conj(normals) * c))

    def pseudo(x):
        c = x[0] + 1j * x[1]
        rho = radius(c)
        if rho <= max(abs(c), abs(L - c)):
            return 2.0
        return float(disc_pseudo(-c / rho, (L - c) / rho))

    res = optimize.minimize(pseudo, [L / 2, 0.0], method="Nelder-Mead",
                            options={"xatol": 1e-12, "fatol": 1e-15, "maxfev": 400})
    c = res.x[0] + 1j * res.x[1]
    rho = radius(c)
    if not res.fun < 1 or rho <= max(abs(c), abs(L - c)):
        return None
    z1, z2 = -c / rho, (L - c) / rho
    rot = np.exp(-1j * np.angle(z1)) if abs(z1) > 0 else 1.0
    return float(abs(z1)), complex(z2 * rot), float(res.fun)


def two_point_disc(domain: Domain, z, w, degree=4, samples=128, seed=0, maxiter=200):
    """Search for a disc through ``z`` and ``w`` with small parameter distance.

    Returns ``(upper, disc, info)`` where ``upper`` is a certified upper bound for
    ``K(z, w)``: ``artanh`` of the certified disc's pseudo-distance, plus, if the
    disc had to be shrunk, the segment bound ``|x - w| / min(delta(x), delta(w))``
    for its shortened endpoint ``x`` (boundary distance is concave on convex
    domains and ``k(y; v) <= |v| / delta(y)``).
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    d = z.size
    r_z, r_w = domain.r(z), domain.r(w)
    eps = min(1e-6, 1e-3 * min(abs(r_z), abs(r_w)))
    round_disc = best_round_disc(domain, z, w)
    candidates = []
    starts = []
    if round_disc is not None:
        p0, q0, _ = round_disc
        candidates.append((p0, q0, np.zeros((0, d), dtype=complex), "round"))
        starts.append(np.array([p0, q0.real, q0.imag]))
    # the linear disc through z reaching the boundary along w - z (exact on balls in normal position)
    u = (w - z) / np.linalg.norm(w - z)
    t_hit = float(domain.ray_hits(z[None, :], u[None, :])[0])
    starts.append(np.array([0.0, min(np.linalg.norm(w - z) / t_hit, 1 - 1e-9), 0.0]))
    info = {"stages": []}
    x_prev, B_prev, best_val = None, np.zeros((0, d), dtype=complex), np.inf
    for N in sorted({min(4, degree), degree} - {0, 1}):
        nb = N - 1
        prob = _TwoPointProblem(domain, z, w, nb, max(samples, 4 * N), eps)
        bounds = [(-0.999999, 0.999999), (-1, 1), (-1, 1)] + [(None, None)] * (2 * nb * d)
        cons = [{"type": "ineq", "fun": prob.cons, "jac": prob.cons_jac}]
        B0 = np.zeros((nb, d), dtype=complex)
        B0[: B_prev.shape[0]] = B_prev
        for x_start in (starts if x_prev is None else [x_prev]):
            x0 = np.concatenate([x_start, B0.real.ravel(), B0.imag.ravel()])
            res = _run_slsqp(prob.obj, prob.obj_jac, x0, cons, bounds, maxiter)
            p, q, B = prob.unpack(res.x)
            feasible = prob.cons(res.x).min() >= -1e-9
            val = float(prob.obj(res.x))
            info["stages"].append({"degree": N, "status": int(res.status), "nit": int(res.nit),
                                   "value": val, "feasible": bool(feasible)})
            if abs(q - p) > 0 and max(abs(p), abs(q)) < 1:
                # certification below shrinks a slightly infeasible disc, so every iterate is usable
                candidates.append((p, q, B, f"slsqp{N}"))
            if feasible and abs(q - p) > 0 and max(abs(p), abs(q)) < 1:
                if val < best_val:
                    best_val, best_x, best_B = val, res.x[:3], B
        if np.isfinite(best_val):
            x_prev, B_prev = best_x, best_B
        elif x_prev is None:
            x_prev = starts[-1]
    lip = domain.gradient_lipschitz()
    # fallback: the straight segment, k(y; v) <= |v| / delta(y) with delta concave
    seg = np.linalg.norm(w - z) / (min(abs(r_z), abs(r_w)) / lip)
    coeffs = np.zeros((2, d), dtype=complex)
    coeffs[0], coeffs[1] = z, (w - z)
    best = (seg, coeffs, 0.0, 1.0 + 0j, "segment", np.nan, 1.0)
    for p, q, B, tag in candidates:
        coeffs = _two_point_coeffs(z, w, p, q, B)
        U, Mc = circle_max_bound(domain, coeffs)
        s = shrink_factor(r_z, U)
        value = float(np.arctanh(min(disc_pseudo(p, q), 1 - 1e-17)))
        if s < 1:
            coeffs = coeffs * s
            coeffs[0] += (1 - s) * z
            x = z + s * (w - z)
            delta = min(abs(domain.r(x)), abs(r_w)) / lip
            value += np.linalg.norm(w - x) / delta
        if value < best[0]:
            best = (value, coeffs, p, q, tag, U, s)
    value, coeffs, p, q, tag, U, s = best
    disc = AnalyticDisc(coeffs, centre=0.0)
    info.update({"p": p, "q": q, "source": tag, "certified_max_r": U, "shrink": s})
    return value, disc, info
