"""Orbit dynamics of automorphisms: trichotomy, boundary fixed points, translation
length, translated almost-geodesics, ping-pong certificates and limit sets.

Dynamics run on the bounded model of the domain (the Siegel domain is
transported to the ball by the Cayley map, so its fixed points are reported in
ball coordinates). Orbits are iterated in blocks: the first ``B`` iterates are
computed one at a time and every later block is the image of the previous one
under ``g^B``, which keeps the Python overhead at ``O(B + N/B)`` calls.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import automorphisms as au
from .domains import (WHP, Ball, Domain, Ellipse, Polydisc, as_point, boundary_distance_lower, boundary_distance_upper, cayley, cayley_inverse,
                      random_interior_points)
from .errors import KobalabError, NumericError, PreconditionError, SearchFailure
from .kobayashi.charts import model_domain, normalizing_chart
from .kobayashi.geodesics import LAMBDA_DEFAULT, _PairData, geodesic_path, verify_almost_geodesic
from .kobayashi.lower import distance_lower_many
from .kobayashi.metric import kobayashi_distance
from .kobayashi.types import MetricBracket, PathCurve

DYNAMICS_DEFAULTS = {"n_max": 10_000, "eps_boundary": 1e-6, "delta_sep": 1e-4}
BLOCK = 64
CAUCHY_TOL = 1e-10
EXTRAPOLATION_TOL = 1e-9
MAX_LEVELS = 64
ORBIT_ULPS = 16  # rounding of one automorphism evaluation, in units of eps * (1 + |z|)


@dataclass
class DynamicsReport:
    classification: str
    ell_plus: np.ndarray | None = None
    ell_minus: np.ndarray | None = None
    translation_length: float | None = None
    iterations_used: int = 0
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def pt(x):
            return None if x is None else [[float(c.real), float(c.imag)] for c in x]

        return {
            "classification": self.classification,
            "ell_plus": pt(self.ell_plus),
            "ell_minus": pt(self.ell_minus),
            "translation_length": self.translation_length,
            "iterations_used": int(self.iterations_used),
            "evidence": _jsonable(self.evidence),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# action on the bounded model


class _Action:
    """``g`` acting on the bounded model of its domain."""

    def __init__(self, domain: Domain, g):
        self.domain = domain
        self.g = g
        self.cayley = isinstance(domain, WHP)
        if self.cayley:
            model, *_ = model_domain(domain)  # raises for non-Siegel WHP
            self.model = model
        else:
            self.model = domain

    def to_model(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        if self.cayley:
            return np.array([cayley_inverse(p) for p in Z])
        return Z

    def from_model(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        if self.cayley:
            return np.array([cayley(p) for p in Z])
        return Z

    def apply(self, h, Z):
        """``h`` applied to model points (rows); ``h`` is a power of ``g``."""
        Z = np.atleast_2d(Z)
        if self.cayley:
            return self.to_model(au.apply(h, self.from_model(Z), check=False))
        return np.atleast_2d(au.apply(h, Z, check=False))

    def bd_upper(self, Z):
        return boundary_distance_upper(self.model, np.atleast_2d(Z))

    def bd_lower(self, Z):
        return boundary_distance_lower(self.model, np.atleast_2d(Z))

    def project(self, Z):
        """Radial projection from the origin onto the model boundary (also for points rounded outside)."""
        Z = np.atleast_2d(Z)
        t = self.model.ray_scales(Z)
        t = np.where(np.isfinite(t), t, 1.0)  # the origin has no radial projection; leave it
        return Z * t[:, None]

    def limit_project(self, Z):
        """Projection used for orbit limits.

        On a generalized ellipse every orbit accumulates on the limit set
        ``boundary ∩ span(e_1..e_k)``, so the tail coordinates are dropped and
        the head normalized to the unit sphere. The tail of an orbit decays
        only like a root of the boundary distance, which would otherwise
        dominate the error of parabolic limits.
        """
        if isinstance(self.model, Ellipse) and self.model.k < self.model.dim:
            Z = np.atleast_2d(Z).copy()
            k = self.model.k
            Z[:, :k] /= np.linalg.norm(Z[:, :k], axis=1, keepdims=True)
            Z[:, k:] = 0
            return Z
        return self.project(Z)


def _orbit_blocks(act: _Action, h, z0, n_max, block=BLOCK):
    """Yield ``(n_start, Z)`` blocks of the orbit ``h^n z0`` for ``n = 1..n_max``."""
    Z = [z0]
    for _ in range(min(block, n_max)):
        Z.append(act.apply(h, Z[-1][None, :])[0])
    cur = np.array(Z[1:])
    yield 1, cur
    n = 1 + len(cur)
    if n > n_max:
        return
    hB = au.power(h, block)
    while n <= n_max:
        cur = act.apply(hB, cur)
        if not np.all(np.isfinite(cur)):
            raise NumericError("orbit left the representable range")
        yield n, cur[: n_max - n + 1]
        n += block


def _scan_orbit(act, h, z0, n_max, eps_b, recurrence_radius):
    """Iterate until the orbit comes within ``eps_b`` of the boundary or ``n_max`` is used up."""
    min_lower = np.inf
    min_return = np.inf
    for n0, Z in _orbit_blocks(act, h, z0, n_max):
        up = act.bd_upper(Z)
        lo = act.bd_lower(Z)
        ret = np.linalg.norm(Z - z0[None, :], axis=1)
        hit = np.nonzero(up < eps_b)[0]
        if len(hit):
            i = int(hit[0])
            min_lower = min(min_lower, float(lo[: i + 1].min()))
            min_return = min(min_return, float(ret[: i + 1].min()))
            return {"escaped": True, "n": n0 + i, "point": Z[i], "min_boundary_distance": min_lower,
                    "min_return": min_return}
        min_lower = min(min_lower, float(lo.min()))
        min_return = min(min_return, float(ret.min()))
        last_n, last = n0 + len(Z) - 1, Z[-1]
    return {"escaped": False, "n": last_n, "point": last, "min_boundary_distance": min_lower,
            "min_return": min_return, "recurrent": min_return < recurrence_radius}


def _aitken(P):
    """Componentwise Aitken extrapolation of consecutive triples.

    Along the doubling sequence a power-law approach ``n^-a`` becomes geometric
    in the level, at a rate that may differ between coordinates (``1/n`` in the
    radial direction and ``n^-1/2`` in Webster tail coordinates, for example),
    which is the case Aitken's process removes.
    """
    out = []
    for j in range(2, len(P)):
        x0, x1, x2 = (np.concatenate([P[i].real, P[i].imag]) for i in (j - 2, j - 1, j))
        d1, d2 = x1 - x0, x2 - x1
        den = d2 - d1
        safe = np.abs(den) > 1e-300
        corr = np.zeros_like(x2)
        corr[safe] = d2[safe] ** 2 / den[safe]
        corr = np.where(np.abs(corr) <= 1e3 * np.abs(d2) + 1e-300, corr, 0.0)
        x = x2 - corr
        d = len(x) // 2
        out.append(x[:d] + 1j * x[d:])
    return out


def _diameter(P):
    return max((float(np.linalg.norm(a - b)) for a, b in itertools.combinations(P, 2)), default=np.inf)


def _refine_limit(act, h, y, n_start):
    """Limit of the radial projections of ``h^n y`` along the doubling sequence ``y_{j+1} = h^{2^j} y_j``.

    Geometric convergence (hyperbolic case) is accepted once a step drops
    below ``CAUCHY_TOL``. Parabolic orbits approach their fixed point like
    a power of ``1/n``, so the sequence is also Aitken-extrapolated and accepted once
    three consecutive extrapolants agree to ``EXTRAPOLATION_TOL``.

    Returns ``(limit, error_bound, n_reached, converged)`` with the error bound
    the diameter of the accepted tail.
    """
    with np.errstate(all="ignore"):
        return _refine_levels(act, h, y, n_start)


def _refine_levels(act, h, y, n_start):
    P = [act.limit_project(y[None, :])[0]]
    N = [n_start]
    G = h
    for level in range(MAX_LEVELS):
        try:
            y = act.apply(G, y[None, :])[0]
        except (KobalabError, FloatingPointError, OverflowError):
            break
        p = act.limit_project(y[None, :])[0]
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(p))):
            break
        P.append(p)
        N.append(N[-1] + 2 ** level)
        if len(P) >= 3 and np.linalg.norm(P[-1] - P[-2]) < CAUCHY_TOL:
            return P[-1], _diameter(P[-3:]), N[-1], True
        if len(P) >= 5:
            R = _aitken(P[-5:])
            if _diameter(R) < EXTRAPOLATION_TOL:
                return act.limit_project(R[-1][None, :])[0], _diameter(R) + CAUCHY_TOL, N[-1], True
        try:
            G = au.compose(G, G, check=False)
        except (KobalabError, FloatingPointError, OverflowError):
            break
        if isinstance(G, au.BallMoebius) and not np.all(np.isfinite(G.matrix)):
            break
    return P[-1], _diameter(P[-3:]), N[-1], False


def _params(params):
    p = dict(DYNAMICS_DEFAULTS)
    if params:
        unknown = set(params) - set(p)
        if unknown:
            raise PreconditionError(f"unknown dynamics parameters {sorted(unknown)}")
        p.update(params)
    return p


def _start_point(act, domain, z0):
    if z0 is None:
        z0 = domain.anchor()
    z0 = as_point(z0, domain.dim)
    if domain.r(z0) >= 0:
        raise PreconditionError("z0 is not inside the domain")
    return act.to_model(z0)[0]


def classify(domain: Domain, g, z0=None, params=None) -> DynamicsReport:
    """Elliptic / parabolic / hyperbolic / undetermined from the orbits of ``z0`` under ``g^{+-1}``.

    Elliptic needs both orbits to stay ``eps_boundary`` away from the boundary
    for ``n_max`` steps and the forward orbit to return within
    ``10 eps_boundary`` of ``z0``. An orbit that reaches the boundary layer is
    followed by doubling until its radial projection is Cauchy; the limits are
    ``ell_plus`` and ``ell_minus``, compared against ``delta_sep``.
    """
    p = _params(params)
    eps_b = p["eps_boundary"]
    n_max = int(p["n_max"])
    act = _Action(domain, g)
    z = _start_point(act, domain, z0)
    g_inv = au.inverse(g)
    ev = {"model": "ball (Cayley)" if act.cayley else "domain", "params": p}
    fwd = _scan_orbit(act, g, z, n_max, eps_b, 10 * eps_b)
    bwd = _scan_orbit(act, g_inv, z, n_max, eps_b, 10 * eps_b)
    ev["forward"] = {k: v for k, v in fwd.items() if k != "point"}
    ev["backward"] = {k: v for k, v in bwd.items() if k != "point"}
    used = fwd["n"] + bwd["n"]
    if not fwd["escaped"] and not bwd["escaped"]:
        stays = min(fwd["min_boundary_distance"], bwd["min_boundary_distance"]) >= eps_b
        if stays and fwd.get("recurrent"):
            return DynamicsReport("elliptic", iterations_used=used, evidence=ev)
        return DynamicsReport("undetermined", iterations_used=used, evidence=ev)
    if not (fwd["escaped"] and bwd["escaped"]):
        return DynamicsReport("undetermined", iterations_used=used, evidence=ev)
    lp, dp, np_, okp = _refine_limit(act, g, fwd["point"], fwd["n"])
    lm, dm, nm, okm = _refine_limit(act, g_inv, bwd["point"], bwd["n"])
    ev["ell_plus_error"], ev["ell_minus_error"] = dp, dm
    ev["refined_iterations"] = [int(np_), int(nm)]
    if not (okp and okm):
        return DynamicsReport("undetermined", iterations_used=used, evidence=ev)
    sep = float(np.linalg.norm(lp - lm))
    ev["separation"] = sep
    label = "hyperbolic" if sep > p["delta_sep"] else "parabolic"
    return DynamicsReport(label, lp, lm, iterations_used=used, evidence=ev)


def _require_nonelliptic(rep, what):
    if rep.classification in ("elliptic", "undetermined"):
        raise PreconditionError(f"{what} needs a non-elliptic automorphism (classified {rep.classification})")


def attracting_fixed_point(domain: Domain, g, z0=None, params=None):
    """``(ell_plus, error_bound)`` with the error bound the diameter of the Cauchy tail."""
    rep = classify(domain, g, z0, params)
    _require_nonelliptic(rep, "attracting_fixed_point")
    return rep.ell_plus, rep.evidence["ell_plus_error"]


def _require_hyperbolic(domain, g, z0, params, what):
    rep = classify(domain, g, z0, params)
    if rep.classification != "hyperbolic":
        raise PreconditionError(f"{what} needs a hyperbolic automorphism (classified {rep.classification})")
    return rep


# ---------------------------------------------------------------------------
# translation length


@dataclass
class TranslationLength:
    estimate: float
    bracket: MetricBracket
    n_used: int
    slope: float
    subadditivity_violation: float
    samples: dict = field(default_factory=dict, repr=False)

    @property
    def lower(self):
        return self.bracket.lower

    @property
    def upper(self):
        return self.bracket.upper


def translation_length(domain: Domain, g, z0=None, n_max=200, min_boundary_distance=None, params=None,
                       distance_params=None) -> TranslationLength:
    """``L = lim K(g^n z0, z0) / n`` from the subadditive sequence ``b_n = K(g^n z0, z0)``.

    Points of the orbit must stay resolvable in double precision, so ``n`` is
    capped at the last iterate whose boundary distance is at least
    ``min_boundary_distance`` (``n_used <= n_max``); the default is ``1e-9``
    where the distance is closed form (balls, polydiscs, the Siegel domain)
    and ``1e-5`` where it comes from a disc search. The estimate is
    ``b_n / n`` with the bracket scaled from the distance bracket, widened by
    a bound on the Kobayashi drift of the computed orbit from rounding; ``slope`` is
    the difference quotient ``(b_n - b_{n/2}) / (n - n/2)``, which removes the
    bounded offset of ``b_n``. The subadditivity diagnostic is the worst
    ``b_{m+n} - b_m - b_n`` over the evaluated indices, minus bracket widths.
    """
    rep = _require_hyperbolic(domain, g, z0, params, "translation_length")
    z0 = domain.anchor() if z0 is None else as_point(z0, domain.dim)
    dp = dict(distance_params or {})
    model, to_model, *_ = model_domain(domain)
    if min_boundary_distance is None:
        min_boundary_distance = 1e-9 if isinstance(model, (Ball, Polydisc)) else 1e-5
    orbit = [z0]
    drift = [0.0]
    n_used = 0
    for n in range(1, int(n_max) + 1):
        x = au.apply(g, orbit[-1], check=False)
        y = to_model(x)
        if boundary_distance_upper(model, y)[0] < min_boundary_distance:
            break
        orbit.append(x)
        # rounding moves the computed iterate by about ORBIT_ULPS * eps * (1 + |y|); g is an
        # isometry, so earlier errors are carried along unchanged and k(y; v) <= |v| / delta(y) adds them up
        step = ORBIT_ULPS * np.finfo(float).eps * (1 + np.linalg.norm(y)) * np.sqrt(domain.dim)
        drift.append(drift[-1] + step / float(boundary_distance_lower(model, y)[0]))
        n_used = n
    if n_used == 0:
        raise NumericError("g z0 is already within the boundary layer")
    idx = sorted({n_used, max(n_used // 2, 1)} | {2 ** j for j in range(n_used.bit_length()) if 2 ** j <= n_used})
    b = {}
    for n in idx:
        d = kobayashi_distance(domain, orbit[n], z0, **dp)
        b[n] = MetricBracket(d.estimate, max(d.lower - drift[n], 0.0), d.upper + drift[n], d.info)
    N = n_used
    est = b[N].estimate / N
    bracket = MetricBracket(est, b[N].lower / N, b[N].upper / N)
    h = max(N // 2, 1)
    slope = (b[N].estimate - b[h].estimate) / (N - h) if N > h else est
    worst = -np.inf
    for m, n in itertools.combinations_with_replacement(idx, 2):
        if m + n in b:
            excess = b[m + n].lower - b[m].upper - b[n].upper
            worst = max(worst, excess)
    return TranslationLength(float(est), bracket, N, float(slope), float(worst), {n: b[n] for n in idx})


# ---------------------------------------------------------------------------
# translated almost-geodesic


@dataclass
class TranslatedGeodesic:
    path: PathCurve
    period: float
    certificate: tuple | None
    equivariance_residual: float
    tail_diameter: tuple
    n_range: int
    report: object = None


def translated_almost_geodesic(domain: Domain, g, z0=None, n_range=16, nodes=8, lam=LAMBDA_DEFAULT, kappa=0.1,
                               params=None, distance_params=None) -> TranslatedGeodesic:
    """``gamma(t + nT) = g^n gamma_0(t)`` for ``-n_range <= n < n_range``.

    ``gamma_0`` joins ``z0`` to ``g z0`` (an extremal-disc geodesic of
    :func:`geodesic_path`) and ``T`` is its parameter length. Each block is the
    image of the previous one under ``g`` (or ``g^{-1}``), so the equivariance
    identity holds by construction. The certificate is checked at
    ``(lam, kappa)``; ``tail_diameter`` is the diameter of the terminal points
    ``gamma(+-nT)``, ``n_range/2 <= n <= n_range``, at each end.
    """
    _require_hyperbolic(domain, g, z0, params, "translated_almost_geodesic")
    z0 = domain.anchor() if z0 is None else as_point(z0, domain.dim)
    g_inv = au.inverse(g)
    gz = au.apply(g, z0)
    dp = dict(distance_params or {})
    try:
        gamma0, _, _ = geodesic_path(domain, z0, gz, n=nodes, distance_params=dp)
    except SearchFailure as exc:
        gamma0 = exc.diagnostics["path"]
    T = float(gamma0.times[-1])
    base_pts = gamma0.points[:-1]
    base_t = gamma0.times[:-1]
    blocks = {0: base_pts}
    for n in range(1, n_range):
        blocks[n] = np.atleast_2d(au.apply(g, blocks[n - 1], check=False))
    for n in range(-1, -n_range - 1, -1):
        blocks[n] = np.atleast_2d(au.apply(g_inv, blocks[n + 1], check=False))
    end = np.atleast_2d(au.apply(g, blocks[n_range - 1][:1], check=False))
    order = range(-n_range, n_range)
    pts = np.vstack([blocks[n] for n in order] + [end])
    times = np.concatenate([base_t + n * T for n in order] + [[n_range * T]])
    sb = None
    if gamma0.speed_bounds is not None:
        sb = np.tile(gamma0.speed_bounds, 2 * n_range)
    path = PathCurve(times, pts, speed_bounds=sb)
    resid = 0.0
    for n in range(-n_range, n_range - 1):
        img = np.atleast_2d(au.apply(g, blocks[n], check=False))
        resid = max(resid, float(np.max(np.abs(img - blocks[n + 1]))))
    resid = max(resid, float(np.max(np.abs(np.atleast_2d(au.apply(g, blocks[n_range - 1][:1], check=False)) - end))))
    m = len(base_pts)
    lo = n_range // 2
    plus = [pts[(n + n_range) * m] for n in range(lo, n_range)] + [end[0]]
    minus = [pts[(-n + n_range) * m] for n in range(lo, n_range + 1)]

    def diam(P):
        return max((float(np.linalg.norm(a - b)) for a, b in itertools.combinations(P, 2)), default=0.0)

    rep = verify_almost_geodesic(domain, path, lam, kappa, _cache=_PairData(domain, path.validate(domain), dp))
    cert = (lam, kappa) if rep.ok else None
    return TranslatedGeodesic(path, T, cert, resid, (diam(plus), diam(minus)), n_range, rep)


# ---------------------------------------------------------------------------
# north-south dynamics and ping-pong


def closure_samples(domain: Domain, n=256, seed=0):
    """Seeded points of the closed domain: half interior, half on the boundary (model coordinates)."""
    model = model_domain(domain)[0]
    inner = random_interior_points(model, n - n // 2, seed=seed)
    rng = np.random.default_rng(seed + 1)
    U = rng.normal(size=(n // 2, model.dim)) + 1j * rng.normal(size=(n // 2, model.dim))
    bnd = U * model.ray_scales(U)[:, None]
    return np.vstack([inner, bnd])


def _inclusion_steps(act, h, X, centre, radius, n_max):
    """Smallest ``N <= n_max`` with ``h^N X`` inside the ball ``B(centre, radius)``, else ``None``."""
    Y = X.copy()
    for N in range(1, n_max + 1):
        Y = act.apply(h, Y)
        Y = np.where(np.isfinite(Y), Y, 0)
        if np.all(np.linalg.norm(Y - centre[None, :], axis=1) < radius):
            return N
    return None


def north_south_check(domain: Domain, g, radii=(0.5, 0.5), samples=256, seed=0, n_max=10_000, z0=None,
                      params=None) -> dict:
    """Smallest ``N`` with ``g^N(closure \\ V) in U`` and ``g^-N(closure \\ U) in V`` on samples.

    ``U`` and ``V`` are the Euclidean balls of radii ``radii`` around
    ``ell_plus`` and ``ell_minus``; they must be disjoint.
    """
    rep = classify(domain, g, z0, params)
    _require_nonelliptic(rep, "north_south_check")
    rU, rV = radii
    lp, lm = rep.ell_plus, rep.ell_minus
    if np.linalg.norm(lp - lm) <= rU + rV:
        raise PreconditionError("the balls around ell_plus and ell_minus overlap")
    act = _Action(domain, g)
    X = closure_samples(domain, samples, seed)
    outside_V = X[np.linalg.norm(X - lm[None, :], axis=1) >= rV]
    outside_U = X[np.linalg.norm(X - lp[None, :], axis=1) >= rU]
    N1 = _inclusion_steps(act, g, outside_V, lp, rU, n_max)
    N2 = _inclusion_steps(act, au.inverse(g), outside_U, lm, rV, n_max)
    if N1 is None or N2 is None:
        return {"N": None, "ok": False, "forward": N1, "backward": N2}
    # the N-S property is asked for one common N: both inclusions are checked at max(N1, N2)
    N = max(N1, N2)
    ok = _holds_at(act, g, outside_V, lp, rU, N) and _holds_at(act, au.inverse(g), outside_U, lm, rV, N)
    return {"N": int(N), "ok": bool(ok), "forward": N1, "backward": N2,
            "ell_plus": lp, "ell_minus": lm}


def _holds_at(act, h, X, centre, radius, N):
    Y = act.apply(au.power(h, N), X)
    return bool(np.all(np.linalg.norm(Y - centre[None, :], axis=1) < radius))


def parabolic_check(domain: Domain, u, radius=0.5, samples=256, seed=0, n_max=10_000, z0=None, params=None) -> dict:
    """Smallest ``N`` with ``u^N`` and ``u^-N`` both mapping sampled points of ``closure \\ U`` into ``U``."""
    rep = classify(domain, u, z0, params)
    if rep.classification != "parabolic":
        raise PreconditionError(f"parabolic_check needs a parabolic automorphism (classified {rep.classification})")
    ell = rep.ell_plus
    act = _Action(domain, u)
    X = closure_samples(domain, samples, seed)
    X = X[np.linalg.norm(X - ell[None, :], axis=1) >= radius]
    Np = _inclusion_steps(act, u, X, ell, radius, n_max)
    Nm = _inclusion_steps(act, au.inverse(u), X, ell, radius, n_max)
    ok = Np is not None and Nm is not None
    return {"N": max(Np, Nm) if ok else None, "ok": ok, "forward": Np, "backward": Nm, "ell": ell}


@dataclass
class PingPongCertificate:
    generators: tuple
    powers: tuple
    neighborhoods: list
    verified_word_length: int
    words_checked: int
    min_displacement: float

    def to_json(self):
        return _jsonable({
            "generators": [au.automorphism_to_json(h) for h in self.generators],
            "powers": list(self.powers),
            "neighborhoods": [{"centre": c, "radius": r} for c, r in self.neighborhoods],
            "verified_word_length": self.verified_word_length,
            "words_checked": self.words_checked,
            "min_displacement": self.min_displacement,
        })


def reduced_words(n_gens: int, max_len: int):
    """All nonempty reduced words of length ``<= max_len`` in ``n_gens`` free generators.

    Letters are ``(i, +1)`` or ``(i, -1)``; there are ``2n (2n-1)^(L-1)`` words
    of length ``L``.
    """
    letters = [(i, s) for i in range(n_gens) for s in (1, -1)]
    level = [(a,) for a in letters]
    for _ in range(max_len):
        yield from level
        level = [w + (a,) for w in level for a in letters if not (a[0] == w[-1][0] and a[1] == -w[-1][1])]


def pingpong_witness(domain: Domain, h1, h2, max_word_len=6, z0=None, radius=None, samples=256, seed=0,
                     max_power=1000, params=None) -> PingPongCertificate:
    """Ping-pong certificate for ``<h1^m, h2^m>``.

    The four boundary balls have a common radius (default a fifth of the
    smallest fixed-point separation). Powers ``m = n`` are raised together
    until ``h_i^{+-m}`` maps the sampled closure outside the opposite ball into
    the attracting ball. Every reduced word of length ``<= max_word_len`` is
    then checked to move ``z0`` by a certified Kobayashi lower bound above
    ``1e-6``.
    """
    r1 = _require_hyperbolic(domain, h1, z0, params, "pingpong_witness")
    r2 = _require_hyperbolic(domain, h2, z0, params, "pingpong_witness")
    fixed = [r1.ell_plus, r1.ell_minus, r2.ell_plus, r2.ell_minus]
    sep = min(np.linalg.norm(a - b) for a, b in itertools.combinations(fixed, 2))
    if sep <= DYNAMICS_DEFAULTS["delta_sep"]:
        raise PreconditionError("the four fixed points are not distinct")
    rad = sep / 5 if radius is None else float(radius)
    if sep <= 4 * rad:
        raise PreconditionError("fixed points must be separated by more than four radii")
    act = _Action(domain, h1)
    X = closure_samples(domain, samples, seed)
    tasks = []
    for h, plus, minus in ((h1, r1.ell_plus, r1.ell_minus), (h2, r2.ell_plus, r2.ell_minus)):
        tasks.append((h, X[np.linalg.norm(X - minus[None, :], axis=1) >= rad], plus))
        tasks.append((au.inverse(h), X[np.linalg.norm(X - plus[None, :], axis=1) >= rad], minus))
    Y = [t[1].copy() for t in tasks]
    m = None
    for step in range(1, max_power + 1):
        done = True
        for i, (h, _, c) in enumerate(tasks):
            Y[i] = act.apply(h, Y[i])
            done &= bool(np.all(np.linalg.norm(Y[i] - c[None, :], axis=1) < rad))
        if done:
            m = step
            break
    if m is None:
        raise SearchFailure(f"no ping-pong powers up to {max_power}")
    g1, g2 = au.power(h1, m), au.power(h2, m)
    gens = {(0, 1): g1, (0, -1): au.inverse(g1), (1, 1): g2, (1, -1): au.inverse(g2)}
    zs = domain.anchor() if z0 is None else as_point(z0, domain.dim)
    images = []
    count = 0
    for word in reduced_words(2, max_word_len):
        x = zs
        for letter in reversed(word):
            x = au.apply(gens[letter], x, check=False)
        images.append(x)
        count += 1
    chart = normalizing_chart(domain, zs)
    Q = chart.forward(np.array(images))
    lows = distance_lower_many(chart.target, np.broadcast_to(chart.forward(zs)[0], Q.shape), Q)
    min_disp = float(lows.min())
    if min_disp <= 1e-6:
        raise SearchFailure(f"a reduced word displaces z0 by only {min_disp:.3g}")
    hoods = [(c, rad) for c in fixed]
    return PingPongCertificate((g1, g2), (m, m), hoods, max_word_len, count, min_disp)


# ---------------------------------------------------------------------------
# limit sets


def limit_set_sample(domain: Domain, generators, n_samples=1000, seed=0, z0=None, eps=1e-6, max_steps=10_000,
                     mix=16):
    """Boundary accumulation points of random words applied to ``z0``.

    Each sample is a random walk in the generators and their inverses
    (no immediate backtracking) stopped once the boundary distance drops
    below ``eps``; the stopped point is projected radially to the boundary.
    The limit set is invariant, so the projected point is then moved by a
    further random word of length ``0..mix`` (and projected again), which
    spreads the samples beyond the attracting points of the last letters.
    Walks that never reach the boundary layer within ``max_steps`` are dropped
    and counted in ``info["dropped"]``. Returns ``(points, info)`` in model coordinates.
    """
    gens = list(generators)
    if not gens:
        raise PreconditionError("limit_set_sample needs at least one generator")
    act = _Action(domain, gens[0])
    letters = gens + [au.inverse(h) for h in gens]
    k = len(gens)
    rng = np.random.default_rng(seed)
    z = _start_point(act, domain, z0)
    out = []
    dropped = 0
    for _ in range(n_samples):
        x = z[None, :]
        prev = None
        for _step in range(max_steps):
            choices = [i for i in range(2 * k) if prev is None or i != (prev + k) % (2 * k)]
            i = choices[rng.integers(len(choices))]
            x = act.apply(letters[i], x)
            prev = i
            if act.bd_upper(x)[0] < eps:
                x = act.project(x)
                for _mix in range(int(rng.integers(mix + 1))):
                    choices = [i for i in range(2 * k) if i != (prev + k) % (2 * k)]
                    prev = choices[rng.integers(len(choices))]
                    x = act.project(act.apply(letters[prev], x))
                out.append(x[0])
                break
        else:
            dropped += 1
    return np.array(out).reshape(-1, domain.dim), {"dropped": dropped, "seed": seed}


def count_clusters(points, separation=0.1) -> int:
    """Size of a greedy ``separation``-net of ``points`` (points closer than that share a cluster)."""
    reps = []
    for p in np.atleast_2d(points):
        if all(np.linalg.norm(p - q) >= separation for q in reps):
            reps.append(p)
    return len(reps)


# ---------------------------------------------------------------------------
# sequences


def hyperbolic_from_sequence(domain: Domain, sequence, z0=None, tol=0.1, params=None):
    """First (1-based) index at which ``phi_n`` is hyperbolic with ``ell_+-`` within ``tol`` of the
    empirical limits ``x_+- = lim phi_n^{+-1}(z0)`` (read off the last element).

    Returns ``(index, report)``.
    """
    seq = list(sequence)
    if not seq:
        raise PreconditionError("empty sequence")
    act = _Action(domain, seq[-1])
    z = _start_point(act, domain, z0)
    x_plus = act.project(act.apply(seq[-1], z[None, :]))[0]
    x_minus = act.project(act.apply(au.inverse(seq[-1]), z[None, :]))[0]
    if np.linalg.norm(x_plus - x_minus) <= 2 * tol:
        raise SearchFailure("the sequence has no separated empirical limits")
    for i, phi in enumerate(seq, start=1):
        rep = classify(domain, phi, z0, params)
        if rep.classification != "hyperbolic":
            continue
        if np.linalg.norm(rep.ell_plus - x_plus) <= tol and np.linalg.norm(rep.ell_minus - x_minus) <= tol:
            rep.evidence["empirical_limits"] = [x_plus, x_minus]
            return i, rep
    raise SearchFailure("no element of the sequence is hyperbolic with the empirical fixed points")


# ---------------------------------------------------------------------------
# orbit table


def orbit_table(domain: Domain, g, z0=None, n=100):
    """Rows ``(n, Re z_1, Im z_1, ..., boundary_distance)`` for ``g^n z0``, ``n = 0..n`` (domain coordinates).

    The boundary distance is the radial upper bound in the bounded model.
    """
    z = domain.anchor() if z0 is None else as_point(z0, domain.dim)
    if domain.r(z) >= 0:
        raise PreconditionError("z0 is not inside the domain")
    model, to_model, *_ = model_domain(domain)
    rows = []
    for i in range(int(n) + 1):
        bd = float(boundary_distance_upper(model, to_model(z))[0])
        rows.append([i] + [c for x in z for c in (x.real, x.imag)] + [bd])
        z = au.apply(g, z, check=False)
    return rows
