"""Almost-geodesics: verification, construction from extremal discs, and the visibility probe."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domains import Domain, as_point, defining_function
from ..errors import DegenerateOptimizationError, PreconditionError
from .charts import normalizing_chart
from .lower import distance_lower_many
from .metric import _require_inside, kobayashi_distance, metric_bracket_fast
from .types import MetricBracket, PathCurve

KAPPA_GRID = (0.01, 0.05, 0.1, 0.5, 1.0)
LAMBDA_DEFAULT = 1.05


@dataclass
class AlmostGeodesicReport:
    ok: bool
    worst_violation: float
    lam: float
    kappa: float
    worst_speed: float = 0.0
    worst_pair: tuple | None = None
    details: dict = field(default_factory=dict, repr=False)

    def __bool__(self):
        return self.ok


class _PairData:
    """Distance brackets for all node pairs of a path, shared across (lambda, kappa) checks."""

    def __init__(self, domain: Domain, path: PathCurve, distance_params=None):
        self.domain = domain
        self.path = path
        self.params = dict(distance_params or {})
        P = path.points
        n = len(P)
        self.speed = self._segment_speeds()
        dt = np.diff(path.times)
        seg_len = self.speed * dt
        cum = np.concatenate([[0.0], np.cumsum(seg_len)])
        self.sub_upper = np.abs(cum[None, :] - cum[:, None])
        self.lower = np.zeros((n, n))
        for i in range(n - 1):
            chart = normalizing_chart(domain, P[i])
            Q = chart.forward(P[i:])
            lo = distance_lower_many(chart.target, np.broadcast_to(Q[0], Q[1:].shape), Q[1:])
            self.lower[i, i + 1:] = lo
            self.lower[i + 1:, i] = lo
        self.direct = {}

    def _segment_speeds(self):
        path = self.path
        P = path.points
        dt = np.diff(path.times)
        speeds = np.zeros(len(dt))
        for i, (a, b) in enumerate(zip(P[:-1], P[1:])):
            D = b - a
            if not np.any(D):
                continue
            # finite-difference velocity D / dt, metric upper bound at both ends and the midpoint
            ups = [metric_bracket_fast(self.domain, x, D).upper for x in (a, 0.5 * (a + b), b)]
            speeds[i] = max(ups) / dt[i]
        if path.speed_bounds is not None:
            speeds = np.minimum(speeds, path.speed_bounds)
        return speeds

    def direct_upper(self, i, j):
        key = (min(i, j), max(i, j))
        if key not in self.direct:
            P = self.path.points
            if np.array_equal(P[i], P[j]):
                self.direct[key] = 0.0
            else:
                self.direct[key] = kobayashi_distance(self.domain, P[key[0]], P[key[1]], **self.params).upper
        return self.direct[key]

    def check(self, lam, kappa):
        t = self.path.times
        n = len(t)
        speed_excess = self.speed - lam * np.exp(kappa)
        worst = float(speed_excess.max()) if len(speed_excess) else -np.inf
        worst_pair = None
        gap = np.abs(t[None, :] - t[:, None])
        lo_allowed = gap / lam - kappa
        hi_allowed = lam * gap + kappa
        iu = np.triu_indices(n, 1)
        for i, j in zip(*iu):
            lower = self.lower[i, j]
            upper = self.sub_upper[i, j]
            if lower < lo_allowed[i, j]:
                # the cheap bracket does not settle the lower condition: tighten its upper end
                upper = min(upper, self.direct_upper(i, j))
            excess = max(lo_allowed[i, j] - upper, lower - hi_allowed[i, j])
            if excess > worst:
                worst, worst_pair = float(excess), (int(i), int(j))
        if n == 1:
            worst = max(worst, -kappa)
        return worst, worst_pair, float(self.speed.max()) if len(self.speed) else 0.0


def verify_almost_geodesic(domain: Domain, path: PathCurve, lam: float = 1.0, kappa: float = 0.0,
                           distance_params=None, _cache=None) -> AlmostGeodesicReport:
    """Check the two (lambda, kappa)-almost-geodesic conditions on a sampled path.

    * speed: ``k(sigma; sigma') <= lambda e^kappa`` on every segment, with the
      finite-difference velocity and certified metric upper bounds (or the
      path's own ``speed_bounds`` when smaller);
    * pairs: for all node pairs the distance bracket must meet
      ``[|t - s| / lambda - kappa, lambda |t - s| + kappa]``. The bracket is the
      map-library lower bound and the smaller of the sub-path length and, when
      needed, a direct distance upper bound.
    """
    if lam < 1 or kappa < 0:
        raise PreconditionError("need lambda >= 1 and kappa >= 0")
    data = _cache if _cache is not None else _PairData(domain, path.validate(domain), distance_params)
    worst, pair, speed = data.check(lam, kappa)
    return AlmostGeodesicReport(bool(worst <= 0), float(worst), float(lam), float(kappa), speed, pair)


def _disc_geodesic(domain, z, w, n, bracket):
    """Sample the image of the hyperbolic geodesic between the disc parameters of ``z`` and ``w``."""
    info = bracket.info
    disc = info["disc"]
    chart = info["chart"]
    p, q = float(info["p"]), complex(info["q"])
    Tq = (q - p) / (1 - p * q)
    rho, alpha = abs(Tq), np.angle(Tq)
    D = float(np.arctanh(min(rho, 1 - 1e-17)))
    tau = np.linspace(0.0, D, n + 1)
    u = np.tanh(tau) * np.exp(1j * alpha)
    zeta = (u + p) / (1 + p * u)
    pts_norm = disc.g(zeta)
    pts = chart.inverse(pts_norm)
    pts[0] = z
    times = tau
    shrink = info.get("shrink", 1.0)
    if shrink < 1 or np.linalg.norm(pts[-1] - w) > 1e-9 * max(1.0, np.linalg.norm(w)):
        # the certified disc stops short of w: close with a segment of certified length
        extra = max(bracket.upper - D, 1e-15)
        pts = np.vstack([pts, w])
        times = np.append(times, D + extra)
    else:
        pts[-1] = w
    speeds = np.ones(len(times) - 1)
    return PathCurve(times, pts, speed_bounds=speeds)


def geodesic_path(domain: Domain, z, w, n=64, lam=LAMBDA_DEFAULT, kappas=KAPPA_GRID, distance_params=None):
    """Near-minimizing path from ``z`` to ``w`` with an almost-geodesic certificate.

    The path is the image of the unit-speed hyperbolic geodesic under the
    certified extremal disc of :func:`kobayashi_distance`, parameterized by
    hyperbolic arclength, which bounds its Kobayashi length from above. The
    certificate is the smallest ``kappa`` in ``kappas`` that passes at ``lam``.

    Returns ``(path, (lam, kappa), bracket)``.
    """
    z = _require_inside(domain, z)
    w = _require_inside(domain, w, "w")
    params = dict(distance_params or {})
    if np.array_equal(z, w):
        path = PathCurve(np.array([0.0]), z[None, :])
        return path, (lam, kappas[0]), MetricBracket(0.0, 0.0, 0.0)
    bracket = kobayashi_distance(domain, z, w, **params)
    path = _disc_geodesic(domain, z, w, n, bracket).validate(domain)
    data = _PairData(domain, path, params)
    reports = []
    for kappa in kappas:
        rep = verify_almost_geodesic(domain, path, lam, kappa, _cache=data)
        reports.append(rep)
        if rep.ok:
            return path, (lam, kappa), bracket
    raise DegenerateOptimizationError(
        "no kappa on the grid certifies the path",
        {"path": path, "bracket": bracket, "reports": reports},
    )


def inward_normal_point(domain: Domain, x, depth):
    """``x - depth * n(x)`` with ``n`` the unit outward normal at the boundary point ``x``."""
    x = as_point(x, domain.dim)
    val, grad = defining_function(domain, x)
    if abs(val) > 1e-8:
        raise PreconditionError("expected a boundary point")
    n = grad.conj() / np.linalg.norm(grad)
    return x - depth * n


@dataclass
class VisibilityLevel:
    level: int
    depth: float
    statistic: MetricBracket
    certificate: tuple | None
    distance: MetricBracket


def visibility_probe(domain: Domain, x, y, n_levels=6, z0=None, n_nodes=32, refine_nodes=3, distance_params=None):
    """Distance from ``z0`` to geodesics joining points that approach ``x`` and ``y``.

    Level ``n`` joins ``x - 2^-n n(x)`` and ``y - 2^-n n(y)``. Its statistic is
    the bracket of ``min_node K(z0, node)``: cheap lower bounds for every node,
    full brackets for the ``refine_nodes`` nodes with the smallest lower bounds.
    The probe passes if the estimates stay bounded: ``max <= level-3 value + 1``.
    """
    x = as_point(x, domain.dim)
    y = as_point(y, domain.dim)
    if np.linalg.norm(x - y) <= 1e-12:
        raise PreconditionError("visibility_probe needs distinct boundary points")
    z0 = domain.anchor() if z0 is None else _require_inside(domain, z0, "z0")
    params = dict(distance_params or {})
    chart0 = normalizing_chart(domain, z0)
    levels = []
    for n in range(1, n_levels + 1):
        depth = 2.0 ** (-n)
        zn = inward_normal_point(domain, x, depth)
        wn = inward_normal_point(domain, y, depth)
        try:
            path, cert, dist = geodesic_path(domain, zn, wn, n=n_nodes, distance_params=params)
        except DegenerateOptimizationError as exc:
            path, cert, dist = exc.diagnostics["path"], None, exc.diagnostics["bracket"]
        Q = chart0.forward(path.points)
        lows = distance_lower_many(chart0.target, np.broadcast_to(chart0.forward(z0)[0], Q.shape), Q)
        order = np.argsort(lows)[:refine_nodes]
        brackets = [kobayashi_distance(domain, z0, path.points[i], **params) for i in order]
        upper = min(b.upper for b in brackets)
        stat = MetricBracket(min(b.estimate for b in brackets), min(float(lows.min()), upper), upper)
        levels.append(VisibilityLevel(n, depth, stat, cert, dist))
    est = [lv.statistic.estimate for lv in levels]
    ref = est[min(2, len(est) - 1)]
    passed = bool(max(est) <= ref + 1.0)
    return {"levels": levels, "statistics": est, "pass": passed}
