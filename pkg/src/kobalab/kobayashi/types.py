"""Value types shared by the Kobayashi estimators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domains import Domain
from ..errors import PreconditionError


@dataclass(frozen=True)
class MetricBracket:
    """Certified enclosure ``lower <= true value <= upper`` with a point estimate."""

    estimate: float
    lower: float
    upper: float
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        lo, est, up = float(self.lower), float(self.estimate), float(self.upper)
        if lo < 0 or not lo <= up:
            raise ValueError(f"inconsistent bracket [{lo}, {up}]")
        est = min(max(est, lo), up)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "estimate", est)

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, value, rtol=0.0):
        slack = rtol * max(1.0, abs(value))
        return self.lower - slack <= value <= self.upper + slack

    def scaled(self, c):
        c = abs(float(c))
        return MetricBracket(c * self.estimate, c * self.lower, c * self.upper, dict(self.info))

    def to_json(self):
        return {"estimate": self.estimate, "lower": self.lower, "upper": self.upper}


@dataclass(frozen=True, eq=False)
class AnalyticDisc:
    """``f(zeta) = g(phi_c(zeta))`` with ``g(zeta) = sum_j a_j zeta^j`` and ``phi_c(zeta) = (zeta + c)/(1 + c zeta)``.

    The real centre ``c`` lets the extremal problems keep ``g`` polynomial
    while the base point ``f(0) = g(c)`` sits away from the origin of the
    parameter disc. ``chart`` (optional) maps the values back from the
    normalized coordinates in which the disc was built.
    """

    coefficients: np.ndarray
    centre: float = 0.0
    chart: object = None

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coefficients, dtype=complex))
        object.__setattr__(self, "coefficients", c)
        if not -1 < self.centre < 1:
            raise PreconditionError("disc centre must lie in (-1, 1)")

    @property
    def degree(self):
        return self.coefficients.shape[0] - 1

    def g(self, zeta):
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        powers = zeta[:, None] ** np.arange(self.degree + 1)[None, :]
        return powers @ self.coefficients

    def __call__(self, zeta):
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        c = self.centre
        vals = self.g((zeta + c) / (1 + c * zeta))
        if self.chart is not None:
            vals = self.chart.inverse(vals)
        return vals

    def base_point(self):
        return self(np.array([0.0]))[0]

    def derivative_at_zero(self):
        """``f'(0)`` in normalized coordinates (before the chart)."""
        c = self.centre
        j = np.arange(1, self.degree + 1)
        gprime = (j[:, None] * self.coefficients[1:] * c ** (j - 1)[:, None]).sum(axis=0)
        return gprime * (1 - c * c)


@dataclass(frozen=True, eq=False)
class PathCurve:
    """Sampled curve ``sigma(t_i) = points[i]`` inside a domain.

    ``speed_bounds`` (optional, one per segment) records certified upper
    bounds for the Kobayashi speed supplied by the construction (for
    instance 1 for images of unit-speed disc geodesics, by the
    distance-decreasing property of holomorphic maps).
    """

    times: np.ndarray
    points: np.ndarray
    speed_bounds: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        P = np.atleast_2d(np.asarray(self.points, dtype=complex))
        if t.ndim != 1 or t.size != P.shape[0] or t.size == 0:
            raise PreconditionError("times and points must have matching lengths")
        if np.any(np.diff(t) <= 0):
            raise PreconditionError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", P)
        if self.speed_bounds is not None:
            sb = np.asarray(self.speed_bounds, dtype=float)
            if sb.shape != (t.size - 1,):
                raise PreconditionError("speed_bounds needs one entry per segment")
            object.__setattr__(self, "speed_bounds", sb)

    def __len__(self):
        return self.times.size

    @property
    def span(self):
        return float(self.times[-1] - self.times[0])

    def validate(self, domain: Domain):
        """Raise if a node or a segment midpoint leaves the domain."""
        P = self.points
        mids = 0.5 * (P[1:] + P[:-1])
        if not np.all(domain.contains_batch(P)) or (len(mids) and not np.all(domain.contains_batch(mids))):
            raise PreconditionError("path leaves the domain")
        return self

    def to_rows(self):
        rows = []
        for t, p in zip(self.times, self.points):
            row = [float(t)]
            for c in p:
                row += [float(c.real), float(c.imag)]
            rows.append(row)
        return rows
