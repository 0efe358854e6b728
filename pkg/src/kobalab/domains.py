"""Model domains in C^d: balls, polydiscs, generalized ellipses and weighted
homogeneous polynomial (WHP) domains.

Points are 1-D complex numpy arrays. Every domain carries a fixed canonical
defining function ``r`` with ``r < 0`` exactly on the domain:

* ball of radius R:      ``|z|^2 / R^2 - 1``
* polydisc:              ``max_j |z_j|^2 - 1``
* ellipse E(m_1..m_d):   ``sum_j |z_j|^(2 m_j) - 1``
* WHP {Im w > p(z)}:     ``p(z) - Im w``

Gradients are Wirtinger derivatives ``dr/dz_j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy import optimize

from . import kernels
from .errors import NumericError, PreconditionError

BOUNDARY_TOL = 1e-10
DEGENERATE_GRADIENT = 1e-12


def as_point(z, dim=None) -> np.ndarray:
    """Coerce ``z`` to a finite 1-D complex array, optionally checking its length."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if arr.ndim != 1 or arr.size == 0:
        raise PreconditionError(f"expected a 1-D point, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("point has non-finite coordinates")
    if dim is not None and arr.size != dim:
        raise PreconditionError(f"dimension mismatch: point has {arr.size} coordinates, domain has {dim}")
    return arr


class DefiningFunctionValue(NamedTuple):
    value: float
    gradient: np.ndarray


class Domain:
    """Common interface. Subclasses are frozen dataclasses."""

    dim: int
    bounded = True
    convex = True

    # -- defining function ------------------------------------------------
    def r_batch(self, Z):
        """Return ``(values, gradients)`` for the rows of ``Z``."""
        raise NotImplementedError

    def r(self, z) -> float:
        return float(self.r_batch(as_point(z, self.dim)[None, :])[0][0])

    def contains_batch(self, Z) -> np.ndarray:
        return self.r_batch(np.asarray(Z, dtype=complex))[0] < 0

    def anchor(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=complex)

    # -- global geometry used by the certified brackets --------------------
    def circumradius(self) -> float:
        """Upper bound for ``max |z|`` over the closed domain."""
        raise NotImplementedError

    def gradient_lipschitz(self) -> float:
        """Upper bound for the real gradient norm ``2 |dr/dz|`` over the closed domain."""
        raise NotImplementedError

    def support(self, u) -> float:
        """Upper bound for ``max Re <z, u>`` over the closed domain (= max |<z, u>|)."""
        return float(self.support_batch(np.asarray(u, dtype=complex)[None, :])[0])

    def support_batch(self, U) -> np.ndarray:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def ray_hits(self, X, U) -> np.ndarray:
        """``t`` with ``x + t u`` on the boundary, for interior rows ``x`` and unit rows ``u``."""
        kind, exps, radius = self._kernel_params()
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        U = np.atleast_2d(np.asarray(U, dtype=complex))
        X, U = np.broadcast_arrays(X, U)
        start = 1.01 * (np.linalg.norm(X, axis=1) + self.circumradius()) / np.linalg.norm(U, axis=1)
        return kernels.ray_hits(kind, exps, radius, X, U, start)

    def _kernel_params(self):
        raise PreconditionError(f"{type(self).__name__} has no kernel ray support")


@dataclass(frozen=True)
class Ball(Domain):
    """The ball ``{|z| < radius}`` in C^dim."""

    dim: int
    radius: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise PreconditionError("dimension must be at least 1")
        if not self.radius > 0:
            raise PreconditionError("radius must be positive")

    @property
    def exponents(self):
        return np.ones(self.dim)

    def r_batch(self, Z):
        return kernels.defining_values(kernels.KIND_POWER_SUM, self.exponents, float(self.radius), Z)

    def ray_scales(self, Z):
        return kernels.ray_scales(kernels.KIND_POWER_SUM, self.exponents, float(self.radius), Z)

    def circumradius(self):
        return float(self.radius)

    def _kernel_params(self):
        return kernels.KIND_POWER_SUM, self.exponents, float(self.radius)

    def gradient_lipschitz(self):
        return 2.0 / self.radius

    def support_batch(self, U):
        return self.radius * np.linalg.norm(U, axis=1)

    def to_json(self):
        out = {"kind": "ball", "dim": self.dim}
        if self.radius != 1.0:
            out["radius"] = self.radius
        return out


@dataclass(frozen=True)
class Polydisc(Domain):
    """The unit polydisc ``{max |z_j| < 1}``."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise PreconditionError("dimension must be at least 1")

    def r_batch(self, Z):
        return kernels.defining_values(kernels.KIND_POLYDISC, np.ones(self.dim), 1.0, Z)

    def ray_scales(self, Z):
        return kernels.ray_scales(kernels.KIND_POLYDISC, np.ones(self.dim), 1.0, Z)

    def circumradius(self):
        return float(np.sqrt(self.dim))

    def _kernel_params(self):
        return kernels.KIND_POLYDISC, np.ones(self.dim), 1.0

    def gradient_lipschitz(self):
        return 2.0

    def support_batch(self, U):
        return np.abs(U).sum(axis=1)

    def to_json(self):
        return {"kind": "polydisc", "dim": self.dim}


@dataclass(frozen=True)
class Ellipse(Domain):
    """Generalized ellipse ``{sum |z_j|^(2 m_j) < 1}`` with ``m`` nondecreasing."""

    exponents: tuple

    def __post_init__(self):
        exps = tuple(int(m) for m in self.exponents)
        if not exps:
            raise PreconditionError("an ellipse needs at least one exponent")
        if any(m < 1 for m in exps) or any(float(m) != float(e) for m, e in zip(exps, self.exponents)):
            raise PreconditionError("exponents must be positive integers")
        if list(exps) != sorted(exps):
            raise PreconditionError("exponents must be sorted ascending (leading block of 1s first)")
        object.__setattr__(self, "exponents", exps)

    @property
    def dim(self):
        return len(self.exponents)

    @property
    def k(self):
        """Number of exponent-one coordinates (size of the ball factor)."""
        return sum(1 for m in self.exponents if m == 1)

    @property
    def _m(self):
        return np.asarray(self.exponents, dtype=float)

    def r_batch(self, Z):
        return kernels.defining_values(kernels.KIND_POWER_SUM, self._m, 1.0, Z)

    def ray_scales(self, Z):
        return kernels.ray_scales(kernels.KIND_POWER_SUM, self._m, 1.0, Z)

    def circumradius(self):
        # |z|^2 = sum t^(2m) + sum (t^2 - t^(2m)); the second sum is maximized termwise
        extra = 0.0
        for m in self.exponents:
            if m > 1:
                t2 = m ** (-1.0 / (m - 1))
                extra += t2 - t2 ** m
        return float(np.sqrt(1.0 + extra) * (1 + 1e-14))

    def gradient_lipschitz(self):
        return float(2.0 * np.sqrt(np.sum(self._m ** 2)))

    def _kernel_params(self):
        return kernels.KIND_POWER_SUM, self._m, 1.0

    def support_batch(self, U):
        # maximize sum a_j t_j subject to sum t_j^(2 m_j) = 1: t_j = (a_j / (2 m_j mu))^(1/(2 m_j - 1)),
        # with the multiplier mu found by bisection in log space
        a = np.abs(np.atleast_2d(np.asarray(U, dtype=complex)))
        m = self._m[None, :]
        expo = 1.0 / (2 * m - 1)
        base = (a / (2 * m)) ** expo
        lo = np.full(a.shape[0], -80.0)
        hi = np.full(a.shape[0], 80.0)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            t = base * np.exp(-mid[:, None] * expo)
            over = np.sum(t ** (2 * m), axis=1) > 1
            lo = np.where(over, mid, lo)
            hi = np.where(over, hi, mid)
        t = base * np.exp(-lo[:, None] * expo)  # lo keeps sum t^(2m) >= 1: overestimates the max
        return np.sum(a * t, axis=1) * (1 + 1e-12)

    def to_json(self):
        return {"kind": "ellipse", "exponents": list(self.exponents)}


@dataclass(frozen=True)
class WHP(Domain):
    """Weighted homogeneous polynomial domain ``{(w, z) : Im w > p(z)}``.

    ``weights[0]`` is the weight of ``w`` and must be 1; ``weights[1:]`` are the
    weights of ``z``. ``monomials`` is a tuple of ``(alpha, beta, c)`` meaning
    ``c z^alpha conj(z)^beta``; the list must be Hermitian so ``p`` is real.
    """

    dim: int
    weights: tuple
    monomials: tuple

    bounded = False
    convex = False

    def __post_init__(self):
        if self.dim < 2:
            raise PreconditionError("a WHP domain needs dim >= 2 (w plus at least one z)")
        weights = tuple(int(m) for m in self.weights)
        if len(weights) != self.dim or weights[0] != 1 or any(m < 1 for m in weights):
            raise PreconditionError("weights must have length dim, start with 1 (the w weight) and be positive")
        n = self.dim - 1
        table = {}
        for alpha, beta, c in self.monomials:
            alpha, beta = tuple(int(a) for a in alpha), tuple(int(b) for b in beta)
            if len(alpha) != n or len(beta) != n or min(alpha + beta) < 0:
                raise PreconditionError("monomial multi-indices must have length dim-1 and be nonnegative")
            table[(alpha, beta)] = table.get((alpha, beta), 0.0) + float(c)
        for (alpha, beta), c in table.items():
            if abs(table.get((beta, alpha), 0.0) - c) > 1e-12 * max(1.0, abs(c)):
                raise PreconditionError("monomial list is not Hermitian-symmetric; p would not be real")
            deg = sum(Fraction(a + b, m) for a, b, m in zip(alpha, beta, weights[1:]))
            if c != 0.0 and deg != 1:
                raise PreconditionError(f"monomial {alpha},{beta} has weighted degree {deg}, expected 1")
        mons = tuple((a, b, c) for (a, b), c in sorted(table.items()) if c != 0.0)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "monomials", mons)

    @classmethod
    def symmetrized(cls, dim, weights, monomials):
        """Build from an arbitrary monomial list by averaging with its conjugate."""
        half = []
        for alpha, beta, c in monomials:
            half.append((tuple(alpha), tuple(beta), 0.5 * float(c)))
            half.append((tuple(beta), tuple(alpha), 0.5 * float(c)))
        return cls(dim, tuple(weights), tuple(half))

    @classmethod
    def siegel(cls, dim):
        """``{Im w > |z|^2}``, the unbounded realization of Ball(dim)."""
        n = dim - 1
        mons = tuple((e, e, 1.0) for e in (tuple(int(i == j) for i in range(n)) for j in range(n)))
        return cls(dim, (1,) + (2,) * n, mons)

    def is_siegel(self) -> bool:
        return self == WHP.siegel(self.dim)

    def p_batch(self, Zs):
        """Evaluate ``p`` and ``dp/dz`` on the rows of ``Zs`` (shape (M, dim-1))."""
        Zs = np.asarray(Zs, dtype=complex)
        M, n = Zs.shape
        val = np.zeros(M, dtype=complex)
        grad = np.zeros((M, n), dtype=complex)
        Zc = Zs.conj()
        for alpha, beta, c in self.monomials:
            a = np.asarray(alpha)
            b = np.asarray(beta)
            zb = np.prod(Zc ** b, axis=1)
            val += c * np.prod(Zs ** a, axis=1) * zb
            for j in range(n):
                if a[j]:
                    aj = a.copy()
                    aj[j] -= 1
                    grad[:, j] += c * a[j] * np.prod(Zs ** aj, axis=1) * zb
        return val.real, grad

    def p(self, z) -> float:
        return float(self.p_batch(as_point(z, self.dim - 1)[None, :])[0][0])

    def r_batch(self, Z):
        Z = np.asarray(Z, dtype=complex)
        pv, pg = self.p_batch(Z[:, 1:])
        grads = np.empty_like(Z)
        grads[:, 0] = 0.5j
        grads[:, 1:] = pg
        return pv - Z[:, 0].imag, grads

    def anchor(self):
        a = np.zeros(self.dim, dtype=complex)
        a[0] = 1j * (1.0 + max((abs(c) for _, _, c in self.monomials), default=0.0))
        return a

    def dilation_exponents(self):
        """``1/m_j`` for the z coordinates (the A_t = diag(e^(t/m_j)) of the dilation flow)."""
        return 1.0 / np.asarray(self.weights[1:], dtype=float)

    def to_json(self):
        return {
            "kind": "whp",
            "dim": self.dim,
            "weights": list(self.weights),
            "monomials": [[list(a), list(b), c] for a, b, c in self.monomials],
        }


def disc() -> Ball:
    """The unit disc, i.e. Ball(1)."""
    return Ball(1)


# ---------------------------------------------------------------------------
# operations


def contains(domain: Domain, z) -> bool:
    """True iff the defining function is strictly negative at ``z``."""
    z = as_point(z, domain.dim)
    return bool(domain.r(z) < 0)


def defining_function(domain: Domain, z) -> DefiningFunctionValue:
    z = as_point(z, domain.dim)
    vals, grads = domain.r_batch(z[None, :])
    return DefiningFunctionValue(float(vals[0]), grads[0].copy())


def _ray_crossing(domain, origin, direction, t_max=1e8):
    """Smallest ``t > 0`` with ``r(origin + t*direction) = 0`` (bisection; origin inside)."""
    f = lambda t: domain.r(origin + t * direction)
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
        if hi > t_max:
            raise PreconditionError("ray does not leave the domain")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    return lo, hi


def boundary_project(domain: Domain, z) -> np.ndarray:
    """Boundary point on the ray from the domain's anchor through ``z``.

    ``z`` equal to the anchor is sent along the first coordinate axis.
    """
    z = as_point(z, domain.dim)
    if not contains(domain, z):
        raise PreconditionError("boundary_project needs an interior point")
    anchor = domain.anchor()
    direction = z - anchor
    if not np.any(direction):
        direction = np.zeros(domain.dim, dtype=complex)
        direction[0] = 1.0
        if isinstance(domain, WHP):
            direction[0] = -1j
    if hasattr(domain, "ray_scales"):
        t = domain.ray_scales(direction[None, :])[0]
        x = anchor + t * direction
        if abs(domain.r(x)) > BOUNDARY_TOL:
            lo, hi = _ray_crossing(domain, anchor, direction)
            x = anchor + hi * direction
        return x
    lo, hi = _ray_crossing(domain, anchor, direction)
    x_lo, x_hi = anchor + lo * direction, anchor + hi * direction
    return x_hi if abs(domain.r(x_hi)) <= abs(domain.r(x_lo)) else x_lo


def boundary_distance_upper(domain: Domain, Z) -> np.ndarray:
    """Distance from each row of ``Z`` to its radial boundary projection (an upper bound)."""
    Z = np.asarray(Z, dtype=complex)
    t = domain.ray_scales(Z)
    with np.errstate(invalid="ignore"):
        out = np.abs(t - 1.0) * np.linalg.norm(Z, axis=1)
    out[~np.isfinite(t)] = domain.circumradius() if domain.bounded else np.inf
    return out


def boundary_distance_lower(domain: Domain, Z) -> np.ndarray:
    """``|r(z)| / Lip(r)``, a lower bound for the Euclidean distance to the boundary."""
    vals = domain.r_batch(np.asarray(Z, dtype=complex))[0]
    return np.abs(vals) / domain.gradient_lipschitz()


def _sample_directions(d, n, seed):
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def euclidean_boundary_distance_bracket(domain: Domain, z, n_rays=64, seed=0):
    """Certified ``(lower, upper)`` for the Euclidean distance from ``z`` to the boundary.

    The upper value is the shortest of the boundary hits along the outward
    normal, the coordinate axes, the radial ray and ``n_rays`` seeded random
    directions; the lower value is ``|r(z)| / Lip(r)``, where ``Lip`` bounds the
    gradient of ``r`` on the circumscribing ball.
    """
    if not domain.bounded:
        raise PreconditionError("distance brackets are only defined for bounded domains")
    z = as_point(z, domain.dim)
    val, grad = defining_function(domain, z)
    if val >= 0:
        raise PreconditionError("point is not inside the domain")
    d = domain.dim
    dirs = [np.eye(d, dtype=complex), 1j * np.eye(d, dtype=complex), -np.eye(d, dtype=complex),
            -1j * np.eye(d, dtype=complex), _sample_directions(d, n_rays, seed)]
    if np.linalg.norm(grad) > 0:
        dirs.append((grad.conj() / np.linalg.norm(grad))[None, :])
    if np.linalg.norm(z) > 0:
        dirs.append((z / np.linalg.norm(z))[None, :])
    U = np.vstack(dirs)
    hits = domain.ray_hits(np.broadcast_to(z, U.shape), U)
    # every hit is a boundary point up to round-off, so the smallest is an upper bound;
    # polish the best direction locally
    u0 = U[np.argmin(hits)]

    def hit(x):
        u = x[:d] + 1j * x[d:]
        nu = np.linalg.norm(u)
        if nu == 0:
            return np.inf
        return float(domain.ray_hits(z[None, :], (u / nu)[None, :])[0])

    res = optimize.minimize(hit, np.concatenate([u0.real, u0.imag]), method="Nelder-Mead",
                            options={"maxfev": 60 * d, "xatol": 1e-10, "fatol": 1e-14})
    hits = np.append(hits, res.fun)
    upper = float(hits.min() * (1 + 1e-12))
    lower = float(abs(val) / domain.gradient_lipschitz())
    return min(lower, upper), upper


def complex_tangent_basis(domain: Domain, x) -> list:
    """Orthonormal basis of ``{v : sum_j dr/dz_j(x) v_j = 0}`` at a boundary point ``x``."""
    x = as_point(x, domain.dim)
    val, grad = defining_function(domain, x)
    if abs(val) > 1e-8:
        raise PreconditionError("complex_tangent_basis needs a boundary point")
    gnorm = np.linalg.norm(grad)
    if gnorm < DEGENERATE_GRADIENT:
        raise NumericError("degenerate gradient at boundary point")
    n = grad.conj() / gnorm  # <v, n> = sum v_j dr/dz_j / |grad|
    d = domain.dim
    cands = []
    for j in range(d):
        e = np.zeros(d, dtype=complex)
        e[j] = 1.0
        resid = e - np.vdot(n, e) * n
        cands.append((np.linalg.norm(resid), j, resid))
    chosen = sorted(sorted(cands, key=lambda c: -c[0])[: d - 1], key=lambda c: c[1])
    basis = []
    for _, _, v in chosen:
        v = v - np.vdot(n, v) * n
        for b in basis:
            v = v - np.vdot(b, v) * b
        basis.append(v / np.linalg.norm(v))
    return basis


# ---------------------------------------------------------------------------
# Cayley correspondence Ball(d) <-> {Im w > |z'|^2}


def cayley(z) -> np.ndarray:
    """Ball(d) -> Siegel domain, ``(z1, z') -> (i(1+z1)/(1-z1), z'/(1-z1))``."""
    z = as_point(z)
    if np.vdot(z, z).real >= 1.0:
        raise PreconditionError("cayley needs a point of the open ball")
    out = np.empty_like(z)
    out[0] = 1j * (1 + z[0]) / (1 - z[0])
    out[1:] = z[1:] / (1 - z[0])
    return out


def cayley_inverse(p) -> np.ndarray:
    """Siegel domain -> Ball(d)."""
    p = as_point(p)
    w, zs = p[0], p[1:]
    if not w.imag > np.vdot(zs, zs).real:
        raise PreconditionError("cayley_inverse needs a point with Im w > |z|^2")
    out = np.empty_like(p)
    out[0] = (w - 1j) / (w + 1j)
    out[1:] = zs * 2j / (w + 1j)
    return out


def cayley_inverse_pushforward(p, v) -> np.ndarray:
    """Differential of :func:`cayley_inverse` at ``p`` applied to ``v``."""
    p = as_point(p)
    v = as_point(v, p.size)
    w, zs = p[0], p[1:]
    out = np.empty_like(v)
    out[0] = 2j * v[0] / (w + 1j) ** 2
    out[1:] = 2j * v[1:] / (w + 1j) - zs * 2j * v[0] / (w + 1j) ** 2
    return out


# ---------------------------------------------------------------------------
# JSON


def domain_from_json(obj) -> Domain:
    """Parse the domain JSON schema (dict). Unknown keys are rejected."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise PreconditionError("domain JSON must be an object with a 'kind' field")
    kind = obj["kind"]
    allowed = {
        "ball": {"kind", "dim", "radius"},
        "polydisc": {"kind", "dim"},
        "ellipse": {"kind", "exponents"},
        "whp": {"kind", "dim", "weights", "monomials"},
    }
    if kind not in allowed:
        raise PreconditionError(f"unknown domain kind {kind!r}")
    extra = set(obj) - allowed[kind]
    if extra:
        raise PreconditionError(f"unknown domain fields {sorted(extra)}")
    try:
        if kind == "ball":
            return Ball(int(obj["dim"]), float(obj.get("radius", 1.0)))
        if kind == "polydisc":
            return Polydisc(int(obj["dim"]))
        if kind == "ellipse":
            return Ellipse(tuple(obj["exponents"]))
        mons = tuple((tuple(a), tuple(b), float(c)) for a, b, c in obj["monomials"])
        return WHP(int(obj["dim"]), tuple(obj["weights"]), mons)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise PreconditionError(f"malformed domain JSON: {exc}") from exc


def domain_to_json(domain: Domain) -> dict:
    return domain.to_json()


def weighted_homogeneity_residual(domain: WHP, z, t) -> float:
    """``|p(t^(1/m) z) - t p(z)|`` for one sample."""
    z = as_point(z, domain.dim - 1)
    scaled = z * t ** domain.dilation_exponents()
    return abs(domain.p(scaled) - t * domain.p(z))


def random_interior_points(domain: Domain, n, seed=0, max_radius=1.0):
    """Seeded points of a bounded domain, uniform in the radial scale up to ``max_radius``."""
    rng = np.random.default_rng(seed)
    U = _sample_directions(domain.dim, n, rng.integers(2**32))
    t = domain.ray_scales(U)
    s = rng.uniform(0, max_radius, size=n)
    return U * (t * s)[:, None]


__all__ = [
    "Ball", "Polydisc", "Ellipse", "WHP", "Domain", "DefiningFunctionValue", "disc",
    "as_point", "contains", "defining_function", "boundary_project",
    "euclidean_boundary_distance_bracket", "complex_tangent_basis", "cayley", "cayley_inverse",
    "cayley_inverse_pushforward", "domain_from_json", "domain_to_json",
    "boundary_distance_upper", "boundary_distance_lower", "random_interior_points",
    "weighted_homogeneity_residual",
]
