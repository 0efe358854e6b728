"""Closed-form automorphisms of the model domains.

* :class:`BallMoebius` -- an element of U(1,k) acting on the unit ball B_k by
  ``z -> (b + A z) / (e + c.z)`` for ``g = [[e, c], [b, A]]``.
* :class:`WebsterAut` -- an identity-component automorphism of a generalized
  ellipse: a Moebius map on the exponent-one block and phase times
  ``S_phi^(1/2m_j)`` on the remaining coordinates.
* :class:`WHPFlow` -- translation ``(w + t, z)`` or dilation
  ``(e^t w, e^(t/m_j) z_j)`` of a weighted homogeneous polynomial domain.

All objects are immutable; composition, inversion and powers return new
objects of the same kind.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .domains import WHP, Ball, Domain, Ellipse, as_point, domain_from_json
from .errors import NumericError, PreconditionError

J_TOL = 1e-10
DEN_TOL = 1e-14


def J_form(n):
    """``diag(1, -1, ..., -1)`` of size ``n``."""
    J = -np.eye(n)
    J[0, 0] = 1.0
    return J


def j_residual(g) -> float:
    """``max |g* J g - J|`` relative to ``max(1, |g|^2)``.

    Long products have entries of size ``|g|`` and their Hermitian form is
    computed from products of such entries, so round-off scales like ``|g|^2``.
    """
    g = np.asarray(g, dtype=complex)
    J = J_form(g.shape[0])
    res = np.abs(g.conj().T @ J @ g - J).max()
    return float(res / max(1.0, np.abs(g).max() ** 2))


def reproject(g, iterations=3):
    """Pull a nearly J-unitary matrix back onto U(1,k).

    Uses the Newton-Schulz step ``g <- g (3I - M) / 2`` with
    ``M = J g* J g``, which converges quadratically to the polar-type factor.
    """
    g = np.array(g, dtype=complex)
    n = g.shape[0]
    J = J_form(n)
    eye = np.eye(n)
    for _ in range(iterations):
        M = J @ g.conj().T @ J @ g
        if np.abs(M - eye).max() < 1e-15:
            break
        g = g @ (3 * eye - M) / 2
    return g


def _normalize_det(g):
    det = np.linalg.det(g)
    if not np.isfinite(det) or abs(det) == 0:
        raise NumericError("singular Moebius matrix")
    return g / abs(det) ** (1.0 / g.shape[0])


# ---------------------------------------------------------------------------
# Ball Moebius maps


@dataclass(frozen=True, eq=False)
class BallMoebius:
    """Element of U(1,k) acting on B_k by fractional linear transformations."""

    matrix: np.ndarray

    def __post_init__(self):
        g = np.array(self.matrix, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 2:
            raise PreconditionError("Moebius matrix must be square of size k+1 >= 2")
        if not np.all(np.isfinite(g)):
            raise PreconditionError("Moebius matrix has non-finite entries")
        g = _normalize_det(g)
        res = j_residual(g)
        if res > J_TOL:
            if res > 1e-6:
                raise PreconditionError(f"matrix is not J-unitary (residual {res:.3g})")
            g = reproject(g)
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)

    @classmethod
    def trusted(cls, matrix):
        """Wrap a product of normalized J-unitary matrices without the J-residual check.

        Long powers of parabolic elements are ill-conditioned, so their
        residual grows with the norm even though the product is exact in
        principle.
        """
        obj = object.__new__(cls)
        m = np.array(matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(obj, "matrix", m)
        return obj

    @property
    def k(self):
        return self.matrix.shape[0] - 1

    @property
    def domain(self):
        return Ball(self.k)

    def __call__(self, z):
        return moebius_apply(self, z)

    def __repr__(self):
        return f"BallMoebius(k={self.k}, matrix={np.array2string(self.matrix, precision=4)})"


def moebius_apply(phi: BallMoebius, z, check=True) -> np.ndarray:
    """Apply ``phi`` to a point (1-D) or to the rows of a batch (2-D) of the closed ball."""
    g = phi.matrix
    Z = np.asarray(z, dtype=complex)
    single = Z.ndim <= 1
    Z = np.atleast_2d(Z)
    if Z.shape[1] != phi.k:
        raise PreconditionError(f"dimension mismatch: point has {Z.shape[1]} coordinates, map acts on C^{phi.k}")
    if check and np.any(np.einsum("ij,ij->i", Z, Z.conj()).real > 1 + 1e-8):
        raise PreconditionError("moebius_apply needs points of the closed unit ball")
    den = g[0, 0] + Z @ g[0, 1:]
    if np.any(np.abs(den) < DEN_TOL):
        raise NumericError("Moebius denominator vanished (invariant breach)")
    W = (g[1:, 0][None, :] + Z @ g[1:, 1:].T) / den[:, None]
    return W[0] if single else W


def moebius_inverse_origin(phi: BallMoebius) -> np.ndarray:
    """``phi^{-1}(0)`` from the matrix: ``-conj(g[0, 1:]) / conj(g00)``."""
    g = phi.matrix
    return -g[0, 1:].conj() / g[0, 0].conj()


def s_phi(phi: BallMoebius, z) -> complex:
    """Webster's factor ``S_phi(z) = (1 - |a|^2) / (1 - <z, a>)^2`` with ``a = phi^{-1}(0)``.

    ``<z, a> = sum z_i conj(a_i)``. Accepts a single point or a batch of rows.
    """
    Z = np.asarray(z, dtype=complex)
    single = Z.ndim <= 1
    Z = np.atleast_2d(Z)
    a = moebius_inverse_origin(phi)
    q = 1.0 - Z @ a.conj()
    out = (1.0 - np.vdot(a, a).real) / q ** 2
    return complex(out[0]) if single else out


def _s_phi_stable(g, Z):
    """Same value as :func:`s_phi`, written as ``1 / (|g00|^2 q^2)`` with ``q = (g00 + g0.z) / g00``.

    The two agree because ``1 - |a|^2 = 1/|g00|^2``; this form avoids the
    cancellation in ``1 - |a|^2`` when ``|a|`` is close to 1.
    """
    q = (g[0, 0] + Z @ g[0, 1:]) / g[0, 0]
    return 1.0 / (abs(g[0, 0]) ** 2 * q ** 2), q


# ---------------------------------------------------------------------------
# Webster automorphisms of generalized ellipses


@dataclass(frozen=True, eq=False)
class WebsterAut:
    """``z -> (phi(z^k), z_j e^{i theta_j} S_phi(z^k)^(1/2 m_j), ...)`` on an ellipse."""

    ellipse: Ellipse
    phi: BallMoebius
    phases: tuple = field(default=())

    def __post_init__(self):
        E = self.ellipse
        if not isinstance(E, Ellipse):
            raise PreconditionError("WebsterAut needs an Ellipse domain")
        if E.k < 1:
            raise PreconditionError("the ellipse needs at least one exponent equal to 1")
        if self.phi.k != E.k:
            raise PreconditionError(f"Moebius part acts on C^{self.phi.k}, ellipse has k = {E.k}")
        ntail = E.dim - E.k
        phases = tuple(float(t) for t in (self.phases or (0.0,) * ntail))
        if len(phases) != ntail:
            raise PreconditionError(f"expected {ntail} phases, got {len(phases)}")
        phases = tuple(float(np.remainder(t, 2 * np.pi)) for t in phases)
        object.__setattr__(self, "phases", phases)

    @property
    def domain(self):
        return self.ellipse

    @property
    def k(self):
        return self.ellipse.k

    @property
    def tail_exponents(self):
        return np.asarray(self.ellipse.exponents[self.k:], dtype=float)

    def __call__(self, z):
        return webster_apply(self, z)


def webster_apply(g: WebsterAut, z, check=True) -> np.ndarray:
    """Apply a Webster automorphism to a point or to the rows of a batch."""
    E = g.ellipse
    Z = np.asarray(z, dtype=complex)
    single = Z.ndim <= 1
    Z = np.atleast_2d(Z)
    if Z.shape[1] != E.dim:
        raise PreconditionError(f"dimension mismatch: point has {Z.shape[1]} coordinates, ellipse has {E.dim}")
    if check and np.any(E.r_batch(Z)[0] > 1e-8):
        raise PreconditionError("webster_apply needs points of the closed ellipse")
    k = g.k
    out = np.empty_like(Z)
    out[:, :k] = moebius_apply(g.phi, Z[:, :k], check=False)
    if E.dim > k:
        S, _ = _s_phi_stable(g.phi.matrix, Z[:, :k])
        p = 1.0 / (2.0 * g.tail_exponents)
        # principal branch: Re q > 0 keeps S off the negative axis
        roots = S[:, None] ** p[None, :]
        out[:, k:] = Z[:, k:] * np.exp(1j * np.asarray(g.phases))[None, :] * roots
    return out[0] if single else out


def webster_walk(gens, word, z0):
    """Trajectory of ``z0`` under successive application of ``gens[word[i]]`` (kernel backed)."""
    gens = list(gens)
    E = gens[0].ellipse
    if any(h.ellipse != E for h in gens):
        raise PreconditionError("all generators must act on the same ellipse")
    mats = np.stack([h.phi.matrix for h in gens])
    tail = np.asarray([h.phases for h in gens], dtype=float).reshape(len(gens), -1)
    return kernels.webster_walk(mats, tail, gens[0].tail_exponents, np.asarray(word, dtype=np.int_),
                                as_point(z0, E.dim))


def _webster_phase_correction(phi1: BallMoebius, phi2: BallMoebius, exps) -> np.ndarray:
    """Constant ``c_j`` with ``S_1(phi2 z)^p S_2(z)^p = e^{i c_j} S_12(z)^p`` for ``p = 1/2m_j``.

    Both sides are nonvanishing holomorphic functions on the ball with equal
    modulus (by the identity ``1 - |phi(z)|^2 = |S_phi(z)| (1 - |z|^2)``), so the
    ratio is a unimodular constant; evaluate it at ``z = 0``.
    """
    k = phi1.k
    zero = np.zeros((1, k), dtype=complex)
    w = moebius_apply(phi2, zero, check=False)
    g12 = phi1.matrix @ phi2.matrix
    S1, _ = _s_phi_stable(phi1.matrix, w)
    S2, _ = _s_phi_stable(phi2.matrix, zero)
    S12, _ = _s_phi_stable(g12, zero)
    p = 1.0 / (2.0 * np.asarray(exps, dtype=float))
    ratio = S1[0] ** p * S2[0] ** p / S12[0] ** p
    return np.angle(ratio)


# ---------------------------------------------------------------------------
# WHP flows


@dataclass(frozen=True)
class WHPFlow:
    """Translation ``(w + t, z)`` or dilation ``(e^t w, e^(t/m_j) z_j)`` of a WHP domain."""

    spec: WHP
    kind: str
    t: float

    def __post_init__(self):
        if self.kind not in ("translation", "dilation"):
            raise PreconditionError("WHPFlow kind must be 'translation' or 'dilation'")
        if not isinstance(self.spec, WHP):
            raise PreconditionError("WHPFlow needs a WHP domain")
        if not np.isfinite(self.t):
            raise PreconditionError("flow time must be finite")
        object.__setattr__(self, "t", float(self.t))

    @property
    def domain(self):
        return self.spec

    def __call__(self, p):
        return whp_flow_apply(self, p)


def whp_flow_apply(flow: WHPFlow, point, check=True) -> np.ndarray:
    P = np.asarray(point, dtype=complex)
    single = P.ndim <= 1
    P = np.atleast_2d(P)
    if P.shape[1] != flow.spec.dim:
        raise PreconditionError("dimension mismatch for WHP flow")
    if check and np.any(flow.spec.r_batch(P)[0] > 1e-8):
        raise PreconditionError("whp_flow_apply needs points of the closed domain")
    out = P.copy()
    if flow.kind == "translation":
        out[:, 0] += flow.t
    else:
        out[:, 0] *= np.exp(flow.t)
        out[:, 1:] *= np.exp(flow.t * flow.spec.dilation_exponents())[None, :]
    return out[0] if single else out


# ---------------------------------------------------------------------------
# generic operations


def apply(g, z, check=True):
    """Apply any supported automorphism."""
    if isinstance(g, BallMoebius):
        return moebius_apply(g, z, check=check)
    if isinstance(g, WebsterAut):
        return webster_apply(g, z, check=check)
    if isinstance(g, WHPFlow):
        return whp_flow_apply(g, z, check=check)
    raise PreconditionError(f"unsupported automorphism type {type(g).__name__}")


def compose(g1, g2, check=True):
    """``g1 o g2`` (apply ``g2`` first). ``check=False`` skips the J-residual test of the product."""
    if isinstance(g1, BallMoebius) and isinstance(g2, BallMoebius):
        if g1.k != g2.k:
            raise PreconditionError("Moebius maps act on balls of different dimension")
        if not check:
            return BallMoebius.trusted(g1.matrix @ g2.matrix)
        return BallMoebius(g1.matrix @ g2.matrix)
    if isinstance(g1, WebsterAut) and isinstance(g2, WebsterAut):
        if g1.ellipse != g2.ellipse:
            raise PreconditionError("Webster maps act on different ellipses")
        corr = _webster_phase_correction(g1.phi, g2.phi, g1.tail_exponents)
        phases = np.asarray(g1.phases) + np.asarray(g2.phases) + corr
        return WebsterAut(g1.ellipse, compose(g1.phi, g2.phi, check), tuple(phases))
    if isinstance(g1, WHPFlow) and isinstance(g2, WHPFlow):
        if g1.spec != g2.spec:
            raise PreconditionError("flows act on different domains")
        if g1.kind == g2.kind:
            return WHPFlow(g1.spec, g1.kind, g1.t + g2.t)
        raise PreconditionError("composition of a translation with a dilation is not a single flow")
    raise PreconditionError("compose needs two automorphisms of the same kind")


def inverse(g):
    if isinstance(g, BallMoebius):
        n = g.k + 1
        J = J_form(n)
        return BallMoebius(J @ g.matrix.conj().T @ J)
    if isinstance(g, WebsterAut):
        phi_inv = inverse(g.phi)
        corr = _webster_phase_correction(phi_inv, g.phi, g.tail_exponents)
        phases = -np.asarray(g.phases) - corr
        return WebsterAut(g.ellipse, phi_inv, tuple(phases))
    if isinstance(g, WHPFlow):
        return WHPFlow(g.spec, g.kind, -g.t)
    raise PreconditionError(f"unsupported automorphism type {type(g).__name__}")


def identity_like(g):
    if isinstance(g, BallMoebius):
        return moebius_identity(g.k)
    if isinstance(g, WebsterAut):
        return WebsterAut(g.ellipse, moebius_identity(g.k))
    if isinstance(g, WHPFlow):
        return WHPFlow(g.spec, g.kind, 0.0)
    raise PreconditionError(f"unsupported automorphism type {type(g).__name__}")


def power(g, n: int):
    """``g^n`` by repeated squaring (negative ``n`` uses the inverse)."""
    n = int(n)
    if n < 0:
        return power(inverse(g), -n)
    if isinstance(g, WHPFlow):
        return WHPFlow(g.spec, g.kind, n * g.t)
    result = identity_like(g)
    base = g
    while n:
        if n & 1:
            result = compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


def domain_of(g) -> Domain:
    return g.domain


def boundary_extend(g, x) -> np.ndarray:
    """Image of a boundary point under the closed-form extension of ``g``."""
    D = domain_of(g)
    x = as_point(x, D.dim)
    if abs(D.r(x)) > 1e-8:
        raise PreconditionError("boundary_extend needs a boundary point (|r| <= 1e-8)")
    return apply(g, x, check=False)


def pushforward(g, z, v) -> np.ndarray:
    """Differential ``dg_z(v)``."""
    z = as_point(z)
    v = as_point(v, z.size)
    if isinstance(g, BallMoebius):
        m = g.matrix
        den = m[0, 0] + m[0, 1:] @ z
        w = (m[1:, 0] + m[1:, 1:] @ z) / den
        return (m[1:, 1:] @ v - w * (m[0, 1:] @ v)) / den
    if isinstance(g, WebsterAut):
        k = g.k
        out = np.empty_like(v)
        out[:k] = pushforward(g.phi, z[:k], v[:k])
        if z.size > k:
            m = g.phi.matrix
            S, q = _s_phi_stable(m, z[None, :k])
            S, q = S[0], q[0]
            dq = (m[0, 1:] @ v[:k]) / m[0, 0]
            p = 1.0 / (2.0 * g.tail_exponents)
            rot = np.exp(1j * np.asarray(g.phases))
            root = S ** p
            droot = root * p * (-2.0 * dq / q)
            out[k:] = rot * (v[k:] * root + z[k:] * droot)
        return out
    if isinstance(g, WHPFlow):
        if g.kind == "translation":
            return v.copy()
        scale = np.concatenate([[np.exp(g.t)], np.exp(g.t * g.spec.dilation_exponents())])
        return v * scale
    raise PreconditionError(f"unsupported automorphism type {type(g).__name__}")


# ---------------------------------------------------------------------------
# standard elements


def moebius_identity(k: int) -> BallMoebius:
    return BallMoebius(np.eye(k + 1, dtype=complex))


def boost(t: float, k: int = 1) -> BallMoebius:
    """``a_t``: ``[[cosh(t/2), sinh(t/2)], [sinh(t/2), cosh(t/2)]]`` on the first coordinate.

    Moves 0 to ``tanh(t/2) e_1``; translation length ``t/2``.
    """
    g = np.eye(k + 1, dtype=complex)
    c, s = np.cosh(t / 2), np.sinh(t / 2)
    g[0, 0] = g[1, 1] = c
    g[0, 1] = g[1, 0] = s
    return BallMoebius(g)


def h_a(a: float, k: int = 1) -> BallMoebius:
    """``z_1 -> (z_1 + a) / (1 + a z_1)`` (extended to B_k); equals ``boost(2 artanh a)``."""
    if not -1 < a < 1:
        raise PreconditionError("h_a needs |a| < 1")
    return boost(2 * np.arctanh(a), k)


def rotation(angles, k: int | None = None) -> BallMoebius:
    """Diagonal unitary ``z_j -> e^{i angle_j} z_j``."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if k is not None and angles.size == 1 and k > 1:
        angles = np.concatenate([angles, np.zeros(k - 1)])
    g = np.diag(np.concatenate([[1.0], np.exp(1j * angles)]))
    return BallMoebius(g)


def unitary(U) -> BallMoebius:
    """``z -> U z`` for a k x k unitary ``U``."""
    U = np.asarray(U, dtype=complex)
    g = np.eye(U.shape[0] + 1, dtype=complex)
    g[1:, 1:] = U
    return BallMoebius(g)


def cayley_translation(t: float, k: int = 1) -> BallMoebius:
    """The Siegel translation ``w -> w + t`` transported to B_k by the Cayley map.

    Parabolic with the single boundary fixed point ``e_1``.
    """
    g = np.eye(k + 1, dtype=complex)
    g[0, 0] = 1 - 0.5j * t
    g[0, 1] = 0.5j * t
    g[1, 0] = -0.5j * t
    g[1, 1] = 1 + 0.5j * t
    return BallMoebius(g)


def random_unitary(n, rng):
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_moebius(k: int, rng, max_t: float = 3.0) -> BallMoebius:
    """Seeded element ``U1 a_t U2`` with ``t`` uniform in ``[0, max_t]`` and Haar unitaries."""
    t = rng.uniform(0, max_t)
    U1 = unitary(random_unitary(k, rng)).matrix
    U2 = unitary(random_unitary(k, rng)).matrix
    return BallMoebius(U1 @ boost(t, k).matrix @ U2)


def random_webster(E: Ellipse, rng, max_t: float = 3.0) -> WebsterAut:
    phases = rng.uniform(0, 2 * np.pi, size=E.dim - E.k)
    return WebsterAut(E, random_moebius(E.k, rng, max_t), tuple(phases))


def webster_from_moebius(E: Ellipse, phi: BallMoebius, phases=None) -> WebsterAut:
    return WebsterAut(E, phi, tuple(phases) if phases is not None else ())


def lift_to_ball(phi: BallMoebius, k: int) -> BallMoebius:
    """Extend a Moebius map of B_j (j <= k) to B_k acting trivially on the extra coordinates."""
    if phi.k > k:
        raise PreconditionError("cannot lift to a smaller ball")
    g = np.eye(k + 1, dtype=complex)
    g[: phi.k + 1, : phi.k + 1] = phi.matrix
    return BallMoebius(g)


# ---------------------------------------------------------------------------
# JSON


def matrix_to_json(g):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(g)]


def matrix_from_json(obj):
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise PreconditionError(f"malformed matrix JSON: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise PreconditionError("matrix JSON must be rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def automorphism_to_json(g) -> dict:
    if isinstance(g, BallMoebius):
        return {"kind": "moebius", "matrix": matrix_to_json(g.matrix)}
    if isinstance(g, WebsterAut):
        return {"kind": "webster", "ellipse": g.ellipse.to_json(),
                "moebius": automorphism_to_json(g.phi), "phases": list(g.phases)}
    if isinstance(g, WHPFlow):
        return {"kind": f"whp_{g.kind}", "t": g.t, "domain": g.spec.to_json()}
    raise PreconditionError(f"unsupported automorphism type {type(g).__name__}")


def automorphism_from_json(obj, domain: Domain | None = None):
    """Parse automorphism JSON. WHP flows take their domain from ``obj['domain']`` or ``domain``."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise PreconditionError("automorphism JSON must be an object with a 'kind' field")
    kind = obj["kind"]
    allowed = {
        "moebius": {"kind", "matrix"},
        "webster": {"kind", "ellipse", "moebius", "phases"},
        "whp_translation": {"kind", "t", "domain"},
        "whp_dilation": {"kind", "t", "domain"},
    }
    if kind not in allowed:
        raise PreconditionError(f"unknown automorphism kind {kind!r}")
    extra = set(obj) - allowed[kind]
    if extra:
        raise PreconditionError(f"unknown automorphism fields {sorted(extra)}")
    try:
        if kind == "moebius":
            return BallMoebius(matrix_from_json(obj["matrix"]))
        if kind == "webster":
            E = domain_from_json(obj["ellipse"])
            if not isinstance(E, Ellipse):
                raise PreconditionError("webster 'ellipse' must describe an ellipse")
            phi = automorphism_from_json(obj["moebius"])
            return WebsterAut(E, phi, tuple(obj.get("phases", ())))
        spec = domain_from_json(obj["domain"]) if "domain" in obj else domain
        if not isinstance(spec, WHP):
            raise PreconditionError("WHP flows need a WHP domain")
        return WHPFlow(spec, kind[4:], float(obj["t"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise PreconditionError(f"malformed automorphism JSON: {exc}") from exc


__all__ = [
    "BallMoebius", "WebsterAut", "WHPFlow", "moebius_apply", "s_phi", "webster_apply", "webster_walk",
    "whp_flow_apply", "apply", "compose", "inverse", "power", "boundary_extend", "pushforward",
    "moebius_identity", "boost", "h_a", "rotation", "unitary", "cayley_translation", "random_moebius",
    "random_webster", "random_unitary", "lift_to_ball", "webster_from_moebius", "reproject", "j_residual",
    "automorphism_to_json", "automorphism_from_json", "matrix_to_json", "matrix_from_json", "J_form",
    "moebius_inverse_origin", "identity_like", "domain_of", "moebius_to_origin",
]


def moebius_to_origin(a) -> BallMoebius:
    """The Moebius involution-type map sending ``a`` (``|a| < 1``) to 0, as a U(1,k) matrix.

    ``g = [[1, -a*], [-a, s I + (1 - s) a a* / |a|^2]] / s`` with ``s = sqrt(1 - |a|^2)``.
    """
    a = as_point(a)
    k = a.size
    n2 = np.vdot(a, a).real
    if n2 >= 1:
        raise PreconditionError("moebius_to_origin needs |a| < 1")
    s = np.sqrt(1.0 - n2)
    g = np.empty((k + 1, k + 1), dtype=complex)
    g[0, 0] = 1.0
    g[0, 1:] = -a.conj()
    g[1:, 0] = -a
    if n2 > 0:
        g[1:, 1:] = s * np.eye(k) + (1 - s) * np.outer(a, a.conj()) / n2
    else:
        g[1:, 1:] = np.eye(k)
    return BallMoebius(g / s)
