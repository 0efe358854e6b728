"""SU(1,k) toolkit: eigenvalue classification, Jordan and KAK decompositions,
adjoint norms, the equivariant boundary map of an ellipse and boundary 2-jets.

Elements are stored in SU(1,k) with ``J = diag(1, -1, ..., -1)``; the
projective group PU(1,k) acting on B_k is the quotient by the ``(k+1)``-th
roots of unity, and equality there is tested by :func:`pu_equal`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import numpy as np

from .automorphisms import BallMoebius, J_form, WebsterAut, boost, moebius_apply, random_moebius
from .domains import Ellipse, as_point
from .errors import NumericError, PreconditionError

SU_TOL = 1e-10
LABELS = ("L-elliptic", "L-hyperbolic", "L-unipotent", "mixed")

# eigenvalues closer than this are one cluster outright
CLUSTER_TOL = 1e-10
# near-coincident eigenvalues with nearly parallel eigenvectors come from a split Jordan block
DEFECT_RADIUS = 1e-4
DEFECT_COS = 1.0 - 1e-6


def _relative_j_residual(g):
    J = J_form(g.shape[0])
    return float(np.abs(g.conj().T @ J @ g - J).max() / max(1.0, np.abs(g).max() ** 2))


@dataclass(frozen=True, eq=False)
class SU1kElement:
    """Element of SU(1,k): ``g* J g = J`` and ``det g = 1``.

    The J-residual is measured relative to ``max(1, |g|^2)`` so that long
    products stay admissible; both checks use ``1e-10``.
    """

    matrix: np.ndarray

    def __post_init__(self):
        g = np.array(self.matrix, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 2:
            raise PreconditionError("SU(1,k) matrix must be square of size k+1 >= 2")
        if not np.all(np.isfinite(g)):
            raise PreconditionError("SU(1,k) matrix has non-finite entries")
        res = _relative_j_residual(g)
        if res > SU_TOL:
            raise PreconditionError(f"matrix is not J-unitary (residual {res:.3g})")
        det = np.linalg.det(g)
        if abs(det - 1) > SU_TOL:
            raise PreconditionError(f"det g = {det:.6g} is not 1")
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)

    @property
    def k(self):
        return self.matrix.shape[0] - 1

    @classmethod
    def from_matrix(cls, g):
        """Normalize a J-unitary matrix to determinant one (principal root) and wrap it."""
        g = np.asarray(g, dtype=complex)
        det = np.linalg.det(g)
        if det == 0 or not np.isfinite(det):
            raise PreconditionError("singular matrix")
        return cls(g / det ** (1.0 / g.shape[0]))

    @classmethod
    def from_moebius(cls, phi: BallMoebius):
        return cls.from_matrix(phi.matrix)

    def to_moebius(self) -> BallMoebius:
        return BallMoebius(self.matrix)

    def inverse(self):
        J = J_form(self.k + 1)
        return SU1kElement(J @ self.matrix.conj().T @ J)

    def __matmul__(self, other):
        return SU1kElement(self.matrix @ other.matrix)

    def __repr__(self):
        return f"SU1kElement(k={self.k}, matrix={np.array2string(self.matrix, precision=4)})"


def _as_element(g) -> SU1kElement:
    if isinstance(g, SU1kElement):
        return g
    if isinstance(g, BallMoebius):
        return SU1kElement.from_moebius(g)
    return SU1kElement(g)


def a_t(t: float, k: int = 1) -> SU1kElement:
    """The Cartan element ``[[cosh(t/2), sinh(t/2)], [sinh(t/2), cosh(t/2)]]`` (extended by the identity)."""
    return SU1kElement(boost(t, k).matrix)


def random_element(k: int, rng, max_t: float = 3.0) -> SU1kElement:
    """Seeded ``U1 a_t U2`` (Haar unitaries, ``t`` uniform on ``[0, max_t]``) normalized to det 1."""
    return SU1kElement.from_moebius(random_moebius(k, rng, max_t))


def central_phases(k: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(k + 1) / (k + 1))


def pu_equal(g, h, tol=1e-9) -> bool:
    """Equality in PU(1,k): ``g = omega h`` for a ``(k+1)``-th root of unity ``omega``."""
    g = _as_element(g).matrix
    h = _as_element(h).matrix
    scale = max(1.0, np.abs(g).max())
    return any(np.abs(g - w * h).max() <= tol * scale for w in central_phases(g.shape[0] - 1))


# ---------------------------------------------------------------------------
# eigenvalue clusters and the Jordan decomposition


def _clusters(g):
    """Group the eigenvalues of ``g``; returns ``[(mean, multiplicity)]`` and a report.

    Two eigenvalues share a cluster when they agree to ``CLUSTER_TOL``, or
    when they are within ``DEFECT_RADIUS`` and their eigenvectors are nearly
    parallel, which is how round-off splits a nontrivial Jordan block. The
    cluster value is the mean, which is as accurate as the trace of the block,
    and clusters whose means agree to ``CLUSTER_TOL`` are merged in turn.
    """
    lam, V = np.linalg.eig(g)
    n = len(lam)
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    scale = max(1.0, float(np.abs(lam).max()))
    worst_ambiguous = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(lam[i] - lam[j])
            cos = abs(np.vdot(V[:, i], V[:, j]))
            if gap <= CLUSTER_TOL * scale or (gap <= DEFECT_RADIUS * scale and cos >= DEFECT_COS):
                parent[find(i)] = find(j)
            elif gap <= DEFECT_RADIUS * scale:
                worst_ambiguous = max(worst_ambiguous, cos)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = [[complex(np.mean(lam[idx])), len(idx)] for idx in groups.values()]
    # a split block's mean is accurate to round-off: merge it with exact coincidences it sits on
    merged = True
    while merged:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                if abs(clusters[i][0] - clusters[j][0]) <= CLUSTER_TOL * scale:
                    (mi, ni), (mj, nj) = clusters[i], clusters[j]
                    clusters[i] = [(ni * mi + nj * mj) / (ni + nj), ni + nj]
                    del clusters[j]
                    merged = True
                    break
            if merged:
                break
    clusters = [(c[0], c[1]) for c in clusters]
    clusters.sort(key=lambda c: (-abs(c[0]), np.angle(c[0])))
    report = {"eigenvalues": lam, "eigenvector_condition": float(np.linalg.cond(V)),
              "ambiguous_cosine": worst_ambiguous}
    return clusters, report


def _hermite_matrix_function(g, clusters, values):
    """``p(g)`` for the polynomial with ``p(mu_i) = values[i]`` and vanishing derivatives
    up to order ``m_i - 1`` at each cluster ``(mu_i, m_i)``.

    Being a polynomial in ``g``, the result commutes with ``g`` up to round-off.
    """
    n = g.shape[0]
    A = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    row = 0
    for (mu, m), val in zip(clusters, values):
        for d in range(m):
            for j in range(d, n):
                A[row, j] = factorial(j) / factorial(j - d) * mu ** (j - d)
            rhs[row] = val if d == 0 else 0.0
            row += 1
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericError(f"ill-conditioned eigenvalue interpolation (condition {cond:.3g})")
    c = np.linalg.solve(A, rhs)
    out = c[-1] * np.eye(n, dtype=complex)
    for coef in c[-2::-1]:
        out = out @ g + coef * np.eye(n)
    return out, float(cond)


class JordanDecomposition:
    """``g = g_e g_h g_u`` with commuting elliptic, hyperbolic and unipotent factors.

    Iterates as ``(g_e, g_h, g_u)``; ``residuals`` holds the reconstruction,
    commutator and J-compatibility errors.
    """

    def __init__(self, g_e, g_h, g_u, clusters, residuals):
        self.g_e, self.g_h, self.g_u = g_e, g_h, g_u
        self.clusters = clusters
        self.residuals = residuals

    def __iter__(self):
        return iter((self.g_e, self.g_h, self.g_u))

    def __getitem__(self, i):
        return (self.g_e, self.g_h, self.g_u)[i]

    def __len__(self):
        return 3


def _comm(a, b):
    return float(np.abs(a @ b - b @ a).max())


def jordan_decomposition(g, order=None) -> JordanDecomposition:
    """Multiplicative Jordan decomposition of an element of SU(1,k).

    With eigenvalue clusters ``(mu_i, m_i)``, the factors are the matrix
    polynomials ``g_e = p_e(g)`` and ``g_h = p_h(g)`` interpolating
    ``mu_i / |mu_i|`` and ``|mu_i|`` to order ``m_i`` (so they are the
    elliptic and hyperbolic parts of the semisimple part), and
    ``g_u = (g_e g_h)^{-1} g``. ``order`` permutes the clusters, which leaves
    the result unchanged up to round-off.
    """
    el = _as_element(g)
    G = el.matrix
    n = G.shape[0]
    clusters, report = _clusters(G)
    if order is not None:
        clusters = [clusters[i] for i in order]
    mus = np.array([c[0] for c in clusters])
    if np.any(np.abs(mus) == 0):
        raise NumericError("zero eigenvalue in a J-unitary matrix")
    g_e, cond_e = _hermite_matrix_function(G, clusters, mus / np.abs(mus))
    g_h, cond_h = _hermite_matrix_function(G, clusters, np.abs(mus).astype(complex))
    g_u = np.linalg.solve(g_e @ g_h, G)
    J = J_form(n)
    scale = max(1.0, np.abs(G).max() ** 2)
    res = {
        "reconstruction": float(np.abs(g_e @ g_h @ g_u - G).max()),
        "commutators": max(_comm(g_e, g_h), _comm(g_e, g_u), _comm(g_h, g_u)),
        "j_compatibility": max(float(np.abs(f.conj().T @ J @ f - J).max()) / scale for f in (g_e, g_h, g_u)),
        "interpolation_condition": max(cond_e, cond_h),
        **{key: report[key] for key in ("eigenvector_condition", "ambiguous_cosine")},
    }
    if res["commutators"] > 1e-6 * scale or res["j_compatibility"] > 1e-6:
        raise NumericError(f"Jordan factors failed their checks: {res}")
    return JordanDecomposition(g_e, g_h, g_u, clusters, res)


# ---------------------------------------------------------------------------
# classification


@dataclass
class LieClassification:
    label: str
    eigenvalues: np.ndarray
    multiplicities: tuple
    nilpotent_norm: float
    central_phase: complex | None
    details: dict = field(default_factory=dict, repr=False)

    @property
    def eigen_data(self):
        return list(zip(self.eigenvalues.tolist(), self.multiplicities))


def _central_phase(M, tol):
    k = M.shape[0] - 1
    for w in central_phases(k):
        if np.abs(M - w * np.eye(k + 1)).max() <= tol:
            return complex(w)
    return None


def classify_lie(g, tol=1e-8) -> LieClassification:
    """Eigenvalue classification of an element of SU(1,k).

    * L-elliptic: diagonalizable with all eigenvalues on the unit circle
      (this includes the identity and the center);
    * L-hyperbolic: diagonalizable with all eigenvalues positive after
      multiplying by a central root of unity;
    * L-unipotent: all eigenvalues equal to one (again up to the center)
      with a nontrivial nilpotent part;
    * mixed otherwise.
    """
    el = _as_element(g)
    jd = jordan_decomposition(el)
    n = el.k + 1
    eye = np.eye(n)
    scale = max(1.0, np.abs(el.matrix).max())
    e_dev = np.abs(jd.g_e - eye).max()
    h_dev = float(np.abs(jd.g_h - eye).max())
    u_dev = float(np.abs(jd.g_u - eye).max())
    h_trivial = h_dev <= tol * scale
    u_trivial = u_dev <= tol * scale ** 2
    omega = _central_phase(jd.g_e, tol)
    if h_trivial and u_trivial:
        label = "L-elliptic"
    elif omega is not None and u_trivial:
        label = "L-hyperbolic"
    elif omega is not None and h_trivial:
        label = "L-unipotent"
    else:
        label = "mixed"
    mus = np.array([c[0] for c in jd.clusters])
    mults = tuple(int(c[1]) for c in jd.clusters)
    details = {"elliptic_deviation": float(e_dev), "hyperbolic_deviation": h_dev, "unipotent_deviation": u_dev,
               "residuals": jd.residuals}
    return LieClassification(label, mus, mults, u_dev, omega, details)


# ---------------------------------------------------------------------------
# KAK


def _complete_unitary(x):
    """Unitary matrix with first column ``x`` (unit vector)."""
    Q, R = np.linalg.qr(np.column_stack([x, np.eye(x.size)]))
    Q[:, 0] *= R[0, 0]  # |R_00| = 1, so this restores x exactly up to round-off
    return Q


class KAKDecomposition:
    """``g = k1 a_t k2``; iterates as ``(k1, a, k2)``."""

    def __init__(self, k1, a, k2, t, residuals):
        self.k1, self.a, self.k2, self.t = k1, a, k2, t
        self.residuals = residuals

    def __iter__(self):
        return iter((self.k1, self.a, self.k2))

    def __getitem__(self, i):
        return (self.k1, self.a, self.k2)[i]

    def __len__(self):
        return 3


def _off_block(m):
    return max(float(np.abs(m[0, 1:]).max()), float(np.abs(m[1:, 0]).max()))


def kak_decomposition(g, compact_tol=1e-13) -> KAKDecomposition:
    """Cartan decomposition ``g = k1 a_t k2`` with ``k1, k2`` in ``S(U(1) x U(k))`` and ``t >= 0``.

    ``|g_00| = cosh(t/2)`` and ``|g e_0 - g_00 e_0| = sinh(t/2)``, so
    ``t = 2 log(|g_00| + |g_{1:,0}|)``, which is well conditioned for every
    ``t``. The largest ordinary singular value ``e^{t/2}`` is reported as a
    cross-check. ``k1`` is built from the phase of ``g_00`` and the direction
    of ``g_{1:,0}``; ``k2 = a_t^{-1} k1^{-1} g``.
    """
    el = _as_element(g)
    G = el.matrix
    n = G.shape[0]
    k = n - 1
    c = abs(G[0, 0])
    col = G[1:, 0]
    s = float(np.linalg.norm(col))
    sigma = float(np.linalg.svd(G, compute_uv=False)[0])
    if s <= compact_tol * max(1.0, c):
        t = 0.0
        k1 = G.copy()
        k2 = np.eye(n, dtype=complex)
    else:
        t = 2.0 * float(np.log(c + s))
        if k == 1:
            v1 = np.sqrt((G[0, 0] / c) * (col[0] / s))
            u1 = G[0, 0] / c / v1
            x = col / s / v1
            U = x.reshape(1, 1)
        else:
            u1 = G[0, 0] / c
            U = _complete_unitary(col / s)
        k1 = np.zeros((n, n), dtype=complex)
        k1[0, 0] = u1
        k1[1:, 1:] = U
        if k > 1:
            k1[1:, -1] *= np.conj(np.linalg.det(k1))
        at = boost(t, k).matrix
        J = J_form(n)
        k2 = J @ at.conj().T @ J @ k1.conj().T @ G
    a = boost(t, k).matrix
    recon = k1 @ a @ k2
    res = {
        "reconstruction": float(np.abs(recon - G).max()),
        "k1_block": _off_block(k1),
        "k2_block": _off_block(k2),
        "k1_unitary": float(np.abs(k1.conj().T @ k1 - np.eye(n)).max()),
        "k2_unitary": float(np.abs(k2.conj().T @ k2 - np.eye(n)).max()),
        "t_from_singular_value": 2.0 * float(np.log(sigma)),
    }
    if max(res["k1_block"], res["k2_block"], res["k1_unitary"], res["k2_unitary"]) > 1e-6:
        raise NumericError(f"KAK factors failed their checks: {res}")
    return KAKDecomposition(k1, a, k2, t, res)


# ---------------------------------------------------------------------------
# adjoint norm


@lru_cache(maxsize=None)
def lie_algebra_basis(k: int) -> np.ndarray:
    """Orthonormal basis of su(1,k) for the Frobenius form ``Re tr(X* Y)``.

    su(1,k) is ``{J S : S skew-Hermitian, tr(J S) = 0}``, of real dimension
    ``(k+1)^2 - 1``. The Frobenius form is minus the Killing form twisted by
    the Cartan involution ``X -> -X*`` (up to scale), so it is invariant under
    the maximal compact subgroup.
    """
    n = k + 1
    J = J_form(n)
    gens = []
    for j in range(n):
        S = np.zeros((n, n), dtype=complex)
        S[j, j] = 1j
        gens.append(S)
        for l in range(j + 1, n):
            S = np.zeros((n, n), dtype=complex)
            S[j, l], S[l, j] = 1.0, -1.0
            gens.append(S)
            S = np.zeros((n, n), dtype=complex)
            S[j, l] = S[l, j] = 1j
            gens.append(S)
    X = np.array([J @ S for S in gens])
    vecs = np.concatenate([X.reshape(len(X), -1).real, X.reshape(len(X), -1).imag], axis=1)
    # trace-zero constraint: Im tr(X) = 0 (the real part vanishes identically)
    tr = np.array([np.trace(M).imag for M in X])
    # coefficients c with sum c_i tr_i = 0, then orthonormalize the resulting matrices
    _, _, Vt = np.linalg.svd(tr[None, :])
    coeffs = Vt[1:]
    span = coeffs @ vecs
    Q, _ = np.linalg.qr(span.T)
    basis = Q.T[: n * n - 1]
    half = n * n
    out = (basis[:, :half] + 1j * basis[:, half:]).reshape(-1, n, n)
    out.setflags(write=False)
    return out


def ad_matrix(g) -> np.ndarray:
    """Matrix of ``Ad(g): X -> g X g^{-1}`` on the orthonormal basis of su(1,k)."""
    el = _as_element(g)
    G = el.matrix
    n = G.shape[0]
    J = J_form(n)
    Ginv = J @ G.conj().T @ J
    B = lie_algebra_basis(n - 1)
    images = np.einsum("ij,bjk,kl->bil", G, B, Ginv)
    return np.einsum("aij,bij->ab", B.conj(), images).real


def ad_norm(g) -> float:
    """Operator norm of ``Ad(g)`` on su(1,k) with the Frobenius inner product."""
    return float(np.linalg.norm(ad_matrix(g), 2))


def distance_norm_fit(elements, slack=1e-9):
    """Least-squares fit ``K(g 0, 0) ~ alpha log ad_norm(g) + beta`` on a ball.

    ``K`` is the closed-form ball distance. Returns a dict with ``alpha``,
    ``beta``, the largest residual ``K - (alpha x + beta)`` and the number of
    elements violating the bound by more than ``slack``.
    """
    from .kobayashi.lower import ball_distance

    xs, ks = [], []
    for g in elements:
        el = _as_element(g)
        p = moebius_apply(el.to_moebius(), np.zeros(el.k, dtype=complex))
        ks.append(ball_distance(np.zeros(el.k), p))
        xs.append(np.log(ad_norm(el)))
    xs, ks = np.array(xs), np.array(ks)
    A = np.column_stack([xs, np.ones_like(xs)])
    (alpha, beta), *_ = np.linalg.lstsq(A, ks, rcond=None)
    resid = ks - (alpha * xs + beta)
    return {"alpha": float(alpha), "beta": float(beta), "max_residual": float(resid.max()),
            "violations": int(np.sum(resid > slack)), "log_norms": xs, "distances": ks}


# ---------------------------------------------------------------------------
# equivariant boundary map


def _check_limit_point(E: Ellipse, x0, tol=1e-10):
    x0 = as_point(x0, E.dim)
    k = E.k
    if np.abs(x0[k:]).max(initial=0.0) > tol or abs(np.linalg.norm(x0[:k]) - 1) > tol:
        raise PreconditionError("x0 is not on the limit set (|z'| = 1, tail zero)")
    return x0


def boundary_map(E: Ellipse, x):
    """``F(zeta, 0, ..., 0) = zeta``: the limit set of the ellipse onto the sphere of B_k."""
    return _check_limit_point(E, x)[: E.k].copy()


def equivariant_map(E: Ellipse, x0, g: WebsterAut) -> np.ndarray:
    """``F(g x0)`` for a limit point ``x0`` and a Webster automorphism ``g``."""
    if not isinstance(g, WebsterAut) or g.ellipse != E:
        raise PreconditionError("g must be a Webster automorphism of E")
    x0 = _check_limit_point(E, x0)
    y = g(x0)
    return boundary_map(E, y)


def equivariance_residual(E: Ellipse, x0, g: WebsterAut) -> float:
    """``|F(g x0) - phi_g(F(x0))|``."""
    Fx = equivariant_map(E, x0, g)
    rhs = moebius_apply(g.phi, boundary_map(E, x0), check=False)
    return float(np.linalg.norm(Fx - rhs))


# ---------------------------------------------------------------------------
# boundary 2-jets


class Jet2:
    """Value, gradient and Hessian of a (complex-valued) function of real variables."""

    __slots__ = ("v", "g", "H")

    def __init__(self, v, g, H):
        self.v, self.g, self.H = v, g, H

    @classmethod
    def const(cls, c, n):
        return cls(complex(c), np.zeros(n, dtype=complex), np.zeros((n, n), dtype=complex))

    def _lift(self, o):
        return o if isinstance(o, Jet2) else Jet2.const(o, self.g.size)

    def __add__(self, o):
        o = self._lift(o)
        return Jet2(self.v + o.v, self.g + o.g, self.H + o.H)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._lift(o)
        return Jet2(self.v - o.v, self.g - o.g, self.H - o.H)

    def __rsub__(self, o):
        return self._lift(o) - self

    def __neg__(self):
        return Jet2(-self.v, -self.g, -self.H)

    def __mul__(self, o):
        if not isinstance(o, Jet2):
            return Jet2(self.v * o, self.g * o, self.H * o)
        og = np.outer(self.g, o.g)
        return Jet2(self.v * o.v, self.v * o.g + o.v * self.g, self.v * o.H + o.v * self.H + og + og.T)

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.v
        if v == 0:
            raise NumericError("jet division by zero")
        return Jet2(1 / v, -self.g / v ** 2, -self.H / v ** 2 + 2 * np.outer(self.g, self.g) / v ** 3)

    def __truediv__(self, o):
        if not isinstance(o, Jet2):
            return self * (1.0 / o)
        return self * o.reciprocal()

    def __rtruediv__(self, o):
        return self._lift(o) * self.reciprocal()

    def conj(self):
        return Jet2(np.conj(self.v), self.g.conj(), self.H.conj())

    @property
    def real(self):
        return Jet2(complex(self.v.real), self.g.real.astype(complex), self.H.real.astype(complex))


def _tangent_frame(P):
    """Orthonormal real basis (as complex k-vectors) of the real hyperplane ``P^perp`` in C^k = R^2k."""
    k = P.size
    p = np.concatenate([P.real, P.imag])
    M = np.column_stack([p, np.eye(2 * k)])
    Q, _ = np.linalg.qr(M)
    F = Q[:, 1: 2 * k].T
    return F[:, :k] + 1j * F[:, k:]


def _real_inner(a_jets, b):
    """``Re sum conj(b_j) a_j`` for jets ``a_j`` and constants ``b_j``."""
    acc = 0
    for aj, bj in zip(a_jets, b):
        acc = acc + aj * np.conj(bj)
    return acc.real


def _pole_candidates(k):
    eye = np.eye(k, dtype=complex)
    return [s * eye[j] for j in range(k) for s in (1, -1, 1j, -1j)]


@dataclass
class BoundaryJet2:
    """Second-order jet of a boundary map in stereographic charts.

    ``value``, ``first`` and ``second`` are the chart value (``2k-1``), the
    Jacobian and the Hessians (``second[i]`` is the Hessian of output ``i``).
    The source chart projects from ``-x``; the target chart from
    ``target_pole``.
    """

    x: np.ndarray
    image: np.ndarray
    value: np.ndarray
    first: np.ndarray
    second: np.ndarray
    target_pole: np.ndarray
    rotated: bool = False

    def flat(self, order=2):
        parts = [self.value.ravel(), self.first.ravel()]
        if order >= 2:
            parts.append(self.second.ravel())
        return np.concatenate(parts)


def _boundary_action_jets(G, x, Q):
    k = x.size
    n = 2 * k - 1
    P = -x
    frame = _tangent_frame(P)
    # v = sum u_i frame_i, a jet in u at u = 0
    v = []
    for j in range(k):
        g = frame[:, j].astype(complex)
        v.append(Jet2(0j, g, np.zeros((n, n), dtype=complex)))
    nv2 = Jet2.const(0.0, n)
    for vj in v:
        nv2 = nv2 + vj * vj.conj()
    nv2 = nv2.real
    den = nv2 + 1.0
    y = [(2.0 * vj + (nv2 - 1.0) * P[j]) / den for j, vj in enumerate(v)]
    # fractional-linear action (1, y) -> G (1, y)
    lin = [Jet2.const(G[r, 0], n) + sum((G[r, l + 1] * y[l] for l in range(k)), Jet2.const(0.0, n))
           for r in range(k + 1)]
    w = [lin[r + 1] / lin[0] for r in range(k)]
    image = np.array([wj.v for wj in w])
    # target stereographic chart
    ftarget = _tangent_frame(Q)
    denom = 1.0 - _real_inner(w, Q)
    out = [_real_inner(w, ftarget[i]) / denom for i in range(n)]
    value = np.array([o.v.real for o in out])
    first = np.array([o.g.real for o in out])
    second = np.array([o.H.real for o in out])
    return image, value, first, second


def jet2_boundary(phi: BallMoebius, x, target_pole=None) -> BoundaryJet2:
    """2-jet of the boundary action of ``phi`` at ``x`` in ``|x| = 1``.

    Derivatives are exact (forward-mode differentiation of the rational
    formulas). The source chart is stereographic from ``-x``; the target
    chart uses ``target_pole`` (default ``-x``, so the identity has the
    identity jet). If the image lies too close to the target pole the pole is
    rotated to the coordinate direction farthest from the image.
    """
    if not isinstance(phi, BallMoebius):
        phi = _as_element(phi).to_moebius()
    x = as_point(x, phi.k)
    if abs(np.linalg.norm(x) - 1) > 1e-10:
        raise PreconditionError("x must lie on the unit sphere (|x| = 1 within 1e-10)")
    x = x / np.linalg.norm(x)
    Q = -x if target_pole is None else as_point(target_pole, phi.k)
    Q = Q / np.linalg.norm(Q)
    image = moebius_apply(phi, x, check=False)
    rotated = False
    if np.linalg.norm(image - Q) < 1e-3:
        cands = _pole_candidates(phi.k)
        Q = max(cands, key=lambda c: np.linalg.norm(image - c))
        rotated = True
    image, value, first, second = _boundary_action_jets(phi.matrix, x, Q)
    return BoundaryJet2(x, image, value, first, second, Q, rotated)


def common_pole(phis, x):
    """A coordinate pole far from every image ``phi(x)``, for comparing jets in one chart."""
    x = as_point(x)
    images = [moebius_apply(p if isinstance(p, BallMoebius) else _as_element(p).to_moebius(), x, check=False)
              for p in phis]
    cands = _pole_candidates(x.size)
    return max(cands, key=lambda c: min(np.linalg.norm(im - c) for im in images))


def jet_difference(phi1, phi2, x, order=2) -> float:
    """Largest componentwise difference of the ``order``-jets of two maps at ``x`` in a common chart."""
    Q = common_pole([phi1, phi2], x)
    j1 = jet2_boundary(phi1, x, Q)
    j2 = jet2_boundary(phi2, x, Q)
    return float(np.abs(j1.flat(order) - j2.flat(order)).max())
