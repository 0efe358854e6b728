"""Pure numpy implementations of the hot kernels.

These mirror ``_ccore.pyx`` argument for argument and are used whenever the
compiled extension is unavailable (or ``KOBALAB_PURE_PYTHON=1`` is set).

Kind codes: 0 = sum of powers ``sum |z_i / R|^(2 m_i) - 1`` (ball, ellipse),
1 = polydisc ``max |z_i / R|^2 - 1``.
"""
import numpy as np

KIND_POWER_SUM = 0
KIND_POLYDISC = 1


def defining_values(kind, exps, radius, Z):
    """Defining function values and Wirtinger gradients for a batch of points.

    Parameters
    ----------
    kind : int
        Kind code.
    exps : ndarray of float, shape (d,)
        Exponents ``m_i`` (ignored for the polydisc).
    radius : float
        Scale ``R``.
    Z : ndarray of complex, shape (M, d)

    Returns
    -------
    values : ndarray, shape (M,)
    grads : ndarray of complex, shape (M, d)
        ``dr/dz_i``.
    """
    Z = np.asarray(Z, dtype=complex)
    W = Z / radius
    a2 = W.real ** 2 + W.imag ** 2
    grads = np.zeros_like(W)
    if kind == KIND_POWER_SUM:
        m = np.asarray(exps, dtype=float)
        vals = (a2 ** m).sum(axis=1) - 1.0
        grads = m * a2 ** (m - 1.0) * W.conj() / radius
    else:
        j = np.argmax(a2, axis=1)
        rows = np.arange(W.shape[0])
        vals = a2[rows, j] - 1.0
        grads[rows, j] = W[rows, j].conj() / radius
    return vals, grads


def ray_scales(kind, exps, radius, Z):
    """Scale ``t`` with ``r(t z) = 0`` for every row ``z`` of ``Z`` (``inf`` for ``z = 0``)."""
    Z = np.asarray(Z, dtype=complex)
    a2 = (Z.real ** 2 + Z.imag ** 2) / radius ** 2
    out = np.full(Z.shape[0], np.inf)
    if kind == KIND_POLYDISC:
        mx = a2.max(axis=1)
        nz = mx > 0
        out[nz] = 1.0 / np.sqrt(mx[nz])
        return out
    m = np.asarray(exps, dtype=float)
    nz = a2.max(axis=1) > 0
    if not nz.any():
        return out
    A = a2[nz] ** m  # phi(t) = sum A_i t^(2 m_i)
    with np.errstate(divide="ignore"):
        single = np.where(A > 0, A ** (-1.0 / (2 * m)), np.inf)
    t = single.min(axis=1)  # phi(t) >= 1 here; Newton descends monotonically
    for _ in range(200):
        tp = t[:, None] ** (2 * m)
        phi = (A * tp).sum(axis=1) - 1.0
        dphi = (A * 2 * m * tp).sum(axis=1) / t
        step = phi / dphi
        t_new = t - step
        done = np.abs(step) <= 4e-16 * t
        t = np.where(t_new > 0, t_new, 0.5 * t)
        if done.all():
            break
    out[nz] = t
    return out


def webster_walk(mats, tail_phases, tail_exps, word, z0):
    """Apply a word of Webster-type maps to ``z0`` and return the whole trajectory.

    Generator ``g`` acts on the leading ``k`` coordinates by the fractional
    linear action of ``mats[g]`` (shape (k+1, k+1), J-unitary) and multiplies
    tail coordinate ``j`` by ``exp(i theta_j) * S(z^k)^(1/(2 m_j))`` with
    ``S = 1 / (|g00|^2 * ((g00 + g0. z) / g00)^2)`` on the principal branch.

    Returns
    -------
    ndarray of complex, shape (len(word) + 1, d)
    """
    mats = np.asarray(mats, dtype=complex)
    tail_phases = np.asarray(tail_phases, dtype=float)
    tail_exps = np.asarray(tail_exps, dtype=float)
    z = np.array(z0, dtype=complex)
    k = mats.shape[1] - 1
    L = len(word)
    out = np.empty((L + 1, z.shape[0]), dtype=complex)
    out[0] = z
    rot = np.exp(1j * tail_phases)
    for s in range(L):
        g = mats[word[s]]
        zk = z[:k]
        num = g[1:, 0] + g[1:, 1:] @ zk
        den = g[0, 0] + g[0, 1:] @ zk
        if tail_exps.size:
            q = den / g[0, 0]
            mod = 1.0 / (abs(g[0, 0]) ** 2 * abs(q) ** 2)
            ang = -2.0 * np.angle(q)
            p = 1.0 / (2.0 * tail_exps)
            z[k:] = z[k:] * rot[word[s]] * mod ** p * np.exp(1j * ang * p)
        z[:k] = num / den
        out[s + 1] = z
    return out


def ray_hits(kind, exps, radius, X, U, t_start):
    """Parameter ``t > 0`` with ``r(x + t u) = 0`` for every row pair of ``X``, ``U``.

    ``x`` must be inside and ``t_start`` (shape (M,)) outside along the ray.
    ``t -> r(x + t u)`` is convex, so Newton from the outside end decreases
    monotonically onto the crossing.
    """
    X = np.asarray(X, dtype=complex)
    U = np.asarray(U, dtype=complex)
    t = np.array(t_start, dtype=float)
    for _ in range(200):
        vals, grads = defining_values(kind, exps, radius, X + t[:, None] * U)
        slope = 2.0 * np.real(np.einsum("ij,ij->i", grads, U))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(slope > 0, vals / slope, 0.5 * t)
        step = np.minimum(step, 0.5 * t)
        t = t - step
        if np.all(np.abs(step) <= 4e-16 * t):
            break
    return t
