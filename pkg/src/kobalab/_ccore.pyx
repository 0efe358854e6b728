# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see ``_pycore`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, atan2, cos, sin, fabs, INFINITY

cnp.import_array()

cdef enum:
    KIND_POWER_SUM = 0
    KIND_POLYDISC = 1

MAX_DIM = 64


def defining_values(int kind, exps, double radius, Z):
    cdef double complex[:, ::1] z = np.ascontiguousarray(Z, dtype=np.complex128)
    cdef double[::1] m = np.ascontiguousarray(exps, dtype=np.float64)
    cdef Py_ssize_t M = z.shape[0], d = z.shape[1], i, j, jmax
    vals_arr = np.empty(M, dtype=np.float64)
    grads_arr = np.zeros((M, d), dtype=np.complex128)
    cdef double[::1] vals = vals_arr
    cdef double complex[:, ::1] grads = grads_arr
    cdef double inv_r = 1.0 / radius
    cdef double re, im, a2, s, best, f
    for i in range(M):
        if kind == KIND_POWER_SUM:
            s = 0.0
            for j in range(d):
                re = z[i, j].real * inv_r
                im = z[i, j].imag * inv_r
                a2 = re * re + im * im
                if m[j] == 1.0:
                    s += a2
                    grads[i, j] = (re - 1j * im) * inv_r
                else:
                    s += pow(a2, m[j])
                    f = m[j] * pow(a2, m[j] - 1.0) * inv_r
                    grads[i, j] = f * (re - 1j * im)
            vals[i] = s - 1.0
        else:
            best = -1.0
            jmax = 0
            for j in range(d):
                re = z[i, j].real * inv_r
                im = z[i, j].imag * inv_r
                a2 = re * re + im * im
                if a2 > best:
                    best = a2
                    jmax = j
            vals[i] = best - 1.0
            grads[i, jmax] = (z[i, jmax].real - 1j * z[i, jmax].imag) * inv_r * inv_r
    return vals_arr, grads_arr


def ray_scales(int kind, exps, double radius, Z):
    cdef double complex[:, ::1] z = np.ascontiguousarray(Z, dtype=np.complex128)
    cdef double[::1] m = np.ascontiguousarray(exps, dtype=np.float64)
    cdef Py_ssize_t M = z.shape[0], d = z.shape[1], i, j, it
    out_arr = np.empty(M, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double inv_r2 = 1.0 / (radius * radius)
    cdef double a2, mx, t, phi, dphi, tp, step, single
    cdef double[64] A
    if d > MAX_DIM:
        raise ValueError("compiled kernels support at most 64 coordinates")
    for i in range(M):
        mx = 0.0
        for j in range(d):
            a2 = (z[i, j].real * z[i, j].real + z[i, j].imag * z[i, j].imag) * inv_r2
            if kind == KIND_POWER_SUM:
                A[j] = pow(a2, m[j])
            if a2 > mx:
                mx = a2
        if mx == 0.0:
            out[i] = INFINITY
            continue
        if kind == KIND_POLYDISC:
            out[i] = 1.0 / sqrt(mx)
            continue
        t = INFINITY
        for j in range(d):
            if A[j] > 0.0:
                single = pow(A[j], -1.0 / (2.0 * m[j]))
                if single < t:
                    t = single
        for it in range(200):
            phi = -1.0
            dphi = 0.0
            for j in range(d):
                if A[j] > 0.0:
                    tp = A[j] * pow(t, 2.0 * m[j])
                    phi += tp
                    dphi += 2.0 * m[j] * tp
            dphi /= t
            step = phi / dphi
            if t - step > 0.0:
                t = t - step
            else:
                t = 0.5 * t
            if fabs(step) <= 4e-16 * t:
                break
        out[i] = t
    return out_arr


def webster_walk(mats, tail_phases, tail_exps, word, z0):
    cdef double complex[:, :, ::1] g = np.ascontiguousarray(mats, dtype=np.complex128)
    cdef double[:, ::1] ph = np.ascontiguousarray(np.atleast_2d(tail_phases), dtype=np.float64)
    cdef double[::1] te = np.ascontiguousarray(tail_exps, dtype=np.float64)
    cdef long[::1] w = np.ascontiguousarray(word, dtype=np.int_)
    zinit = np.ascontiguousarray(z0, dtype=np.complex128)
    cdef Py_ssize_t k = g.shape[1] - 1, d = zinit.shape[0], L = w.shape[0], ntail = te.shape[0]
    out_arr = np.empty((L + 1, d), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex[::1] z = zinit.copy()
    cdef double complex[64] num
    cdef double complex den, q, acc
    cdef double g00sq, qsq, mod, ang, p, r, a
    cdef Py_ssize_t s, i, j, gi
    if k > MAX_DIM:
        raise ValueError("compiled kernels support at most 64 coordinates")
    for j in range(d):
        out[0, j] = z[j]
    for s in range(L):
        gi = w[s]
        den = g[gi, 0, 0]
        for j in range(k):
            den = den + g[gi, 0, j + 1] * z[j]
        for i in range(k):
            acc = g[gi, i + 1, 0]
            for j in range(k):
                acc = acc + g[gi, i + 1, j + 1] * z[j]
            num[i] = acc
        if ntail > 0:
            q = den / g[gi, 0, 0]
            g00sq = g[gi, 0, 0].real * g[gi, 0, 0].real + g[gi, 0, 0].imag * g[gi, 0, 0].imag
            qsq = q.real * q.real + q.imag * q.imag
            mod = 1.0 / (g00sq * qsq)
            ang = -2.0 * atan2(q.imag, q.real)
            for j in range(ntail):
                p = 1.0 / (2.0 * te[j])
                r = pow(mod, p)
                a = ang * p + ph[gi, j]
                z[k + j] = z[k + j] * (r * cos(a) + 1j * r * sin(a))
        for i in range(k):
            z[i] = num[i] / den
        for j in range(d):
            out[s + 1, j] = z[j]
    return out_arr


def ray_hits(int kind, exps, double radius, X, U, t_start):
    cdef double complex[:, ::1] x = np.ascontiguousarray(X, dtype=np.complex128)
    cdef double complex[:, ::1] u = np.ascontiguousarray(U, dtype=np.complex128)
    cdef double[::1] m = np.ascontiguousarray(exps, dtype=np.float64)
    out_arr = np.array(t_start, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t M = x.shape[0], d = x.shape[1], i, j, it, jmax
    cdef double inv_r = 1.0 / radius
    cdef double t, val, slope, step, re, im, ure, uim, a2, best, gre, gim
    for i in range(M):
        t = out[i]
        for it in range(200):
            if kind == KIND_POWER_SUM:
                val = -1.0
                slope = 0.0
                for j in range(d):
                    re = (x[i, j].real + t * u[i, j].real) * inv_r
                    im = (x[i, j].imag + t * u[i, j].imag) * inv_r
                    ure = u[i, j].real * inv_r
                    uim = u[i, j].imag * inv_r
                    a2 = re * re + im * im
                    if m[j] == 1.0:
                        val += a2
                        slope += 2.0 * (re * ure + im * uim)
                    else:
                        val += pow(a2, m[j])
                        slope += 2.0 * m[j] * pow(a2, m[j] - 1.0) * (re * ure + im * uim)
            else:
                best = -1.0
                jmax = 0
                for j in range(d):
                    re = (x[i, j].real + t * u[i, j].real) * inv_r
                    im = (x[i, j].imag + t * u[i, j].imag) * inv_r
                    a2 = re * re + im * im
                    if a2 > best:
                        best = a2
                        jmax = j
                re = (x[i, jmax].real + t * u[i, jmax].real) * inv_r
                im = (x[i, jmax].imag + t * u[i, jmax].imag) * inv_r
                val = best - 1.0
                slope = 2.0 * (re * u[i, jmax].real + im * u[i, jmax].imag) * inv_r
            if slope > 0.0:
                step = val / slope
            else:
                step = 0.5 * t
            if step > 0.5 * t:
                step = 0.5 * t
            t = t - step
            if fabs(step) <= 4e-16 * t:
                break
        out[i] = t
    return out_arr
