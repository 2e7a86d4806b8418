# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of motorlab._kernels_py.

Scalar loops instead of vectorized numpy, but the branch logic — the
Bernoulli branches, the exp cap with its saturating continuation, the
band layout — is identical line for line in meaning.  Any change to a
threshold or a formula must land in both files; the parity tests compare
the backends on random inputs and on solver fixed points.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, expm1, fabs, fmin

cnp.import_array()

EXP_CAP = 700.0
VALUE_CAP = 1e300   # assembled entries are capped here: far outside the
                    # Newton basin only sign and rough size matter, and an
                    # inf would poison norms (inf - inf) and the banded solve
backend_name = "compiled"

cdef double _CAP = 700.0
cdef double _SAT = 100.0            # continuation growth saturates here
cdef double _ECAP = exp(700.0)


cdef inline double _bern(double t) noexcept nogil:
    cdef double e
    if fabs(t) < 1e-5:
        return 1.0 - 0.5 * t + t * t / 12.0
    if t > 30.0:
        e = exp(-t)
        return t * e / (1.0 - e)
    if t < -30.0:
        return -t / (1.0 - exp(t))
    return t / expm1(t)


cdef inline double _expc(double z, long* nclamped) noexcept nogil:
    if z > _CAP:
        nclamped[0] += 1
        return _ECAP * (1.0 + fmin(z - _CAP, _SAT))
    return exp(z)


cdef inline double _dexpc(double z) noexcept nogil:
    return exp(fmin(z, _CAP))


def bernoulli(t):
    """Stable B(t) = t / (e^t - 1), elementwise."""
    arr = np.asarray(t, dtype=np.float64)
    flat = np.ascontiguousarray(arr).ravel()
    out = np.empty_like(flat)
    cdef double[::1] src = flat
    cdef double[::1] dst = out
    cdef Py_ssize_t k
    for k in range(src.shape[0]):
        dst[k] = _bern(src[k])
    return out.reshape(arr.shape)


def phase_residual(r, bp, bm, nu, double sigma, double h):
    """Residual of the discrete phase system.

    Returns (res, nclamped) with res of shape (I, M); nclamped counts
    exponent-cap activations in this evaluation.
    """
    cdef double[:, ::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef double[:, ::1] bpv = np.ascontiguousarray(bp, dtype=np.float64)
    cdef double[:, ::1] bmv = np.ascontiguousarray(bm, dtype=np.float64)
    cdef double[:, :, ::1] nuv = np.ascontiguousarray(nu, dtype=np.float64)
    cdef Py_ssize_t I = rv.shape[0], M = rv.shape[1]
    cdef double c2 = sigma * sigma / (h * h)
    res_arr = np.empty((I, M))
    cdef double[:, ::1] res = res_arr
    cdef long nclamped = 0
    cdef Py_ssize_t i, j, m
    cdef double z, zprev, s, nu_diag, couple

    with nogil:
        for i in range(I):
            for m in range(M):
                # switching part: full sum over j, the j == i term enters
                # as nu_ii * 1 exactly and is removed again, mirroring the
                # reference evaluation
                s = 0.0
                for j in range(I):
                    z = (rv[i, m] - rv[j, m]) / sigma
                    s += nuv[i, j, m] * _expc(z, &nclamped)
                nu_diag = nuv[i, i, m]
                couple = sigma * (nu_diag - (s - nu_diag))

                if m == 0:
                    z = (rv[i, 0] - rv[i, 1]) / sigma
                    res[i, 0] = 2.0 * c2 * (bpv[i, 0]
                                            - bmv[i, 0] * _expc(z, &nclamped)) \
                        + couple
                elif m == M - 1:
                    zprev = -(rv[i, M - 2] - rv[i, M - 1]) / sigma
                    res[i, M - 1] = 2.0 * c2 * (bmv[i, M - 2]
                                                - bpv[i, M - 2]
                                                * _expc(zprev, &nclamped)) \
                        + couple
                else:
                    z = (rv[i, m] - rv[i, m + 1]) / sigma
                    zprev = -(rv[i, m - 1] - rv[i, m]) / sigma
                    res[i, m] = c2 * (bpv[i, m] + bmv[i, m - 1]
                                      - bmv[i, m] * _expc(z, &nclamped)
                                      - bpv[i, m - 1] * _expc(zprev, &nclamped)) \
                        + couple
    # C arithmetic overflows to inf silently; the cap restores finiteness
    np.clip(res_arr, -VALUE_CAP, VALUE_CAP, out=res_arr)
    return res_arr, int(nclamped)


def phase_jacobian_bands(r, bp, bm, nu, double sigma, double h):
    """Band-format Jacobian of phase_residual w.r.t. r.

    Node-major unknown ordering (index = m*I + i), bandwidth I both sides;
    returns ab of shape (2I+1, I*M) laid out for scipy.linalg.solve_banded.
    """
    cdef double[:, ::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef double[:, ::1] bpv = np.ascontiguousarray(bp, dtype=np.float64)
    cdef double[:, ::1] bmv = np.ascontiguousarray(bm, dtype=np.float64)
    cdef double[:, :, ::1] nuv = np.ascontiguousarray(nu, dtype=np.float64)
    cdef Py_ssize_t I = rv.shape[0], M = rv.shape[1]
    cdef Py_ssize_t n = I * M
    cdef double sh2 = sigma / (h * h)
    ab_arr = np.zeros((2 * I + 1, n))
    cdef double[:, ::1] ab = ab_arr
    cdef Py_ssize_t i, j, m
    cdef double z, up_m, lo_prev, s, cross, diag, val

    with nogil:
        for i in range(I):
            for m in range(M):
                # one pass over j: accumulate the row sum and write the
                # cross-species band entries from the same products, the
                # way the reference reuses its precomputed exp table
                s = 0.0
                for j in range(I):
                    z = (rv[i, m] - rv[j, m]) / sigma
                    val = nuv[i, j, m] * _dexpc(z)
                    s += val
                    if j != i:
                        ab[I + i - j, m * I + j] = val
                cross = s - nuv[i, i, m]        # sum over j != i

                if m < M - 1:
                    z = (rv[i, m] - rv[i, m + 1]) / sigma
                    up_m = sh2 * bmv[i, m] * _dexpc(z)
                else:
                    up_m = 0.0
                if m > 0:
                    z = (rv[i, m - 1] - rv[i, m]) / sigma
                    lo_prev = sh2 * bpv[i, m - 1] * _dexpc(-z)
                else:
                    lo_prev = 0.0

                if m == 0:
                    diag = -2.0 * up_m - cross
                elif m == M - 1:
                    diag = -2.0 * lo_prev - cross
                else:
                    diag = -(up_m + lo_prev) - cross
                ab[I, m * I + i] = diag

                # super/sub band entries; the boundary rows carry the
                # doubled half-cell weights
                if m < M - 1:
                    ab[0, (m + 1) * I + i] = (2.0 * up_m if m == 0 else up_m)
                if m > 0:
                    ab[2 * I, (m - 1) * I + i] = \
                        (2.0 * lo_prev if m == M - 1 else lo_prev)
    np.clip(ab_arr, -VALUE_CAP, VALUE_CAP, out=ab_arr)
    return ab_arr
