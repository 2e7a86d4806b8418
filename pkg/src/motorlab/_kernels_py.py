"""Numpy implementations of the per-iteration assembly kernels.

These are the reference implementations; motorlab._kernels is the compiled
twin with identical branch logic, selected at import by motorlab.kernels.

Array conventions (M = cells + 1 nodes, I species):
    r   (I, M)    phase values at nodes
    bp  (I, M-1)  B(dpsi/sigma) per interface, B(t) = t / (e^t - 1)
    bm  (I, M-1)  B(-dpsi/sigma) per interface
    nu  (I, I, M) effective switching rates sampled at nodes (diagonal included)

The residual row (i, m) is the exponentially fitted cell balance of the
density scheme rewritten in r = -sigma*log(n), scaled by sigma/volume, so
the same algebraic system backs both solution paths.  Exponentials are
clamped at EXP_CAP with a linear continuation so iterates never overflow
and the Jacobian stays informative; the clamp count is reported so callers
can flag results where the cap was active at convergence.
"""

import numpy as np

EXP_CAP = 700.0
VALUE_CAP = 1e300   # assembled entries are capped here: far outside the
                    # Newton basin only sign and rough size matter, and an
                    # inf would poison norms (inf - inf) and the banded solve

backend_name = "python"


def bernoulli(t):
    """Stable B(t) = t / (e^t - 1), elementwise."""
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    small = np.abs(t) < 1e-5
    big_pos = t > 30.0
    big_neg = t < -30.0
    mid = ~(small | big_pos | big_neg)
    ts = t[small]
    out[small] = 1.0 - 0.5 * ts + ts * ts / 12.0
    out[mid] = t[mid] / np.expm1(t[mid])
    e = np.exp(-t[big_pos])
    out[big_pos] = t[big_pos] * e / (1.0 - e)
    out[big_neg] = -t[big_neg] / (1.0 - np.exp(t[big_neg]))
    return out


def _expc(z):
    """Clamped exponential: exp(z) for z <= cap, linear continuation above.

    The continuation's growth saturates 100 units past the cap so the value
    never overflows; magnitude is meaningless that far out, only the sign
    and rough size of the residual need to survive for the damping loop.
    """
    clip = z > EXP_CAP
    v = np.exp(np.where(clip, EXP_CAP, z))
    if clip.any():
        v = np.where(clip, v * (1.0 + np.minimum(z - EXP_CAP, 100.0)), v)
    return v, int(np.count_nonzero(clip))


def _dexpc(z):
    # derivative of the clamped exponential (constant beyond the cap)
    return np.exp(np.minimum(z, EXP_CAP))


def phase_residual(r, bp, bm, nu, sigma, h):
    """Residual of the discrete phase system.

    Returns (res, nclamped) with res of shape (I, M); nclamped counts
    exponent-cap activations in this evaluation.
    """
    I, M = r.shape
    c2 = sigma * sigma / (h * h)
    # saturation is the design here: the products below are all nonnegative
    # and each enters the sum with one fixed sign, so an overflow is a clean
    # signed inf (never inf - inf) and the final clip restores a finite value
    with np.errstate(over="ignore"):
        z = (r[:, :-1] - r[:, 1:]) / sigma      # interface m: r_m - r_{m+1}
        er, n1 = _expc(z)                        # used by the node-m row
        el, n2 = _expc(-z)                       # used by the node-(m+1) row
        zx = (r[:, None, :] - r[None, :, :]) / sigma
        ex, n3 = _expc(zx)

        nu_diag = np.einsum("iim->im", nu)
        s = np.einsum("ijm,ijm->im", nu, ex)
        couple = sigma * (nu_diag - (s - nu_diag))   # ex[i,i] == 1 exactly

        res = np.empty((I, M))
        res[:, 1:-1] = c2 * (bp[:, 1:] + bm[:, :-1]
                             - bm[:, 1:] * er[:, 1:]
                             - bp[:, :-1] * el[:, :-1]) + couple[:, 1:-1]
        res[:, 0] = 2.0 * c2 * (bp[:, 0] - bm[:, 0] * er[:, 0]) + couple[:, 0]
        res[:, -1] = 2.0 * c2 * (bm[:, -1]
                                 - bp[:, -1] * el[:, -1]) + couple[:, -1]
    np.clip(res, -VALUE_CAP, VALUE_CAP, out=res)
    return res, n1 + n2 + n3


def phase_jacobian_bands(r, bp, bm, nu, sigma, h):
    """Band-format Jacobian of phase_residual w.r.t. r.

    Node-major unknown ordering (index = m*I + i), bandwidth I both sides;
    returns ab of shape (2I+1, I*M) laid out for scipy.linalg.solve_banded.
    """
    I, M = r.shape
    sh2 = sigma / (h * h)
    # same saturation contract as phase_residual: overflow only ever makes a
    # signed inf that the trailing clip caps
    with np.errstate(over="ignore"):
        z = (r[:, :-1] - r[:, 1:]) / sigma
        der = _dexpc(z)
        del_ = _dexpc(-z)
        zx = (r[:, None, :] - r[None, :, :]) / sigma
        dex = _dexpc(zx)

        nu_diag = np.einsum("iim->im", nu)
        cross_sum = np.einsum("ijm,ijm->im", nu, dex) - nu_diag  # j != i

        up = sh2 * bm * der        # row (i,m) -> col (i,m+1), m in [0, M-2]
        lo = sh2 * bp * del_       # row (i,m) -> col (i,m-1), index m-1
        diag = np.empty((I, M))
        diag[:, 0] = -2.0 * up[:, 0] - cross_sum[:, 0]
        diag[:, -1] = -2.0 * lo[:, -1] - cross_sum[:, -1]
        diag[:, 1:-1] = -(up[:, 1:] + lo[:, :-1]) - cross_sum[:, 1:-1]
        up[:, 0] *= 2.0
        lo[:, -1] *= 2.0

        n = I * M
        ab = np.zeros((2 * I + 1, n))
        ab[I, :] = diag.T.ravel()
        ab[0, I:] = up.T.ravel()
        ab[2 * I, :n - I] = lo.T.ravel()
        for i in range(I):
            for j in range(I):
                if i == j:
                    continue
                ab[I + i - j, j::I] = nu[i, j, :] * dex[i, j, :]
    np.clip(ab, -VALUE_CAP, VALUE_CAP, out=ab)
    return ab
