"""Dense tableau kernels for the bounded dual simplex.

Each kernel exists twice: a loop version compiled with numba and a
vectorized numpy version.  ``pivot``, ``basic_values``, ``leaving_row`` and
``entering_col`` are bound to one of them according to ``RML_NUMBA``.
"""

from __future__ import annotations

import numpy as np

from .._accel import njit, select


@njit
def pivot_nb(T, beta, d, r, q):
    m, N = T.shape
    piv = T[r, q]
    for j in range(N):
        T[r, j] /= piv
    beta[r] /= piv
    for i in range(m):
        if i == r:
            continue
        f = T[i, q]
        if f != 0.0:
            for j in range(N):
                T[i, j] -= f * T[r, j]
            beta[i] -= f * beta[r]
            T[i, q] = 0.0
    f = d[q]
    if f != 0.0:
        for j in range(N):
            d[j] -= f * T[r, j]
    d[q] = 0.0
    T[r, q] = 1.0


def pivot_np(T, beta, d, r, q):
    piv = T[r, q]
    T[r] /= piv
    beta[r] /= piv
    col = T[:, q].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if nz.size:
        T[nz] -= np.outer(col[nz], T[r])
        beta[nz] -= col[nz] * beta[r]
        T[nz, q] = 0.0
    if d[q] != 0.0:
        d -= d[q] * T[r]
    d[q] = 0.0
    T[r, q] = 1.0


@njit
def basic_values_nb(T, beta, x, is_basic):
    m, N = T.shape
    out = beta.copy()
    for j in range(N):
        if not is_basic[j]:
            xj = x[j]
            if xj != 0.0:
                for i in range(m):
                    out[i] -= T[i, j] * xj
    return out


def basic_values_np(T, beta, x, is_basic):
    xn = np.where(is_basic, 0.0, x)
    return beta - T @ xn


@njit
def leaving_row_nb(xb, lbb, ubb, basic, tol, bland):
    best = -1
    best_val = 0.0
    for i in range(xb.shape[0]):
        v = 0.0
        if xb[i] < lbb[i] - tol:
            v = lbb[i] - xb[i]
        elif xb[i] > ubb[i] + tol:
            v = xb[i] - ubb[i]
        if v > 0.0:
            if bland:
                if best < 0 or basic[i] < basic[best]:
                    best = i
            elif v > best_val:
                best = i
                best_val = v
    return best


def leaving_row_np(xb, lbb, ubb, basic, tol, bland):
    below = lbb - xb
    above = xb - ubb
    infeas = np.maximum(below, above)
    mask = infeas > tol
    if not mask.any():
        return -1
    if bland:
        cand = np.flatnonzero(mask)
        return int(cand[np.argmin(basic[cand])])
    return int(np.argmax(np.where(mask, infeas, -np.inf)))


@njit
def entering_col_nb(alpha, d, at_upper, movable, direction, piv_tol, dual_tol, bland):
    """Dual ratio test; ``direction`` is +1 when the leaving value must rise."""
    N = alpha.shape[0]
    bound = np.inf
    for j in range(N):
        if not movable[j]:
            continue
        a = alpha[j] * direction
        if at_upper[j]:
            a = -a
        if a < -piv_tol:
            dj = abs(d[j])
            if bland:
                ratio = dj / -a
            else:
                ratio = (dj + dual_tol) / -a
            if ratio < bound:
                bound = ratio
    if bound == np.inf:
        return -1
    best = -1
    best_a = 0.0
    for j in range(N):
        if not movable[j]:
            continue
        a = alpha[j] * direction
        if at_upper[j]:
            a = -a
        if a < -piv_tol:
            ratio = abs(d[j]) / -a
            if bland:
                if ratio <= bound + 1e-12:
                    return j
            elif ratio <= bound and -a > best_a:
                best = j
                best_a = -a
    return best


def entering_col_np(alpha, d, at_upper, movable, direction, piv_tol, dual_tol, bland):
    a = alpha * direction
    a = np.where(at_upper, -a, a)
    cand = movable & (a < -piv_tol)
    if not cand.any():
        return -1
    idx = np.flatnonzero(cand)
    mag = -a[idx]
    dj = np.abs(d[idx])
    if bland:
        ratio = dj / mag
        return int(idx[ratio <= ratio.min() + 1e-12][0])
    bound = ((dj + dual_tol) / mag).min()
    ratio = dj / mag
    ok = ratio <= bound
    return int(idx[ok][np.argmax(mag[ok])])


pivot = select(pivot_nb, pivot_np)
basic_values = select(basic_values_nb, basic_values_np)
leaving_row = select(leaving_row_nb, leaving_row_np)
entering_col = select(entering_col_nb, entering_col_np)
