"""Compiled dynamic-programming kernels.

Everything here takes bare float64 arrays and is deliberately free of
Python objects so the kernels can run with the GIL released. Callers in
:mod:`tsproto.distances` own validation and wrapping.
"""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def squared_cost_matrix(x, y):
    """Pointwise squared-difference matrix, shape (len(x), len(y))."""
    n = x.shape[0]
    m = y.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        xi = x[i]
        for j in range(m):
            d = xi - y[j]
            out[i, j] = d * d
    return out


@numba.njit(cache=True, nogil=True)
def descriptor_cost_matrix(xd, yd):
    """Squared Euclidean distances between descriptor rows of xd and yd."""
    n = xd.shape[0]
    m = yd.shape[0]
    r = xd.shape[1]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(r):
                d = xd[i, k] - yd[j, k]
                s += d * d
            out[i, j] = s
    return out


@numba.njit(cache=True, nogil=True)
def windowed_diagonal_cost_matrix(xp, yp, reach):
    """Cost matrix for identity-descriptor shape alignment from padded series.

    ``xp`` and ``yp`` are the edge-padded inputs (length L + reach - 1).
    Cell (i, j) of the result holds sum_k (xp[i+k] - yp[j+k])^2 for
    k = 0..reach-1, i.e. the accumulation of the reach diagonal shifts of
    the padded pointwise matrix. The sum is realized with running sums
    along each diagonal; reach == 1 short-circuits to the raw pointwise
    matrix so the plain-DTW reduction is exact, not just close.
    """
    if reach == 1:
        return squared_cost_matrix(xp, yp)
    np_len = xp.shape[0]
    mp_len = yp.shape[0]
    n = np_len - reach + 1
    m = mp_len - reach + 1
    diag = np.empty((np_len, mp_len))
    for a in range(np_len):
        xa = xp[a]
        for b in range(mp_len):
            d = xa - yp[b]
            v = d * d
            if a > 0 and b > 0:
                v += diag[a - 1, b - 1]
            diag[a, b] = v
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            v = diag[i + reach - 1, j + reach - 1]
            # Windows touching a matrix edge start at the head of their
            # diagonal, where the running sum needs no correction.
            if i > 0 and j > 0:
                v -= diag[i - 1, j - 1]
            out[i, j] = v
    return out


@numba.njit(cache=True, nogil=True)
def accumulate_cost(cost):
    """Classic DTW accumulation: acc[i, j] = cost[i, j] + min of the three predecessors."""
    n, m = cost.shape
    acc = np.empty((n, m))
    acc[0, 0] = cost[0, 0]
    for i in range(1, n):
        acc[i, 0] = acc[i - 1, 0] + cost[i, 0]
    for j in range(1, m):
        acc[0, j] = acc[0, j - 1] + cost[0, j]
    for i in range(1, n):
        for j in range(1, m):
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = cost[i, j] + best
    return acc


@numba.njit(cache=True, nogil=True)
def backtrace(acc):
    """Optimal path through an accumulated cost matrix, as (i, j) rows.

    Ties prefer the diagonal, then the step decreasing i, then the step
    decreasing j, so the path is identical across platforms and across the
    naive/efficient shape variants.
    """
    n, m = acc.shape
    steps = np.empty((n + m - 1, 2), dtype=np.int64)
    i = n - 1
    j = m - 1
    k = n + m - 2
    steps[k, 0] = i
    steps[k, 1] = j
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            if acc[i - 1, j - 1] == best:
                i -= 1
                j -= 1
            elif acc[i - 1, j] == best:
                i -= 1
            else:
                j -= 1
        k -= 1
        steps[k, 0] = i
        steps[k, 1] = j
    return steps[k:].copy()


@numba.njit(cache=True, nogil=True)
def soft_dtw_table(x, y, gamma):
    """Forward soft-DTW table, shape (L1+1, L2+1); value is R[L1, L2].

    Gammas below 1e-6 fall back to the hard minimum (the gamma -> 0 limit)
    to avoid overflowing the exponentials.
    """
    n = x.shape[0]
    m = y.shape[0]
    big = np.inf
    R = np.full((n + 1, m + 1), big)
    R[0, 0] = 0.0
    hard = gamma < 1e-6
    for i in range(1, n + 1):
        xi = x[i - 1]
        for j in range(1, m + 1):
            d = xi - y[j - 1]
            cost = d * d
            r1 = R[i - 1, j - 1]
            r2 = R[i - 1, j]
            r3 = R[i, j - 1]
            rmin = r1
            if r2 < rmin:
                rmin = r2
            if r3 < rmin:
                rmin = r3
            if hard:
                R[i, j] = cost + rmin
            else:
                s = (
                    np.exp((rmin - r1) / gamma)
                    + np.exp((rmin - r2) / gamma)
                    + np.exp((rmin - r3) / gamma)
                )
                R[i, j] = cost + rmin - gamma * np.log(s)
    return R


@numba.njit(cache=True, nogil=True)
def soft_dtw_gradient_kernel(x, y, gamma):
    """Gradient of soft-DTW w.r.t. x via the backward recursion over the forward table."""
    n = x.shape[0]
    m = y.shape[0]
    R = soft_dtw_table(x, y, gamma)
    Rb = np.full((n + 2, m + 2), -np.inf)
    for i in range(n + 1):
        for j in range(m + 1):
            Rb[i, j] = R[i, j]
    Rb[n + 1, m + 1] = R[n, m]
    E = np.zeros((n + 2, m + 2))
    E[n + 1, m + 1] = 1.0
    for i in range(n, 0, -1):
        for j in range(m, 0, -1):
            d_down = (x[i] - y[j - 1]) ** 2 if i < n else 0.0
            d_right = (x[i - 1] - y[j]) ** 2 if j < m else 0.0
            d_diag = (x[i] - y[j]) ** 2 if (i < n and j < m) else 0.0
            a = np.exp((Rb[i + 1, j] - Rb[i, j] - d_down) / gamma)
            b = np.exp((Rb[i, j + 1] - Rb[i, j] - d_right) / gamma)
            c = np.exp((Rb[i + 1, j + 1] - Rb[i, j] - d_diag) / gamma)
            E[i, j] = a * E[i + 1, j] + b * E[i, j + 1] + c * E[i + 1, j + 1]
    grad = np.zeros(n)
    for i in range(1, n + 1):
        g = 0.0
        xi = x[i - 1]
        for j in range(1, m + 1):
            g += E[i, j] * 2.0 * (xi - y[j - 1])
        grad[i - 1] = g
    return grad
