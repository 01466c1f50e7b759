# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dense kernels.

Every routine takes float64 arrays, works on private copies and returns new
arrays.  Status is reported through return codes; raising is left to
:mod:`trisdp.dense_linalg` so both backends share one error path.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot

cnp.import_array()

cdef double EPS = 2.220446049250313e-16


def sym_eig(a, int max_sweeps):
    """Householder tridiagonalization followed by implicit QL.

    Returns ``(w, V, ok)``; eigenvalues are unsorted, ``V[:, i]`` pairs
    with ``w[i]``.  ``ok`` is False when some eigenvalue needed more than
    ``max_sweeps`` QL sweeps.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V_arr = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = V_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d_arr = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e_arr = np.zeros(n)
    cdef double[:, ::1] V = V_arr
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef Py_ssize_t i, j, k, l, m
    cdef double scale, h, f, g, hh, p, r, c, c2, c3, s, s2, el1, dl1, tst1
    cdef int it
    cdef bint ok = True

    if n == 0:
        return d_arr, V_arr, True

    # tridiagonalize, accumulating the orthogonal transform in V
    for j in range(n):
        d[j] = V[n - 1, j]
    for i in range(n - 1, 0, -1):
        scale = 0.0
        h = 0.0
        for k in range(i):
            scale += fabs(d[k])
        if scale == 0.0:
            e[i] = d[i - 1]
            for j in range(i):
                d[j] = V[i - 1, j]
                V[i, j] = 0.0
                V[j, i] = 0.0
        else:
            for k in range(i):
                d[k] /= scale
                h += d[k] * d[k]
            f = d[i - 1]
            g = sqrt(h)
            if f > 0:
                g = -g
            e[i] = scale * g
            h = h - f * g
            d[i - 1] = f - g
            for j in range(i):
                e[j] = 0.0
            for j in range(i):
                f = d[j]
                V[j, i] = f
                g = e[j] + V[j, j] * f
                for k in range(j + 1, i):
                    g += V[k, j] * d[k]
                    e[k] += V[k, j] * f
                e[j] = g
            f = 0.0
            for j in range(i):
                e[j] /= h
                f += e[j] * d[j]
            hh = f / (h + h)
            for j in range(i):
                e[j] -= hh * d[j]
            for j in range(i):
                f = d[j]
                g = e[j]
                for k in range(j, i):
                    V[k, j] -= f * e[k] + g * d[k]
                d[j] = V[i - 1, j]
                V[i, j] = 0.0
        d[i] = h

    for i in range(n - 1):
        V[n - 1, i] = V[i, i]
        V[i, i] = 1.0
        h = d[i + 1]
        if h != 0.0:
            for k in range(i + 1):
                d[k] = V[k, i + 1] / h
            for j in range(i + 1):
                g = 0.0
                for k in range(i + 1):
                    g += V[k, i + 1] * V[k, j]
                for k in range(i + 1):
                    V[k, j] -= g * d[k]
        for k in range(i + 1):
            V[k, i + 1] = 0.0
    for j in range(n):
        d[j] = V[n - 1, j]
        V[n - 1, j] = 0.0
    V[n - 1, n - 1] = 1.0
    e[0] = 0.0

    # QL sweeps act on rows of W = V^T so the rotations touch contiguous memory
    cdef cnp.ndarray[cnp.float64_t, ndim=2] W_arr = np.ascontiguousarray(V_arr.T)
    cdef double[:, ::1] W = W_arr
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        tst1 = max(tst1, fabs(d[l]) + fabs(e[l]))
        m = l
        while m < n:
            if fabs(e[m]) <= EPS * tst1:
                break
            m += 1
        if m == n:
            m = n - 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_sweeps:
                    ok = False
                    break
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(n):
                        h = W[i + 1, k]
                        W[i + 1, k] = s * W[i, k] + c * h
                        W[i, k] = c * W[i, k] - s * h
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if fabs(e[l]) <= EPS * tst1:
                    break
            if not ok:
                break
        d[l] = d[l] + f
        e[l] = 0.0

    return d_arr, np.ascontiguousarray(W_arr.T), ok


def householder_qr(a):
    """Householder QR of an ``m x n`` matrix with ``m >= n``.

    Returns ``(Q, R)`` with ``Q`` square ``m x m`` and ``R`` ``m x n``.
    No sign convention is imposed here.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] R_arr = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t m = R_arr.shape[0]
    cdef Py_ssize_t n = R_arr.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Q_arr = np.eye(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v_arr = np.zeros(m)
    cdef double[:, ::1] R = R_arr
    cdef double[:, ::1] Q = Q_arr
    cdef double[::1] v = v_arr
    cdef Py_ssize_t i, j, k
    cdef double alpha, norm, vnorm2, dot, amax

    for k in range(min(m - 1, n)):
        # work with the column scaled by its largest entry so that tiny or
        # huge columns neither underflow nor overflow
        amax = 0.0
        for i in range(k, m):
            if fabs(R[i, k]) > amax:
                amax = fabs(R[i, k])
        if amax == 0.0:
            continue
        norm = 0.0
        for i in range(k, m):
            v[i] = R[i, k] / amax
            norm += v[i] * v[i]
        norm = sqrt(norm)
        alpha = -norm if v[k] >= 0 else norm
        v[k] -= alpha
        vnorm2 = 0.0
        for i in range(k, m):
            vnorm2 += v[i] * v[i]
        if vnorm2 == 0.0:
            continue
        # R <- (I - 2 v v^T / v^T v) R
        for j in range(k, n):
            dot = 0.0
            for i in range(k, m):
                dot += v[i] * R[i, j]
            dot = 2.0 * dot / vnorm2
            for i in range(k, m):
                R[i, j] -= dot * v[i]
        # Q <- Q (I - 2 v v^T / v^T v)
        for i in range(m):
            dot = 0.0
            for j in range(k, m):
                dot += Q[i, j] * v[j]
            dot = 2.0 * dot / vnorm2
            for j in range(k, m):
                Q[i, j] -= dot * v[j]
        for i in range(k + 1, m):
            R[i, k] = 0.0
    return Q_arr, R_arr


def cholesky(a):
    """Lower Cholesky factor.  Returns ``(L, info)``; ``info`` is -1 on
    success, otherwise the index of the first non-positive pivot."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] L_arr = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] L = L_arr
    cdef Py_ssize_t n = L_arr.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double s

    for j in range(n):
        s = L[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not s > 0.0:
            return L_arr, j
        s = sqrt(s)
        L[j, j] = s
        for i in range(j + 1, n):
            for k in range(j):
                L[i, j] -= L[i, k] * L[j, k]
            L[i, j] /= s
        for i in range(j):
            L[i, j] = 0.0
    return L_arr, -1


def lu_factor(a, Py_ssize_t nb=48):
    """Blocked LU with partial pivoting.  Returns ``(LU, piv, min_abs_pivot)``.

    Panels of ``nb`` columns are factored in place; the trailing submatrix
    is updated with one matrix product per panel.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A_arr = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] A = A_arr
    cdef Py_ssize_t n = A_arr.shape[0]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] piv_arr = np.arange(n, dtype=np.intp)
    cdef cnp.intp_t[::1] piv = piv_arr
    cdef Py_ssize_t i, j, k, p, k0, k1
    cdef double big, t, lik, pivmin = np.inf
    cdef cnp.intp_t ti

    if nb < 1:
        nb = 1
    for k0 in range(0, n, nb):
        k1 = min(k0 + nb, n)
        for k in range(k0, k1):
            p = k
            big = fabs(A[k, k])
            for i in range(k + 1, n):
                if fabs(A[i, k]) > big:
                    big = fabs(A[i, k])
                    p = i
            if big < pivmin:
                pivmin = big
            if p != k:
                for j in range(n):
                    t = A[k, j]
                    A[k, j] = A[p, j]
                    A[p, j] = t
                ti = piv[k]
                piv[k] = piv[p]
                piv[p] = ti
            if big == 0.0:
                continue
            for i in range(k + 1, n):
                lik = A[i, k] / A[k, k]
                A[i, k] = lik
                if lik != 0.0:
                    for j in range(k + 1, k1):
                        A[i, j] -= lik * A[k, j]
        if k1 < n:
            # U12 = L11^{-1} A12 (unit lower triangular)
            for k in range(k0, k1):
                for i in range(k + 1, k1):
                    lik = A[i, k]
                    if lik != 0.0:
                        for j in range(k1, n):
                            A[i, j] -= lik * A[k, j]
            A_arr[k1:, k1:] -= A_arr[k1:, k0:k1] @ A_arr[k0:k1, k1:]
    if n == 0:
        pivmin = 0.0
    return A_arr, piv_arr, pivmin


def lu_solve(lu, piv, b):
    """Solve with factors from :func:`lu_factor`; ``b`` is 1-d."""
    cdef double[:, ::1] A = np.ascontiguousarray(lu, dtype=np.float64)
    cdef cnp.intp_t[::1] P = np.ascontiguousarray(piv, dtype=np.intp)
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_arr = np.empty(n)
    cdef double[::1] x = x_arr
    cdef double[::1] bb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double s

    for i in range(n):
        s = bb[P[i]]
        for j in range(i):
            s -= A[i, j] * x[j]
        x[i] = s
    for i in range(n - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, n):
            s -= A[i, j] * x[j]
        x[i] = s / A[i, i]
    return x_arr


def solve_lower(L, B):
    """Forward substitution ``L X = B`` for 2-d ``B``."""
    cdef double[:, ::1] Lm = np.ascontiguousarray(L, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X_arr = np.array(B, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] X = X_arr
    cdef Py_ssize_t n = Lm.shape[0]
    cdef Py_ssize_t q = X_arr.shape[1]
    cdef Py_ssize_t i, j, c
    cdef double lij, inv

    for i in range(n):
        for j in range(i):
            lij = Lm[i, j]
            if lij != 0.0:
                for c in range(q):
                    X[i, c] -= lij * X[j, c]
        inv = 1.0 / Lm[i, i]
        for c in range(q):
            X[i, c] *= inv
    return X_arr


def solve_upper(U, B):
    """Back substitution ``U X = B`` for 2-d ``B``."""
    cdef double[:, ::1] Um = np.ascontiguousarray(U, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X_arr = np.array(B, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] X = X_arr
    cdef Py_ssize_t n = Um.shape[0]
    cdef Py_ssize_t q = X_arr.shape[1]
    cdef Py_ssize_t i, j, c
    cdef double uij, inv

    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n):
            uij = Um[i, j]
            if uij != 0.0:
                for c in range(q):
                    X[i, c] -= uij * X[j, c]
        inv = 1.0 / Um[i, i]
        for c in range(q):
            X[i, c] *= inv
    return X_arr
