"""Pure-Python fallback for :mod:`trisdp._kernels`.

Same algorithms and return conventions as the compiled module; the inner
loops are expressed as numpy row/column operations instead of C loops.
"""
import math

import numpy as np

EPS = np.finfo(float).eps


def _tridiagonalize(a):
    """Householder reduction ``A = Q T Q^T``; returns ``(d, e, Q)`` with
    ``e[i] = T[i, i-1]`` and ``e[0] = 0``."""
    A = np.array(a, dtype=float)
    n = A.shape[0]
    Q = np.eye(n)
    for k in range(n - 2):
        x = A[k + 1:, k]
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        alpha = -norm if x[0] >= 0 else norm
        v = x.copy()
        v[0] -= alpha
        vv = v @ v
        if vv == 0.0:
            continue
        beta = 2.0 / vv
        A22 = A[k + 1:, k + 1:]
        p = beta * (A22 @ v)
        w = p - (0.5 * beta * (p @ v)) * v
        A22 -= np.outer(v, w) + np.outer(w, v)
        A[k + 1:, k] = 0.0
        A[k, k + 1:] = 0.0
        A[k + 1, k] = A[k, k + 1] = alpha
        Q[:, k + 1:] -= np.outer(beta * (Q[:, k + 1:] @ v), v)
    d = np.diag(A).copy()
    e = np.zeros(n)
    e[1:] = np.diag(A, -1)
    return d, e, Q


def sym_eig(a, max_sweeps):
    d, e, Q = _tridiagonalize(a)
    n = d.shape[0]
    W = np.ascontiguousarray(Q.T)
    ok = True
    if n == 0:
        return d, Q, ok
    e[:-1] = e[1:]
    e[-1] = 0.0
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1 and abs(e[m]) > EPS * tst1:
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_sweeps:
                    ok = False
                    break
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                d[l + 2:] -= h
                f += h
                p = d[m]
                c = c2 = c3 = 1.0
                el1 = e[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    wi = W[i].copy()
                    W[i] = c * wi - s * W[i + 1]
                    W[i + 1] = s * wi + c * W[i + 1]
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= EPS * tst1:
                    break
            if not ok:
                break
        d[l] += f
        e[l] = 0.0
    return d, np.ascontiguousarray(W.T), ok


def householder_qr(a):
    R = np.array(a, dtype=float)
    m, n = R.shape
    Q = np.eye(m)
    for k in range(min(m - 1, n)):
        amax = np.abs(R[k:, k]).max()
        if amax == 0.0:
            continue
        v = R[k:, k] / amax
        norm = math.sqrt(v @ v)
        alpha = -norm if v[0] >= 0 else norm
        v[0] -= alpha
        vv = v @ v
        if vv == 0.0:
            continue
        R[k:, k:] -= np.outer(v, (2.0 / vv) * (v @ R[k:, k:]))
        Q[:, k:] -= np.outer((2.0 / vv) * (Q[:, k:] @ v), v)
        R[k + 1:, k] = 0.0
    return Q, R


def cholesky(a):
    A = np.array(a, dtype=float)
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        s = A[j, j] - L[j, :j] @ L[j, :j]
        if not s > 0.0:
            L[j:, :] = np.tril(A)[j:, :]
            return L, j
        s = math.sqrt(s)
        L[j, j] = s
        L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / s
    return L, -1


def lu_factor(a, nb=48):
    """Blocked LU with partial pivoting, same layout as the compiled kernel."""
    A = np.array(a, dtype=float)
    n = A.shape[0]
    piv = np.arange(n, dtype=np.intp)
    pivmin = np.inf if n else 0.0
    nb = max(int(nb), 1)
    for k0 in range(0, n, nb):
        k1 = min(k0 + nb, n)
        for k in range(k0, k1):
            p = k + int(np.argmax(np.abs(A[k:, k])))
            big = abs(A[p, k])
            pivmin = min(pivmin, big)
            if p != k:
                A[[k, p]] = A[[p, k]]
                piv[[k, p]] = piv[[p, k]]
            if big == 0.0:
                continue
            A[k + 1:, k] /= A[k, k]
            A[k + 1:, k + 1:k1] -= np.outer(A[k + 1:, k], A[k, k + 1:k1])
        if k1 < n:
            for k in range(k0, k1):
                A[k + 1:k1, k1:] -= np.outer(A[k + 1:k1, k], A[k, k1:])
            A[k1:, k1:] -= A[k1:, k0:k1] @ A[k0:k1, k1:]
    return A, piv, pivmin


def lu_solve(lu, piv, b):
    n = lu.shape[0]
    x = np.asarray(b, dtype=float)[piv].copy()
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


def solve_lower(L, B):
    X = np.array(B, dtype=float)
    for i in range(L.shape[0]):
        X[i] = (X[i] - L[i, :i] @ X[:i]) / L[i, i]
    return X


def solve_upper(U, B):
    X = np.array(B, dtype=float)
    for i in range(U.shape[0] - 1, -1, -1):
        X[i] = (X[i] - U[i, i + 1:] @ X[i + 1:]) / U[i, i]
    return X
