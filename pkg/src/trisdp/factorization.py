"""Lower-triangular low-rank factors ``X = S S^T`` and rank rules."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dense_linalg import as_symmetric, is_lower_triangular, qr_decompose, sym_eig


class FactorizationError(ValueError):
    pass


class NotPSD(FactorizationError):
    pass


class RankExceeded(FactorizationError):
    pass


class SingularFactor(FactorizationError):
    pass


def max_triangular_rank(k):
    """Largest ``r`` with ``r (r + 1) / 2 <= k``."""
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return (math.isqrt(8 * k + 1) - 1) // 2


def heuristic_rank(m):
    """Smallest ``r`` with ``r (r + 1) / 2 >= m``, i.e.
    ``ceil((sqrt(8m + 1) - 1) / 2)`` evaluated in integer arithmetic."""
    r = max_triangular_rank(m)
    return r if r * (r + 1) // 2 >= m else r + 1


def rank_tolerance(lam_max):
    return 1e-8 * max(1.0, lam_max)


@dataclass(frozen=True)
class TriFactor:
    S: np.ndarray
    sign_normalized: bool = True

    def gram(self):
        return self.S @ self.S.T


def sign_normalize(S):
    """Flip columns so that every nonzero diagonal entry is positive."""
    S = np.array(S, dtype=float)
    k = min(S.shape)
    d = np.diag(S)[:k]
    S[:, :k] *= np.where(d < 0, -1.0, 1.0)
    return S


def triangularize(U):
    """Turn any ``U`` (n x r, r <= n) into ``S`` lower triangular with
    ``S S^T = U U^T``.

    With ``U = [U1; U2]`` and ``U1^T = Q R``, ``S = [R^T; U2 Q]``.  Exact for
    any ``U``; if ``U1`` is singular some diagonal entries of ``S`` vanish.
    """
    U = np.asarray(U, dtype=float)
    n, r = U.shape
    if r > n:
        raise ValueError(f"factor has more columns ({r}) than rows ({n})")
    Q, R = qr_decompose(U[:r].T)
    S = np.empty_like(U)
    S[:r] = np.tril(R.T)
    S[r:] = U[r:] @ Q
    return sign_normalize(S)


def tri_factor(X, r):
    """Lower-triangular ``S`` (n x r) with ``S S^T = X`` for psd ``X`` of
    rank at most ``r``; signs normalized to a nonnegative diagonal."""
    X = as_symmetric(X)
    n = X.shape[0]
    if not 1 <= r <= n:
        raise ValueError(f"r must lie in [1, {n}], got {r}")
    w, V = sym_eig(X)
    lam_max = max(float(w[-1]), 0.0)
    if w[0] < -1e-8 * lam_max or (lam_max == 0.0 and w[0] < 0.0):
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} below -1e-8 * lambda_max")
    if r < n and w[n - r - 1] > rank_tolerance(lam_max):
        raise RankExceeded(f"eigenvalue {r + 1} is {w[n - r - 1]:.3e}, X has rank > {r}")
    lam = np.clip(w[::-1][:r], 0.0, None)
    U = V[:, ::-1][:, :r] * np.sqrt(lam)
    return TriFactor(triangularize(U), True)


def separation_delta(P):
    """``sqrt(lambda_min(P P^T))`` for square lower-triangular full-rank ``P``:
    any other lower-triangular ``Q`` with ``Q Q^T = P P^T`` lies at least this
    far from ``P`` in Frobenius norm."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"P must be square, got {P.shape}")
    if not is_lower_triangular(P):
        raise ValueError("P must be lower triangular")
    if np.any(np.diag(P) == 0.0):
        raise SingularFactor("P has a zero diagonal entry")
    lam = sym_eig(P @ P.T)[0][0]
    if lam <= 0.0:
        raise SingularFactor("P P^T is numerically singular")
    return float(np.sqrt(lam))
