"""Dense real linear algebra used by every other module.

The factorizations run in :mod:`trisdp._kernels` (Cython) when the extension
is built, otherwise in :mod:`trisdp._kernels_py`.  Set ``TRISDP_BACKEND=python``
to force the fallback.  Matrix products stay with numpy.
"""
from __future__ import annotations

import contextlib
import logging
import os

import numpy as np

from . import _kernels_py

logger = logging.getLogger(__name__)

_BACKENDS = {"python": _kernels_py}
try:
    from . import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None
else:
    _BACKENDS["cython"] = _kernels_c

_requested = os.environ.get("TRISDP_BACKEND", "").strip().lower()
if _requested and _requested not in _BACKENDS:
    logger.warning("backend %r unavailable, using default", _requested)
    _requested = ""
_active = _requested or ("cython" if _kernels_c is not None else "python")
_impl = _BACKENDS[_active]

EPS = np.finfo(float).eps
REG_SCHEDULE = (1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)
NEAR_SINGULAR = float(np.sqrt(EPS))
REFINE_STEPS = 10


class LinAlgError(ArithmeticError):
    """Base class for kernel failures."""


class ConvergenceError(LinAlgError):
    """Eigenvalue iteration hit its sweep cap."""


class NotPositiveDefinite(LinAlgError):
    def __init__(self, pivot):
        super().__init__(f"matrix is not positive definite (pivot {pivot})")
        self.pivot = pivot


class SingularSystem(LinAlgError):
    """Linear system is singular even after diagonal regularization."""


def backend():
    """Name of the active kernel backend (``"cython"`` or ``"python"``)."""
    return _active


def available_backends():
    return tuple(sorted(_BACKENDS))


@contextlib.contextmanager
def use_backend(name):
    """Temporarily switch kernel backend."""
    global _impl, _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}")
    saved = _impl, _active
    _impl, _active = _BACKENDS[name], name
    try:
        yield
    finally:
        _impl, _active = saved


def as_symmetric(M):
    """Return ``(M + M^T) / 2`` as a fresh float array."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return 0.5 * (M + M.T)


def is_lower_triangular(S):
    S = np.asarray(S)
    return not np.any(np.triu(S, 1))


def lower_packed_size(n, r):
    """Number of free entries of an ``n x r`` lower-triangular matrix."""
    return n * r - r * (r - 1) // 2


def sym_eig(M):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(w, V)`` with ``w`` ascending and ``M = V diag(w) V^T``.
    Each eigenvector is signed so its largest-magnitude entry is positive.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    # power-of-two rescaling is exact and keeps tiny or huge data in range
    amax = float(np.abs(M).max()) if n else 0.0
    scale = 2.0 ** np.frexp(amax)[1] if amax > 0 and np.isfinite(amax) else 1.0
    w, V, ok = _impl.sym_eig(M / scale, 30 * max(n, 1))
    if not ok:
        raise ConvergenceError(f"QL iteration did not converge within {30 * n} sweeps")
    order = np.argsort(w, kind="stable")
    w = np.asarray(w)[order] * scale
    V = np.asarray(V)[:, order]
    if n:
        lead = np.argmax(np.abs(V), axis=0)
        signs = np.sign(V[lead, np.arange(n)])
        signs[signs == 0] = 1.0
        V = V * signs
    return w, V


def eigvalsh(M):
    return sym_eig(M)[0]


def lambda_min(M):
    return float(sym_eig(M)[0][0]) if len(M) else np.inf


def qr_decompose(M):
    """QR factorization ``M = Q R`` of a square or tall matrix.

    Rank deficiency is allowed.  ``R`` has a nonnegative diagonal.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < M.shape[1]:
        raise ValueError(f"qr_decompose needs a square or tall matrix, got {M.shape}")
    Q, R = _impl.householder_qr(M)
    Q = np.asarray(Q)
    R = np.asarray(R)
    k = min(R.shape)
    flip = np.ones(Q.shape[0])
    flip[:k][np.diag(R)[:k] < 0] = -1.0
    return Q * flip, R * flip[:, None]


def cholesky_lower(M):
    """Lower Cholesky factor ``L`` with ``L L^T = M`` and positive diagonal."""
    M = np.asarray(M, dtype=float)
    L, info = _impl.cholesky(M)
    if info >= 0:
        raise NotPositiveDefinite(int(info))
    return np.asarray(L)


def solve_lower(L, B):
    B = np.asarray(B, dtype=float)
    X = _impl.solve_lower(np.asarray(L, dtype=float), B.reshape(B.shape[0], -1))
    return np.asarray(X).reshape(B.shape)


def solve_upper(U, B):
    B = np.asarray(B, dtype=float)
    X = _impl.solve_upper(np.asarray(U, dtype=float), B.reshape(B.shape[0], -1))
    return np.asarray(X).reshape(B.shape)


def inv_spd(M):
    """Inverse of a symmetric positive definite matrix via Cholesky."""
    L = cholesky_lower(M)
    Linv = solve_lower(L, np.eye(L.shape[0]))
    return Linv.T @ Linv


def _factor(K, scale):
    lu, piv, pivmin = _impl.lu_factor(K)
    if not pivmin > NEAR_SINGULAR * scale:
        return None
    return lu, piv


def _refined_solve(factors, K, rhs, max_steps):
    """Solve with ``factors`` (of ``K`` or of a shifted ``K``) and refine
    against ``K`` until the residual stops shrinking."""
    lu, piv = factors
    x = np.asarray(_impl.lu_solve(lu, piv, rhs))
    r = rhs - K @ x
    res = np.linalg.norm(r)
    for _ in range(max_steps):
        if not res > 0.0:
            break
        x_new = x + np.asarray(_impl.lu_solve(lu, piv, r))
        r_new = rhs - K @ x_new
        res_new = np.linalg.norm(r_new)
        if not res_new < 0.5 * res:
            if res_new < res:
                x, res = x_new, res_new
            break
        x, r, res = x_new, r_new, res_new
    if not np.all(np.isfinite(x)):
        return None, np.inf
    return x, res


def solve_sym_indefinite(K, rhs, return_shift=False):
    """Solve ``K x = rhs`` for symmetric, possibly indefinite ``K``.

    Uses LU with partial pivoting.  ``K`` counts as near-singular when its
    smallest pivot is at most ``sqrt(eps) * ||K||_F``.  Then ``K + rho I`` is
    factored for ``rho`` escalating through ``REG_SCHEDULE * (1 + ||K||_F)``
    (shifts below the near-singularity level cannot lift the spectrum away
    from zero and are skipped), and the solution is refined against ``K``
    itself.  On a consistent singular system this damps the components
    along near-null directions instead of amplifying them.  A regularized
    solution is accepted only if it reproduces ``rhs`` through ``K`` to
    relative accuracy 1e-6, so inconsistent systems are rejected.

    With ``return_shift=True`` returns ``(x, rho)``, ``rho = 0`` meaning no
    regularization was needed.
    """
    K = np.asarray(K, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    N = K.shape[0]
    if K.shape != (N, N) or rhs.shape != (N,):
        raise ValueError(f"shape mismatch: K {K.shape}, rhs {rhs.shape}")
    normK = np.linalg.norm(K)
    nrhs = np.linalg.norm(rhs)

    fac = _factor(K, normK)
    if fac is not None:
        x, res = _refined_solve(fac, K, rhs, 1)
        if x is not None and res <= 1e-10 * (normK * np.linalg.norm(x) + nrhs):
            return (x, 0.0) if return_shift else x

    eye = np.eye(N)
    for c in REG_SCHEDULE:
        rho = c * (1.0 + normK)
        if rho <= NEAR_SINGULAR * normK:
            continue
        fac = _factor(K + rho * eye, normK + rho)
        if fac is None:
            continue
        x, res = _refined_solve(fac, K, rhs, REFINE_STEPS)
        if x is not None and res <= 1e-6 * nrhs:
            logger.debug("regularized solve accepted with rho=%.1e", rho)
            return (x, rho) if return_shift else x
    raise SingularSystem(f"system of order {N} is singular up to rho={REG_SCHEDULE[-1]:g}*(1+||K||)")
