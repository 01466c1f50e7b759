"""Primal-dual interior-point warm start and the handoff to the SQP phase."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import qecqp
from .dense_linalg import (
    LinAlgError,
    NotPositiveDefinite,
    cholesky_lower,
    inv_spd,
    lambda_min,
    solve_lower,
    solve_sym_indefinite,
    solve_upper,
    sym_eig,
)
from .factorization import triangularize
from .qecqp import ModelKind
from .sdp_model import (
    DimensionError,
    PrimalDualTriple,
    apply_A,
    apply_A_star,
    initial_criterion,
    rotate_to_block_structure,
    rotate_triple,
)
from .sqp_solver import SqpState

logger = logging.getLogger(__name__)

HANDOFF_THRESHOLD = 1e-3


class LinearSolveFailure(LinAlgError):
    pass


@dataclass(frozen=True)
class IpmConfig:
    target_accuracy: float = 1e-3
    max_iter: int = 50
    sigma: float = 0.3
    tau: float = 0.98

    def __post_init__(self):
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")


@dataclass(frozen=True)
class IpmIterate:
    k: int
    mu: float
    criterion: float
    min_eig_X: float
    min_eig_Z: float
    alpha_primal: float
    alpha_dual: float


@dataclass
class IpmResult:
    triple: PrimalDualTriple
    iterations: int
    converged: bool
    criterion: float
    mu: float
    seconds: float
    history: list = field(default_factory=list)


def _max_step(X, dX):
    """Largest ``alpha`` keeping ``X + alpha dX`` positive definite."""
    L = cholesky_lower(X)
    Linv = solve_lower(L, np.eye(L.shape[0]))
    S = Linv @ dX @ Linv.T
    lam = lambda_min(0.5 * (S + S.T))
    return math.inf if lam >= 0 else -1.0 / lam


def interior_point(p, cfg=None):
    """Infeasible-start primal-dual path following with the HKM direction.

    Stops once the warm-start criterion is below 1e-3 and
    ``<X, Z> / n <= cfg.target_accuracy``.  Hitting ``cfg.max_iter`` is not
    an error: the last iterate comes back with ``converged=False``.
    """
    cfg = cfg or IpmConfig()
    n, m = p.n, p.m
    if m > n * (n + 1) // 2:
        raise DimensionError(f"{m} constraints cannot be independent in dimension n={n}")
    t0 = time.perf_counter()
    rho = 1.0 + np.linalg.norm(p.b) + np.linalg.norm(p.C)
    X = rho * np.eye(n)
    Z = rho * np.eye(n)
    y = np.zeros(m)
    history = []
    ap = ad = 0.0
    k = 0
    while True:
        t = PrimalDualTriple(X, y, Z)
        mu = float(np.vdot(X, Z)) / n
        crit = initial_criterion(p, t)
        history.append(IpmIterate(k, mu, crit, lambda_min(X), lambda_min(Z), ap, ad))
        converged = crit < HANDOFF_THRESHOLD and mu <= cfg.target_accuracy
        if converged or k >= cfg.max_iter:
            break

        rp = p.b - apply_A(p, X)
        Rd = p.C - apply_A_star(p, y) - Z
        try:
            Zinv = inv_spd(Z)
        except NotPositiveDefinite as exc:
            raise LinearSolveFailure("dual iterate lost definiteness") from exc
        XAZ = X @ p.A @ Zinv
        M = np.einsum("iab,jab->ij", p.A, XAZ)
        M = 0.5 * (M + M.T)
        R = cfg.sigma * mu * Zinv - X - X @ Rd @ Zinv
        rhs = rp - apply_A(p, R)
        try:
            dy = _chol_solve(M, rhs)
        except NotPositiveDefinite:
            try:
                dy = solve_sym_indefinite(M, rhs)
            except LinAlgError as exc:
                raise LinearSolveFailure("Schur complement system is singular") from exc
        dZ = Rd - apply_A_star(p, dy)
        dX = cfg.sigma * mu * Zinv - X - X @ dZ @ Zinv
        dX = 0.5 * (dX + dX.T)
        dZ = 0.5 * (dZ + dZ.T)
        ap = min(1.0, cfg.tau * _max_step(X, dX))
        ad = min(1.0, cfg.tau * _max_step(Z, dZ))
        X = X + ap * dX
        y = y + ad * dy
        Z = Z + ad * dZ
        k += 1

    if not converged:
        logger.warning("interior point stopped after %d iterations (criterion %.2e, mu %.2e)", k, crit, mu)
    return IpmResult(t, k, converged, crit, mu, time.perf_counter() - t0, history)


def _chol_solve(M, rhs):
    L = cholesky_lower(M)
    return solve_upper(L.T, solve_lower(L, rhs))


def extract_state(p, triple, r, kind):
    """Initial SQP point from an interior-point triple.

    Keeps the ``r`` largest eigenpairs of ``X`` (negative eigenvalues
    clamped to zero), triangularizes the factor for ``TNSDP`` and passes the
    dual vector through unchanged as the multipliers.
    """
    kind = ModelKind(kind)
    w, V = sym_eig(0.5 * (triple.X + triple.X.T))
    lam = np.clip(w[::-1][:r], 0.0, None)
    F = V[:, ::-1][:, :r] * np.sqrt(lam)
    if kind is ModelKind.TNSDP:
        F = triangularize(F)
    return SqpState(qecqp.pack(F, kind), np.array(triple.y, dtype=float))


@dataclass
class Handoff:
    """Problem the SQP phase works on, plus the rotation back to the
    original coordinates (``None`` when no rotation was applied)."""

    instance: qecqp.QecqpInstance
    state: SqpState
    rotation: np.ndarray | None


def prepare_handoff(p, triple, r, kind):
    """For ``TNSDP`` rotate the problem so that ``X0`` is diagonal with
    descending eigenvalues before extracting the start point."""
    kind = ModelKind(kind)
    U = None
    if kind is ModelKind.TNSDP:
        p, U = rotate_to_block_structure(p, triple.X)
        triple = rotate_triple(triple, U)
    inst = qecqp.build_qecqp(p, r, kind)
    return Handoff(inst, extract_state(p, triple, r, kind), U)
