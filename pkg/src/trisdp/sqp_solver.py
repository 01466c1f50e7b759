"""Local Newton-KKT SQP for the quadratic-equality QP, plus optimality
certification and a second-order strictness probe."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import qecqp
from .dense_linalg import SingularSystem, lambda_min, solve_sym_indefinite, sym_eig
from .sdp_model import accuracy_metric, apply_A, dual_slack, duality_gap, infeasibility

logger = logging.getLogger(__name__)


class Diverged(RuntimeError):
    pass


class NotStationary(ValueError):
    pass


class KktSingular(SingularSystem):
    def __init__(self, msg, jacobian_rank, m):
        super().__init__(f"{msg} (constraint Jacobian rank {jacobian_rank} of {m})")
        self.jacobian_rank = jacobian_rank


@dataclass
class SqpState:
    x: np.ndarray
    mu: np.ndarray


@dataclass(frozen=True)
class SqpConfig:
    eps: float = 1e-8
    max_iter: int = 100

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError("eps must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class SolveReport:
    state: SqpState
    iterations: int
    best_iteration: int
    E_history: list
    shift_history: list
    sqp_seconds: float
    E: float
    infeasibility: float
    duality_gap: float
    objective: float
    certificate_margin: float
    strictness: object = None
    extras: dict = field(default_factory=dict)


def kkt_system(ev):
    """Symmetric form of the Newton-KKT system.

    The second block row of ``[[W, -J], [J^T, 0]] (xi, zeta) = -(grad f, g)``
    is negated so that the matrix is symmetric.
    """
    d, m = ev.jac_g.shape
    K = np.zeros((d + m, d + m))
    K[:d, :d] = ev.hess_L
    K[:d, d:] = -ev.jac_g
    K[d:, :d] = -ev.jac_g.T
    rhs = np.concatenate([-ev.grad_f, ev.g])
    return K, rhs


def _jacobian_rank(J):
    if J.size == 0:
        return 0
    s = np.sqrt(np.clip(sym_eig(J.T @ J)[0], 0.0, None))
    return int(np.sum(s > 1e-10 * max(s[-1], 1e-300)))


def _newton_step(inst, state):
    ev = qecqp.evaluate(inst, state.x, state.mu)
    K, rhs = kkt_system(ev)
    try:
        sol, rho = solve_sym_indefinite(K, rhs, return_shift=True)
    except SingularSystem as exc:
        raise KktSingular(str(exc), _jacobian_rank(ev.jac_g), inst.m) from exc
    xi, zeta = sol[: inst.d], sol[inst.d:]
    return SqpState(state.x + xi, zeta), rho


def sqp_step(inst, state):
    """One full Newton step: ``x+ = x + xi``, ``mu+ = zeta``."""
    return _newton_step(inst, state)[0]


def stopping_value(inst, state):
    return accuracy_metric(inst.problem, qecqp.sdp_triple(inst, state.x, state.mu))


def solve(inst, state0, config=None):
    """Iterate :func:`sqp_step` until the accuracy metric drops to
    ``config.eps`` or ``config.max_iter`` steps were taken.

    The iterate with the smallest metric is reported (with ``eps = 0`` the
    loop always runs to ``max_iter``).
    """
    config = config or SqpConfig()
    p = inst.problem
    t0 = time.perf_counter()
    state = SqpState(np.array(state0.x, dtype=float), np.array(state0.mu, dtype=float))
    bound = 1e8 * (1.0 + np.linalg.norm(state.x))
    E_hist, shifts = [], []
    best_E, best_state, best_k = math.inf, state, 0
    k = 0
    while True:
        E = stopping_value(inst, state)
        E_hist.append(E)
        if E < best_E:
            best_E, best_state, best_k = E, state, k
        if (config.eps > 0 and E <= config.eps) or k >= config.max_iter:
            break
        state, rho = _newton_step(inst, state)
        shifts.append(rho)
        k += 1
        xn = np.linalg.norm(state.x)
        if not np.isfinite(xn) or not np.all(np.isfinite(state.mu)) or xn > bound:
            raise Diverged(f"iterate norm {xn:.3e} exceeds {bound:.3e} at iteration {k}")
    elapsed = time.perf_counter() - t0

    t = qecqp.sdp_triple(inst, best_state.x, best_state.mu)
    return SolveReport(
        state=best_state,
        iterations=k,
        best_iteration=best_k,
        E_history=E_hist,
        shift_history=shifts,
        sqp_seconds=elapsed,
        E=best_E,
        infeasibility=infeasibility(p, t),
        duality_gap=duality_gap(p, t),
        objective=p.objective(t.X),
        certificate_margin=lambda_min(t.Z),
    )


@dataclass(frozen=True)
class Certificate:
    certified: bool
    margin: float
    stationarity: float
    primal_residual: float


def certify_optimality(p, F, mu, tol=1e-8):
    """Dual certificate for a factor ``F`` and multipliers ``mu``: optimal
    for the SDP if ``C - A*(mu)`` is psd, ``(C - A*(mu)) F = 0`` and
    ``A(F F^T) = b``.  The margin test is absolute (``>= -tol``); the other
    two are scaled by ``1 + ||C||_F`` and ``1 + ||b||``."""
    F = np.asarray(F, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if F.ndim != 2 or F.shape[0] != p.n or mu.shape != (p.m,):
        raise ValueError(f"factor {F.shape} / multipliers {mu.shape} do not match n={p.n}, m={p.m}")
    W = dual_slack(p, mu)
    margin = lambda_min(W)
    stat = float(np.linalg.norm(W @ F))
    pres = float(np.linalg.norm(apply_A(p, F @ F.T) - p.b))
    ok = (
        margin >= -tol
        and stat <= tol * (1.0 + np.linalg.norm(p.C))
        and pres <= tol * (1.0 + np.linalg.norm(p.b))
    )
    return Certificate(bool(ok), margin, stat, pres)


@dataclass(frozen=True)
class StrictnessProbe:
    lambda_min_reduced: float
    nullity: int
    dimension: int

    @property
    def strict(self):
        return self.lambda_min_reduced > 0


def strictness_probe(inst, state, tol=1e-6):
    """Smallest eigenvalue of the Lagrangian Hessian on the null space of
    the constraint Jacobian, and how many of its eigenvalues lie in
    ``[-tol, tol]``.  An empty null space reports ``+inf``."""
    ev = qecqp.evaluate(inst, state.x, state.mu)
    grad_L = ev.grad_f - ev.jac_g @ state.mu
    if np.linalg.norm(grad_L) > 1e-6 * (1.0 + np.linalg.norm(ev.grad_f)):
        raise NotStationary(f"Lagrangian gradient norm {np.linalg.norm(grad_L):.3e} too large for the probe")
    J = ev.jac_g
    w, V = sym_eig(J @ J.T)
    cutoff = 1e-10 * max(w[-1], 0.0)
    N = V[:, w <= cutoff]
    if N.shape[1] == 0:
        return StrictnessProbe(math.inf, 0, 0)
    red = sym_eig(N.T @ ev.hess_L @ N)[0]
    return StrictnessProbe(float(red[0]), int(np.sum(np.abs(red) <= tol)), N.shape[1])


def convergence_constant(E_history, order=1.5, iterates=3):
    """Smallest ``c`` with ``E[k+1] <= c * E[k]**order`` over the last
    ``iterates`` iterates before the sequence reaches its floor (so
    ``iterates - 1`` consecutive ratios).

    The floor is the first iterate within a factor 100 of the best value.
    Returns ``inf`` if any of those steps fails to decrease.
    """
    E = np.asarray(E_history, dtype=float)
    if E.size < 2:
        return math.inf
    end = int(np.argmax(E <= 100.0 * E.min()))
    if end < 1:
        return math.inf
    lo = max(0, end - (iterates - 1))
    c = 0.0
    for k in range(lo, end):
        if not (0.0 <= E[k + 1] < E[k]):
            return math.inf
        c = max(c, E[k + 1] / E[k] ** order)
    return c
