"""Vectorized view of the factorized models as a QP with quadratic equality
constraints::

    min  f(x) = 1/2 <H x, x>
    s.t. g_j(x) = 1/2 <G_j x, x> - 1/2 b_j = 0

``x`` stacks the free entries of the factor column by column.  For the full
factor (``NSDP``) every block of ``H`` is ``C``; for the lower-triangular
factor (``TNSDP``) block ``k`` is ``C`` with its first ``k`` rows and columns
dropped (0-based).  ``G_j`` is built the same way from ``A_j``.  Neither is
ever formed: products go through ``C @ F`` and ``A_j @ F`` and are then
restricted to the sparsity pattern.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .dense_linalg import lower_packed_size
from .sdp_model import PrimalDualTriple, apply_A_star


class ModelKind(str, enum.Enum):
    NSDP = "nsdp"
    TNSDP = "tnsdp"


class PatternError(ValueError):
    pass


def packed_dimension(n, r, kind):
    kind = ModelKind(kind)
    return n * r if kind is ModelKind.NSDP else lower_packed_size(n, r)


def _pattern(n, r, kind):
    """Row and column index arrays of the free entries in pack order."""
    rows, cols = [], []
    for k in range(r):
        start = k if kind is ModelKind.TNSDP else 0
        rows.append(np.arange(start, n))
        cols.append(np.full(n - start, k))
    return np.concatenate(rows), np.concatenate(cols)


def pack(F, kind):
    """Column-major stacking of the free entries of ``F``."""
    kind = ModelKind(kind)
    F = np.asarray(F, dtype=float)
    n, r = F.shape
    if kind is ModelKind.TNSDP and np.any(np.triu(F, 1)):
        raise PatternError("factor has nonzeros above the diagonal")
    rows, cols = _pattern(n, r, kind)
    return F[rows, cols]


@dataclass(frozen=True)
class QecqpInstance:
    problem: object
    kind: ModelKind
    r: int
    d: int
    offsets: tuple
    sizes: tuple
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.problem.n

    @property
    def m(self):
        return self.problem.m


def build_qecqp(p, r, kind):
    kind = ModelKind(kind)
    n = p.n
    if not 1 <= r <= n:
        raise ValueError(f"r must lie in [1, {n}], got {r}")
    sizes = tuple(n - k if kind is ModelKind.TNSDP else n for k in range(r))
    offsets = tuple(int(o) for o in np.concatenate(([0], np.cumsum(sizes)[:-1])))
    rows, cols = _pattern(n, r, kind)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return QecqpInstance(p, kind, r, int(sum(sizes)), offsets, sizes, rows, cols)


def unpack(x, inst):
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.d,):
        raise ValueError(f"packed vector has shape {x.shape}, expected {(inst.d,)}")
    F = np.zeros((inst.n, inst.r))
    F[inst.rows, inst.cols] = x
    return F


def restrict(inst, M):
    """Pack an ``n x r`` matrix, silently dropping entries off the pattern."""
    return M[inst.rows, inst.cols]


@dataclass(frozen=True)
class Evaluation:
    f: float
    grad_f: np.ndarray
    g: np.ndarray
    jac_g: np.ndarray
    hess_L: np.ndarray


def objective(inst, x):
    F = unpack(x, inst)
    return 0.5 * float(np.sum(F * (inst.problem.C @ F)))


def constraints(inst, x):
    F = unpack(x, inst)
    p = inst.problem
    return 0.5 * (np.einsum("kij,ij->k", p.A @ F, F) - p.b)


def hessian_lagrangian(inst, mu):
    """Dense block-diagonal ``H - sum_j mu_j G_j``."""
    p = inst.problem
    W = p.C - apply_A_star(p, np.asarray(mu, dtype=float))
    H = np.zeros((inst.d, inst.d))
    n = inst.n
    for o, s in zip(inst.offsets, inst.sizes):
        H[o:o + s, o:o + s] = W[n - s:, n - s:]
    return H


def evaluate(inst, x, mu, hessian=True):
    """Objective, constraints, their first derivatives and (optionally) the
    Lagrangian Hessian at ``(x, mu)``."""
    p = inst.problem
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (p.m,):
        raise ValueError(f"mu has shape {mu.shape}, expected {(p.m,)}")
    F = unpack(x, inst)
    CF = p.C @ F
    AF = p.A @ F
    f = 0.5 * float(np.sum(F * CF))
    g = 0.5 * (np.einsum("kij,ij->k", AF, F) - p.b)
    grad_f = restrict(inst, CF)
    jac_g = AF[:, inst.rows, inst.cols].T
    H = hessian_lagrangian(inst, mu) if hessian else None
    return Evaluation(f, grad_f, g, np.ascontiguousarray(jac_g), H)


def lagrangian_gradient(inst, x, mu):
    """``grad f - jac_g @ mu``, computed as the packed ``(C - A*(mu)) F``."""
    p = inst.problem
    F = unpack(x, inst)
    return restrict(inst, (p.C - apply_A_star(p, np.asarray(mu, dtype=float))) @ F)


def sdp_triple(inst, x, mu):
    """SDP-scale triple ``(F F^T, mu, C - A*(mu))``; the 1/2 scaling of the
    QP makes the multipliers coincide with the SDP dual variables."""
    p = inst.problem
    F = unpack(x, inst)
    mu = np.array(mu, dtype=float)
    return PrimalDualTriple(F @ F.T, mu, p.C - apply_A_star(p, mu))
