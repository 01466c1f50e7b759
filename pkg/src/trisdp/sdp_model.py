"""Standard-form SDP data, the constraint operator and accuracy indicators.

Problems are ``min <C, X>  s.t.  <A_j, X> = b_j (j = 1..m),  X psd``; the
dual is ``max <b, y>  s.t.  A*(y) + Z = C,  Z psd``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dense_linalg import as_symmetric, lambda_min, sym_eig


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class SdpProblem:
    """Problem data.  ``A`` is stored stacked with shape ``(m, n, n)``.

    Construction symmetrizes ``C`` and every ``A_j``.
    """

    C: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        C = as_symmetric(self.C)
        A = np.asarray(self.A, dtype=float)
        if A.ndim == 2:
            A = A[None]
        if A.ndim != 3 or A.shape[1:] != C.shape:
            raise DimensionError(f"constraint matrices {A.shape} do not match C {C.shape}")
        if A.shape[0] < 1:
            raise DimensionError("need at least one constraint")
        A = 0.5 * (A + A.transpose(0, 2, 1))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if b.shape[0] != A.shape[0]:
            raise DimensionError(f"b has {b.shape[0]} entries for {A.shape[0]} constraints")
        for name, val in (("C", C), ("A", A), ("b", b)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.C.shape[0]

    @property
    def m(self):
        return self.A.shape[0]

    def objective(self, X):
        return float(np.vdot(self.C, X))


@dataclass(frozen=True)
class PrimalDualTriple:
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray

    def check(self, p):
        if self.X.shape != (p.n, p.n) or self.Z.shape != (p.n, p.n) or self.y.shape != (p.m,):
            raise DimensionError(
                f"triple shapes X{self.X.shape} y{self.y.shape} Z{self.Z.shape} "
                f"do not match problem n={p.n}, m={p.m}"
            )


class KktResiduals(NamedTuple):
    primal: float
    dual: float
    comp: float
    min_eig_X: float
    min_eig_Z: float


def apply_A(p, X):
    """``A(X) = (<A_1, X>, ..., <A_m, X>)``."""
    X = np.asarray(X, dtype=float)
    if X.shape != (p.n, p.n):
        raise DimensionError(f"X has shape {X.shape}, expected {(p.n, p.n)}")
    return np.einsum("kij,ij->k", p.A, X)


def apply_A_star(p, v):
    """Adjoint ``A*(v) = sum_j v_j A_j``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (p.m,):
        raise DimensionError(f"v has shape {v.shape}, expected {(p.m,)}")
    return np.tensordot(v, p.A, axes=1)


def dual_slack(p, y):
    """``C - A*(y)``."""
    return p.C - apply_A_star(p, y)


def kkt_residuals(p, t):
    t.check(p)
    return KktResiduals(
        primal=float(np.linalg.norm(apply_A(p, t.X) - p.b)),
        dual=float(np.linalg.norm(p.C - apply_A_star(p, t.y) - t.Z)),
        comp=abs(float(np.vdot(t.X, t.Z))),
        min_eig_X=lambda_min(as_symmetric(t.X)),
        min_eig_Z=lambda_min(as_symmetric(t.Z)),
    )


def accuracy_metric(p, t):
    """Stopping measure: worst of relative primal residual and relative
    complementarity ``|<X, Z>| / (1 + |<C, X>| + |<b, y>|)``."""
    pres = np.linalg.norm(apply_A(p, t.X) - p.b) / (1.0 + np.linalg.norm(p.b))
    comp = abs(np.vdot(t.X, t.Z)) / (1.0 + abs(np.vdot(p.C, t.X)) + abs(p.b @ t.y))
    return float(max(pres, comp))


def infeasibility(p, t):
    """``||A(X) - b|| + max(-lambda_min(C - A*(y)), 0)``."""
    pres = np.linalg.norm(apply_A(p, t.X) - p.b)
    return float(pres + max(-lambda_min(dual_slack(p, t.y)), 0.0))


def duality_gap(p, t):
    return float(np.vdot(p.C, t.X) - p.b @ t.y)


def initial_criterion(p, t):
    """Warm-start acceptance measure: worst of the relative primal residual
    and relative dual residual ``||C - A*(y) - Z||_F / (1 + ||C||_F)``."""
    pres = np.linalg.norm(apply_A(p, t.X) - p.b) / (1.0 + np.linalg.norm(p.b))
    dres = np.linalg.norm(p.C - apply_A_star(p, t.y) - t.Z) / (1.0 + np.linalg.norm(p.C))
    return float(max(pres, dres))


def rotate_problem(p, U):
    """Congruence ``C -> U^T C U``, ``A_j -> U^T A_j U``; ``b`` unchanged."""
    U = np.asarray(U, dtype=float)
    C = U.T @ p.C @ U
    A = np.einsum("ai,kab,bj->kij", U, p.A, U, optimize=True)
    return SdpProblem(C, A, p.b.copy())


def rotate_triple(t, U):
    """Map a triple of the original problem into the rotated coordinates."""
    return PrimalDualTriple(U.T @ t.X @ U, np.array(t.y, dtype=float), U.T @ t.Z @ U)


def rotate_to_block_structure(p, Xref):
    """Rotate the problem so that ``Xref`` becomes diagonal with its
    eigenvalues in descending order.

    Returns ``(rotated_problem, U)``; a point ``X`` of the original problem
    corresponds to ``U^T X U`` of the rotated one.
    """
    w, V = sym_eig(as_symmetric(Xref))
    U = V[:, ::-1].copy()
    return rotate_problem(p, U), U
