"""End-to-end solve: interior-point warm start, factor handoff, SQP polish."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import qecqp
from .factorization import heuristic_rank
from .qecqp import ModelKind
from .sdp_model import PrimalDualTriple, accuracy_metric, dual_slack, duality_gap, infeasibility
from .sqp_solver import NotStationary, SqpConfig, certify_optimality, solve, strictness_probe
from .warm_start import IpmConfig, interior_point, prepare_handoff


@dataclass
class Solution:
    kind: ModelKind
    r: int
    F: np.ndarray
    mu: np.ndarray
    report: object
    warm: object
    certificate: object
    strictness: object
    E: float
    infeasibility: float
    duality_gap: float
    objective: float
    warm_ms: float
    sqp_ms: float

    @property
    def total_ms(self):
        return self.warm_ms + self.sqp_ms

    @property
    def iterations(self):
        return self.report.iterations

    @property
    def X(self):
        return self.F @ self.F.T


def default_rank(p):
    return min(heuristic_rank(p.m), p.n)


def solve_sdp(p, kind="tnsdp", r=None, eps=1e-8, max_iter=100, ipm=None, warm=None,
              probe=False, cert_tol=None):
    """Solve ``p`` with the factorized model ``kind``.

    ``warm`` may carry an earlier :class:`IpmResult` for the same problem so
    that both models can share one warm start; its time is still charged to
    ``warm_ms``.  ``sqp_ms`` covers the handoff and the SQP loop.

    ``cert_tol`` defaults to ``max(1e-8, 100 eps)``: a point accepted at
    accuracy ``eps`` cannot be certified much more tightly than that.
    """
    kind = ModelKind(kind)
    if cert_tol is None:
        cert_tol = max(1e-8, 100.0 * eps)
    r = default_rank(p) if r is None else int(r)
    if warm is None:
        warm = interior_point(p, ipm)
    warm_ms = 1e3 * warm.seconds

    t0 = time.perf_counter()
    h = prepare_handoff(p, warm.triple, r, kind)
    report = solve(h.instance, h.state, SqpConfig(eps=eps, max_iter=max_iter))
    sqp_ms = 1e3 * (time.perf_counter() - t0)

    F = qecqp.unpack(report.state.x, h.instance)
    if h.rotation is not None:
        F = h.rotation @ F
    mu = np.array(report.state.mu)
    t = PrimalDualTriple(F @ F.T, mu, dual_slack(p, mu))

    strict = None
    if probe:
        try:
            strict = strictness_probe(h.instance, report.state)
        except NotStationary:
            strict = None
    report.strictness = strict
    return Solution(
        kind=kind,
        r=r,
        F=F,
        mu=mu,
        report=report,
        warm=warm,
        certificate=certify_optimality(p, F, mu, tol=cert_tol),
        strictness=strict,
        E=accuracy_metric(p, t),
        infeasibility=infeasibility(p, t),
        duality_gap=duality_gap(p, t),
        objective=p.objective(t.X),
        warm_ms=warm_ms,
        sqp_ms=sqp_ms,
    )
