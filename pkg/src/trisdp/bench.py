"""Benchmark suites: seeded instance sweeps solved with both models.

Every instance gets one interior-point warm start that both models share,
so the NSDP / TNSDP comparison isolates the factorized phase.  Timing
columns are the minimum over ``repeats`` runs of each phase; every other
column is deterministic for a given seed.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dense_linalg import LinAlgError
from .pipeline import solve_sdp
from .problems_io import gen_maxcut, gen_normmin, gen_random_sdp
from .sdp_model import DimensionError
from .sqp_solver import Diverged
from .warm_start import interior_point

logger = logging.getLogger(__name__)

CSV_HEADER = (
    "problem_id", "family", "n", "m", "r", "model", "warm_ms", "sqp_ms", "total_ms", "iters",
    "E", "infeas", "gap", "certified", "strict_lambda_min", "objective",
)
MODELS = ("nsdp", "tnsdp")
MAXCUT_DENSITY = 0.5


@dataclass(frozen=True)
class Instance:
    problem_id: str
    family: str
    params: tuple  # generator arguments without the seed
    seed: int


@dataclass(frozen=True)
class Suite:
    name: str
    instances: tuple
    eps: float
    x_param: str | None  # sweep variable for trend fits


def instance_seed(base, index):
    return int(base) * 100_003 + int(index)


def _rand(n, m, seed):
    return Instance(f"rand_n{n}_m{m}_s{seed}", "rand", (n, m), seed)


def _maxcut(n, seed):
    return Instance(f"maxcut_n{n}_s{seed}", "maxcut", (n, MAXCUT_DENSITY), seed)


def _normmin(p, q, m, seed):
    return Instance(f"normmin_p{p}_q{q}_m{m}_s{seed}", "normmin", (p, q, m), seed)


_SWEEPS = {
    # suite: (desk values, paper values, repetitions desk/paper)
    "fig1": (range(5, 31, 5), range(5, 51), (3, 5)),
    "fig2": (range(20, 61, 10), range(20, 101), (3, 5)),
    "fig3": (range(5, 21, 5), range(5, 51), (3, 5)),
}
_TABLES = {"tab1": ((10, 30), (10, 30)), "tab2": ((50,), (50,)), "tab3": ((10, 10), (50, 10))}
SUITES = tuple(_SWEEPS) + tuple(_TABLES)


def build_suite(name, scale="desk", seed=1):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if scale not in ("desk", "paper"):
        raise ValueError(f"unknown scale {scale!r}")
    paper = scale == "paper"
    out = []
    if name in _SWEEPS:
        desk_vals, paper_vals, reps = _SWEEPS[name]
        vals, nrep = (paper_vals, reps[1]) if paper else (desk_vals, reps[0])
        for v in vals:
            for k in range(nrep):
                s = instance_seed(seed, len(out))
                if name == "fig1":
                    out.append(_rand(10, v, s))
                elif name == "fig2":
                    out.append(_maxcut(v, s))
                else:
                    out.append(_normmin(v, v, 10, s))
        x_param = {"fig1": "m", "fig2": "n", "fig3": "p"}[name]
        return Suite(name, tuple(out), 1e-8, x_param)
    dims = _TABLES[name][1 if paper else 0]
    for k in range(10):
        s = instance_seed(seed, k)
        if name == "tab1":
            out.append(_rand(*dims, s))
        elif name == "tab2":
            out.append(_maxcut(dims[0], s))
        else:
            out.append(_normmin(dims[0], dims[0], dims[1], s))
    return Suite(name, tuple(out), 0.0, None)


def generate(inst):
    if inst.family == "rand":
        return gen_random_sdp(*inst.params, inst.seed)[0]
    if inst.family == "maxcut":
        return gen_maxcut(*inst.params, inst.seed)
    return gen_normmin(*inst.params, inst.seed).problem


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return repr(float(x))


def _ms(x):
    return f"{x:.3f}"


def run_instance(inst, eps, repeats=1, probe=True):
    """Rows (one per model) for a single instance."""
    p = generate(inst)
    base = {"problem_id": inst.problem_id, "family": inst.family, "n": p.n, "m": p.m}
    try:
        warm = min((interior_point(p) for _ in range(max(repeats, 1))), key=lambda w: w.seconds)
    except (LinAlgError, DimensionError) as exc:
        logger.error("%s: warm start failed: %s", inst.problem_id, exc)
        return [_failed_row(base, model) for model in MODELS]
    rows = []
    for model in MODELS:
        try:
            runs = [solve_sdp(p, model, eps=eps, warm=warm, probe=probe) for _ in range(max(repeats, 1))]
        except (LinAlgError, Diverged) as exc:
            logger.error("%s/%s: %s", inst.problem_id, model, exc)
            rows.append(_failed_row(base, model))
            continue
        sol = min(runs, key=lambda s: s.sqp_ms)
        lam = sol.strictness.lambda_min_reduced if sol.strictness is not None else math.nan
        rows.append({
            **base,
            "r": sol.r,
            "model": model,
            "warm_ms": sol.warm_ms,
            "sqp_ms": sol.sqp_ms,
            "total_ms": sol.total_ms,
            "iters": sol.iterations,
            "E": sol.E,
            "infeas": sol.infeasibility,
            "gap": sol.duality_gap,
            "certified": sol.certificate.certified,
            "strict_lambda_min": lam,
            "objective": sol.objective,
        })
    return rows


def _failed_row(base, model):
    row = dict.fromkeys(CSV_HEADER, math.nan)
    row.update(base, model=model, certified=False)
    return row


def _run_star(args):
    return run_instance(*args)


def run_suite(suite, repeats=1, jobs=1, probe=True):
    """All rows of ``suite`` in instance order (independent of ``jobs``)."""
    tasks = [(inst, suite.eps, repeats, probe) for inst in suite.instances]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_run_star, tasks))
    else:
        chunks = [_run_star(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        out = []
        for key in CSV_HEADER:
            v = row[key]
            if key.endswith("_ms"):
                out.append("nan" if v is None or math.isnan(v) else _ms(v))
            else:
                out.append(_fmt(v) if not isinstance(v, str) else v)
        w.writerow(out)
    return buf.getvalue()


def sweep_value(problem_id, x_param):
    """Sweep coordinate encoded in a problem id, e.g. ``m`` of ``rand_n10_m30_s5``."""
    for part in problem_id.split("_"):
        if part.startswith(x_param) and part[len(x_param):].isdigit():
            return int(part[len(x_param):])
    raise ValueError(f"{problem_id!r} carries no {x_param!r} field")


def median_times(rows, x_param, column="total_ms"):
    """``{model: {x: median time}}`` over the rows of a sweep."""
    groups = {}
    for row in rows:
        v = row[column]
        if v is None or math.isnan(v):
            continue
        x = sweep_value(row["problem_id"], x_param)
        groups.setdefault(row["model"], {}).setdefault(x, []).append(v)
    return {model: {x: float(np.median(v)) for x, v in sorted(g.items())} for model, g in groups.items()}


def trend_slopes(rows, x_param, column="total_ms"):
    """Least-squares slope of median time against the sweep variable."""
    out = {}
    for model, med in median_times(rows, x_param, column).items():
        xs = np.array(list(med), dtype=float)
        ys = np.array(list(med.values()))
        out[model] = float(np.polyfit(xs, ys, 1)[0]) if len(xs) > 1 else math.nan
    return out
