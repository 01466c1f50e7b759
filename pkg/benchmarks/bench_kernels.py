"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py            # default sizes
    python benchmarks/bench_kernels.py --quick    # small sizes, few repeats

Prints one line per (kernel, size) with the best-of-N time for each backend
and the speedup of the compiled one.
"""
import argparse
import sys
import time

import numpy as np

from trisdp import dense_linalg as dl
from trisdp.pipeline import solve_sdp
from trisdp.problems_io import gen_maxcut


def _best(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(sizes, rng):
    for n in sizes:
        M = rng.standard_normal((n, n))
        S = M + M.T
        P = M @ M.T + n * np.eye(n)
        rhs = rng.standard_normal(n)
        yield "sym_eig", n, lambda S=S: dl.sym_eig(S)
        yield "qr", n, lambda M=M: dl.qr_decompose(M)
        yield "cholesky", n, lambda P=P: dl.cholesky_lower(P)
        yield "solve_sym_indefinite", n, lambda S=S, rhs=rhs: dl.solve_sym_indefinite(S, rhs)


def run(sizes, repeats, solve_n, out=sys.stdout):
    backends = dl.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the Python fallback is available", file=out)
    rng = np.random.default_rng(0)
    header = f"{'kernel':<22}{'n':>5}" + "".join(f"{b + ' ms':>14}" for b in backends)
    print(header + (f"{'speedup':>10}" if len(backends) > 1 else ""), file=out)
    results = []
    cases = list(_cases(sizes, rng))
    p = gen_maxcut(solve_n, 0.5, 1)
    cases.append(("solve maxcut tnsdp", solve_n, lambda: solve_sdp(p, "tnsdp")))
    for name, n, fn in cases:
        times = {}
        for b in backends:
            with dl.use_backend(b):
                fn()  # warm-up
                times[b] = _best(fn, repeats)
        line = f"{name:<22}{n:>5}" + "".join(f"{1e3 * times[b]:>14.3f}" for b in backends)
        if len(backends) > 1:
            line += f"{times['python'] / times['cython']:>9.1f}x"
        print(line, file=out)
        results.append((name, n, times))
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--repeats", type=int, default=None)
    args = ap.parse_args(argv)
    sizes = (10, 30) if args.quick else (10, 50, 100, 200)
    repeats = args.repeats or (2 if args.quick else 5)
    run(sizes, repeats, 12 if args.quick else 40)
    return 0


if __name__ == "__main__":
    sys.exit(main())
