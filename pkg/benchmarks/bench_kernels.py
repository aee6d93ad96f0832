"""Compare the compiled simplex kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py            # kernels + toy solve
    python3 benchmarks/bench_kernels.py --case     # also the case study (slow)

Prints one line per benchmark with the median time of each backend and the
speed-up of the compiled one.
"""
import argparse
import statistics
import time
from pathlib import Path

import numpy as np

from flexinvest.formulation.model import formulate
from flexinvest.io.study import load_study
from flexinvest.solver.kernels import BACKENDS
from flexinvest.solver.simplex import SolveOptions, solve

DATA = Path(__file__).resolve().parents[1] / "src" / "flexinvest" / "data"


def median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def kernel_cases(n, m, seed=0):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=n)
    w = rng.uniform(0.5, 4.0, n)
    status = rng.integers(0, 5, n).astype(np.int8)
    lb = np.where(rng.random(m) < 0.2, -np.inf, rng.uniform(-1, 0, m))
    ub = np.where(rng.random(m) < 0.3, np.inf, rng.uniform(1, 3, m))
    x = np.clip(rng.uniform(-1, 3, m), lb, ub)
    alpha = rng.normal(size=m) * (rng.random(m) < 0.05)
    head = rng.permutation(n + m)[:m].astype(np.int64)

    def price(k):
        return lambda: [k.price(d, w, status, 1e-9, False) for _ in range(100)]

    def ratio(k):
        return lambda: [k.ratio_test(x, lb, ub, alpha, 1.0, 1e-9, 1e-9, False, head) for _ in range(100)]

    return {f"price n={n} x100": price, f"ratio_test m={m} x100": ratio}


def report(name, timings):
    cols = "  ".join(f"{b}={t * 1e3:9.2f} ms" for b, t in timings.items())
    speed = ""
    if "compiled" in timings and "python" in timings:
        speed = f"  speed-up x{timings['python'] / timings['compiled']:.1f}"
    print(f"{name:<32}{cols}{speed}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--case", action="store_true", help="include the case-study solve")
    args = ap.parse_args(argv)
    backends = sorted(BACKENDS)
    print(f"backends: {', '.join(backends)}")
    for name, make in kernel_cases(7000, 8500).items():
        report(name, {b: median_time(make(BACKENDS[b]), args.repeat) for b in backends})
    studies = ["toy"] + (["case_study"] if args.case else [])
    for s in studies:
        prob = formulate(load_study(DATA / s / "study.yaml").model_input()).problem
        timings, objs = {}, {}
        for b in backends:
            sols = []
            timings[b] = median_time(lambda: sols.append(solve(prob, SolveOptions(backend=b))),
                                     1 if s == "case_study" else args.repeat)
            objs[b] = sols[-1].objective
        report(f"solve {s}", timings)
        if len(objs) > 1:
            print(f"{'':<32}objective spread {max(objs.values()) - min(objs.values()):.2e}")


if __name__ == "__main__":
    main()
