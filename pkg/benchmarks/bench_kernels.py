"""Compare the compiled and numpy kernel backends.

Usage: python benchmarks/bench_kernels.py [--points 100000] [--repeat 5]

Times ``log_kv`` and ``kdist_cdf`` on the same inputs for every available
backend, checks that the outputs agree, and prints the best-of-``repeat``
wall time per call.
"""

import argparse
import time

import numpy as np

from stochcorr._backend import implementations


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(points, rng):
    x = np.exp(rng.uniform(np.log(1e-3), np.log(50.0), points))
    r = rng.standard_normal(points) * 1.3
    return [
        ("log_kv nu=1.45", lambda k: k.log_kv(1.45, x)),
        ("log_kv nu=25.3", lambda k: k.log_kv(25.3, x)),
        ("kdist_cdf N=3.9", lambda k: k.kdist_cdf(3.9, r)),
        ("kdist_cdf N=200", lambda k: k.kdist_cdf(200.0, r)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    impls = implementations()
    names = sorted(impls)
    rng = np.random.default_rng(0)
    print(f"{args.points} points, best of {args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}{'max rel diff':>14}")
    for label, call in cases(args.points, rng):
        times, outs = [], []
        for n in names:
            t, out = best_time(lambda: call(impls[n]), args.repeat)
            times.append(t)
            outs.append(out)
        speed = f"{times[names.index('python')] / times[names.index('compiled')]:>9.1f}x" \
            if len(names) == 2 else f"{'-':>10}"
        diff = np.max(np.abs(outs[0] - outs[-1]) / np.maximum(np.abs(outs[-1]), 1e-300))
        print(f"{label:<18}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times) + speed + f"{diff:>14.1e}")


if __name__ == "__main__":
    main()
