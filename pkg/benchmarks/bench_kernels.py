"""Time the compiled and pure-Python round loops on the same workloads.

    python3 benchmarks/bench_kernels.py [--T 5000] [--repeat 3]

Each workload runs once per backend first to check that both produce the
same bits; then the best of ``--repeat`` timings is reported.
"""

import argparse
import time

import numpy as np

from dynomd import environment as E
from dynomd import game as G
from dynomd import kernels
from dynomd.aomd import aomd_run
from dynomd.predictor import SmoothBatchGradient

FUNCS = ("aomd_loop", "game_loop", "selfplay", "player_step", "doubling_fires")


def use(backend):
    mod = kernels.available_backends()[backend]
    for f in FUNCS:
        setattr(kernels, f, getattr(mod, f))


def workloads(T):
    sims = E.make_random_linear(T, 10, 1)
    ball = E.make_drifting_minimizer(T, 5, 0.01, 2)
    batches = E.make_smooth_batches(10, T // 10, E.batch_centers(10, 3, 3))
    sched = G.random_schedule(T, 3, 3, 5, seed=4)
    A = np.random.default_rng(5).uniform(-1, 1, (4, 4))
    return {
        f"aomd simplex d=10 T={T}": lambda: aomd_run(sims).x,
        f"aomd ball d=5 T={T}": lambda: aomd_run(ball).x,
        f"aomd smooth-batch T={T}": lambda: aomd_run(batches, SmoothBatchGradient()).x,
        f"honest game 3x3 T={T}": lambda: G.run_honest_game(sched).x,
        f"selfplay 4x4 {T} iters": lambda: kernels.selfplay(A, np.full(4, .25), np.full(4, .25),
                                                           np.zeros(4), np.zeros(4), T, 0.1)[0],
    }


def best_of(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, default=5000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = list(kernels.available_backends())
    if "cython" not in backends:
        print("compiled kernels are not built; only the Python backend is available")
    print(f"{'workload':32s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in workloads(args.T).items():
        times, bits = [], []
        for b in backends:
            use(b)
            bits.append(np.asarray(fn()).tobytes())
            times.append(best_of(fn, args.repeat))
        if len(set(bits)) != 1:
            raise SystemExit(f"{name}: backends disagree")
        row = f"{name:32s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
