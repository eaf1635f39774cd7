"""Benchmark the compiled GA kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--pop 100] [--nodes 10] [--repeat 5]

Times the two hot kernels (population scoring and the generation step) and a
full solve through each backend.  Both backends produce bit-identical
results; the numbers here are the price of running without the extension.
"""

import argparse
import time

import numpy as np

from dronefog import _backend
from dronefog.harness import ScenarioDistribution, default_task, sample_scenario
from dronefog.solver import GaConfig, _eval_constants, solve


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(name, scn, task, pop, inner, repeat):
    kern = _backend.get_kernels(name)
    consts = _eval_constants(scn, task)
    S, n = pop.shape
    out = (np.empty(S), np.empty(S), np.empty(S), np.empty(S),
           np.empty(S, dtype=np.uint8))

    def eval_pop():
        for _ in range(inner):
            kern.eval_population(pop, consts.c_up, consts.c_comp, consts.nu,
                                 consts.mu, consts.e_node, consts.c_local,
                                 consts.e_local, consts.nu0, consts.t_bound,
                                 consts.r_bound, *out)

    rng = np.random.default_rng(0)
    elite = 2
    fit = rng.random(S)
    elite_idx = np.argsort(fit, kind="stable")[:elite].astype(np.int64)
    tour = rng.integers(0, S, size=(S - elite, 2), dtype=np.int64)
    perm = rng.permuted(np.arange(elite, S, dtype=np.int64))
    pairs = (S - elite) // 2
    step_args = (pop, fit, np.ascontiguousarray(elite_idx), tour, perm,
                 rng.random(pairs), rng.random(pairs), 0.8,
                 rng.random(S), 0.1, rng.random((S, n)), 1.0 / n,
                 rng.random((S, n)), rng.integers(0, 2, (S, n), dtype=np.uint8),
                 1.5)
    out_pop = np.empty_like(pop)

    def step():
        for _ in range(inner):
            kern.next_population(*step_args, out_pop)

    def full_solve():
        solve(scn, task, GaConfig(rng_seed=0), backend=name, collect_trace=False)

    return (time_call(eval_pop, repeat) / inner,
            time_call(step, repeat) / inner,
            time_call(full_solve, max(1, repeat // 2)))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pop", type=int, default=100)
    parser.add_argument("--nodes", type=int, default=10)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    dist = ScenarioDistribution(p=args.nodes)
    scn = sample_scenario(dist, np.random.default_rng(0))
    task = default_task()
    pop = np.random.default_rng(1).random((args.pop, args.nodes + 1))
    inner = 200

    rows = {}
    for name in _backend.available_backends():
        rows[name] = bench_backend(name, scn, task, pop, inner, args.repeat)

    print(f"population {args.pop} x {args.nodes + 1} genes, "
          f"best of {args.repeat}")
    header = f"{'backend':<10}{'eval_population':>18}{'next_population':>18}{'full solve':>14}"
    print(header)
    print("-" * len(header))
    for name, (ev, st, so) in rows.items():
        print(f"{name:<10}{ev * 1e6:>15.1f} us{st * 1e6:>15.1f} us{so * 1e3:>11.1f} ms")
    if "native" in rows and "python" in rows:
        print("-" * len(header))
        print(f"{'speedup':<10}"
              f"{rows['python'][0] / rows['native'][0]:>16.1f}x"
              f"{rows['python'][1] / rows['native'][1]:>17.1f}x"
              f"{rows['python'][2] / rows['native'][2]:>13.1f}x")


if __name__ == "__main__":
    main()
