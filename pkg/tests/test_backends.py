"""The compiled kernels must match the pure-Python kernels bit for bit."""

import numpy as np
import pytest

from dronefog import _backend
from dronefog.model import TaskSpec
from dronefog.solver import GaConfig, solve, _eval_constants

from conftest import build_scenario

needs_native = pytest.mark.skipif(
    "native" not in _backend.available_backends(),
    reason="compiled extension not built")


def random_eval_inputs(rng, S, p):
    pop = rng.random((S, p + 1))
    pop[0, 0] = 1.0          # all-local corner
    pop[1, 1:] = 0.0         # zero weights with rho < 1
    consts = dict(
        c_up=rng.uniform(1e-3, 1.0, p),
        c_comp=rng.uniform(0.1, 5.0, p),
        nu=rng.uniform(0.0, 0.3, p),
        mu=rng.uniform(0.0, 0.3, p),
        e_node=rng.uniform(0.1, 10.0, p),
        c_local=2.5, e_local=4.0, nu0=0.1, t_bound=1.0, r_bound=0.9)
    consts["c_up"][0] = 1e18  # dead link
    return pop, consts


def run_eval(kern, pop, consts):
    S = pop.shape[0]
    out = (np.empty(S), np.empty(S), np.empty(S), np.empty(S),
           np.empty(S, dtype=np.uint8))
    kern.eval_population(pop, consts["c_up"], consts["c_comp"], consts["nu"],
                         consts["mu"], consts["e_node"], consts["c_local"],
                         consts["e_local"], consts["nu0"], consts["t_bound"],
                         consts["r_bound"], *out)
    return out


@needs_native
def test_eval_population_bit_identical():
    native = _backend.get_kernels("native")
    pure = _backend.get_kernels("python")
    rng = np.random.default_rng(0)
    for p in (1, 3, 10):
        pop, consts = random_eval_inputs(rng, 64, p)
        a = run_eval(native, pop, consts)
        b = run_eval(pure, pop, consts)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)


@needs_native
def test_next_population_bit_identical():
    native = _backend.get_kernels("native")
    pure = _backend.get_kernels("python")
    rng = np.random.default_rng(1)
    S, n, elite = 30, 5, 2
    for _ in range(10):
        pop = rng.random((S, n))
        fit = rng.random(S)
        elite_idx = np.argsort(fit, kind="stable")[:elite].astype(np.int64)
        tour = rng.integers(0, S, size=(S - elite, 2), dtype=np.int64)
        perm = rng.permuted(np.arange(elite, S, dtype=np.int64))
        pairs = (S - elite) // 2
        args = (pop, fit, np.ascontiguousarray(elite_idx), tour, perm,
                rng.random(pairs), rng.random(pairs), 0.8,
                rng.random(S), 0.1, rng.random((S, n)), 1.0 / n,
                rng.random((S, n)), rng.integers(0, 2, (S, n), dtype=np.uint8),
                1.7)
        out_a = np.empty_like(pop)
        out_b = np.empty_like(pop)
        native.next_population(*args, out_a)
        pure.next_population(*args, out_b)
        assert np.array_equal(out_a, out_b)


@needs_native
def test_solve_bit_identical_across_backends(channel):
    scn = build_scenario(channel, p=4, f0=0.5e9, nu0=0.05,
                         freqs=[0.3e9, 0.5e9, 0.7e9, 0.9e9],
                         fails=[0.05, 0.02, 0.1, 0.2], link_fails=[0.02] * 4)
    task = TaskSpec(data_size_bits=2.4e6, complexity=237.5,
                    latency_bound_s=1.0, reliability_bound=0.85)
    cfg = GaConfig(generations=50, pop_size=30, rng_seed=11)
    a = solve(scn, task, cfg, backend="native")
    b = solve(scn, task, cfg, backend="python")
    assert np.array_equal(a.chromosome, b.chromosome)
    assert a.metrics == b.metrics
    assert a.best_fitness == b.best_fitness
    assert np.array_equal(a.trace.best_fitness, b.trace.best_fitness)
    assert np.array_equal(a.trace.wor, b.trace.wor)
    assert np.array_equal(a.trace.feasible_count, b.trace.feasible_count)


@needs_native
def test_operator_closure_population_stays_in_bounds(channel):
    # drive a real scenario's constants through many kernel steps and check
    # every gene stays in [0,1] and the population size is preserved
    scn = build_scenario(channel, p=3, f0=0.5e9)
    task = TaskSpec(data_size_bits=2.4e6, complexity=237.5,
                    latency_bound_s=1.0, reliability_bound=0.5)
    consts = _eval_constants(scn, task)
    kern = _backend.get_kernels("native")
    rng = np.random.default_rng(2)
    S, n, elite = 40, 4, 2
    pop = rng.random((S, n))
    for step in range(100):
        fit = rng.random(S)
        elite_idx = np.argsort(fit, kind="stable")[:elite].astype(np.int64)
        tour = rng.integers(0, S, size=(S - elite, 2), dtype=np.int64)
        perm = rng.permuted(np.arange(elite, S, dtype=np.int64))
        pairs = (S - elite) // 2
        out = np.empty_like(pop)
        kern.next_population(pop, fit, np.ascontiguousarray(elite_idx), tour, perm,
                             rng.random(pairs), rng.random(pairs), 0.8,
                             rng.random(S), 0.1, rng.random((S, n)), 1.0 / n,
                             rng.random((S, n)),
                             rng.integers(0, 2, (S, n), dtype=np.uint8),
                             (1.0 - step / 100) * 3.0, out)
        pop = out
        assert pop.shape == (S, n)
        assert np.all((pop >= 0.0) & (pop <= 1.0))
    assert consts.c_comp.shape == (3,)


def test_default_backend_is_reported():
    name = _backend.default_backend()
    assert name in ("native", "python")
    assert _backend.get_kernels(name) is not None
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")
