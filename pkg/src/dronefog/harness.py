"""Scenario sampling and Monte-Carlo experiment drivers.

Every experiment derives one seed per trial from the master seed by trial
index, so results are identical no matter how trials are split across
workers, and a (distribution, seed, trials) triple fully determines the
output.  Aggregation sums per-trial arrays in trial order.

Mean-value semantics: the constrained solver can fail to find a feasible
split (tight bounds, unlucky nodes); those trials are excluded from its
reliability/energy means but still counted, so the reported
``feasible_fraction`` is the success rate.  The baseline heuristics always
produce an allocation, so their means run over all trials and their
``feasible_fraction`` reports how often that allocation happened to meet
the bounds.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import baselines
from .model import (ChannelModel, CloudSpec, DroneNode, Scenario, TaskSpec,
                    cloud_latency, dbm_to_watts, evaluate, link_rates,
                    local_only_latency)
from .solver import GaConfig, SolveResult, normalized_chromosome, solve

BITS_PER_MB = 8e6


def mb_to_bits(mb: float) -> float:
    return mb * BITS_PER_MB


def default_channel() -> ChannelModel:
    return ChannelModel(bandwidth_hz=1e6, tx_power_w=1.258, rx_power_w=1.181,
                        noise_w=dbm_to_watts(-100.0), path_loss_exp=3.0,
                        max_radius_m=100.0, overhead_ratio=1.0)


def default_cloud() -> CloudSpec:
    return CloudSpec(position=(2000.0, 2000.0, 2000.0), cpu_freq_hz=1e9,
                     bandwidth_hz=2e6, fail_rate=1e-5, link_fail_rate=0.17)


def default_task() -> TaskSpec:
    return TaskSpec(data_size_bits=mb_to_bits(1.0), complexity=237.5,
                    latency_bound_s=0.8, reliability_bound=0.99)


# The architecture-latency study reports how fast each architecture can
# finish the task, so its solver runs against an unattainably tight latency
# bound (and a vacuous reliability bound): the least-violating individual it
# converges to is the fastest split it can find.  The solve is warm-started
# from the equal-finish split, the classic divisible-load optimum.
LATENCY_PROBE_T0_S = 1e-6
LATENCY_PROBE_R0 = 1e-9

ALGORITHMS = ("lrga", "random", "wrr", "maxmin", "minmin")


@dataclass(frozen=True)
class ScenarioDistribution:
    """Random scenario family: node count, parameter ranges, constants.

    Fog nodes are placed uniformly in an axis-aligned cube of edge
    ``placement_cube_m`` centered on the initiator (which sits at the
    origin) and resampled while outside the communication radius.
    """

    p: int = 10
    freq_range_hz: tuple = (0.2e9, 0.9e9)
    fail_range: tuple = (0.001, 0.3)
    link_fail_range: tuple = (0.001, 0.3)
    placement_cube_m: float = 100.0
    channel: ChannelModel = field(default_factory=default_channel)
    cloud: Optional[CloudSpec] = field(default_factory=default_cloud)
    cpu_power_coeff: float = 1.25e-26
    cpu_power_exp: float = 3.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("p must be nonnegative")
        for name in ("freq_range_hz", "fail_range", "link_fail_range"):
            low, high = getattr(self, name)
            if not low <= high:
                raise ValueError(f"{name} must be (low, high) with low <= high")
        if not self.freq_range_hz[0] > 0:
            raise ValueError("frequencies must be positive")
        if self.fail_range[0] < 0 or self.link_fail_range[0] < 0:
            raise ValueError("failure rates must be nonnegative")
        if not self.placement_cube_m > 0:
            raise ValueError("placement_cube_m must be positive")


@dataclass(frozen=True)
class ExperimentResult:
    """CSV-shaped experiment output: one column tuple, one row per record."""

    name: str
    columns: tuple
    rows: tuple
    trials: int
    per_trial: Optional[np.ndarray] = None

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def sample_scenario(dist: ScenarioDistribution, rng: np.random.Generator) -> Scenario:
    """Draw one scenario.  Draw order is fixed (initiator, positions,
    frequencies, failure rates, link failure rates, fading) so a given
    generator state always yields the same scenario."""
    f0 = rng.uniform(*dist.freq_range_hz)
    nu0 = rng.uniform(*dist.fail_range)
    half = dist.placement_cube_m / 2.0
    p = dist.p
    pos = rng.uniform(-half, half, size=(p, 3))
    while True:
        bad = np.linalg.norm(pos, axis=1) > dist.channel.max_radius_m
        if not bad.any():
            break
        pos[bad] = rng.uniform(-half, half, size=(int(bad.sum()), 3))
    freqs = rng.uniform(dist.freq_range_hz[0], dist.freq_range_hz[1], size=p)
    fails = rng.uniform(dist.fail_range[0], dist.fail_range[1], size=p)
    link_fails = rng.uniform(dist.link_fail_range[0], dist.link_fail_range[1], size=p)
    gauss = rng.normal(0.0, math.sqrt(0.5), size=(p, 2))
    fading = np.hypot(gauss[:, 0], gauss[:, 1])
    initiator = DroneNode(id="dr0", position=(0.0, 0.0, 0.0),
                          cpu_freq_hz=f0, fail_rate=nu0)
    nodes = tuple(
        DroneNode(id=f"dr{i + 1}", position=tuple(pos[i]),
                  cpu_freq_hz=freqs[i], fail_rate=fails[i])
        for i in range(p))
    return Scenario(initiator=initiator, fog_nodes=nodes, channel=dist.channel,
                    per_link_fading=fading, per_link_fail=link_fails,
                    cloud=dist.cloud, cpu_power_coeff=dist.cpu_power_coeff,
                    cpu_power_exp=dist.cpu_power_exp)


# ---------------------------------------------------------------------------
# per-trial seeding and the worker pool


def _trial_generators(seed: int, trial: int, count: int):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    return [np.random.default_rng(child) for child in ss.spawn(count)]


def _derived_seed(seed: int, trial: int, *slot: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial, *slot))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _map_trials(worker: Callable, args: tuple, trials: int, workers: int) -> list:
    """Run ``worker(*args, trial)`` for every trial, optionally in a process
    pool; the result list is always in trial order."""
    if workers <= 1:
        return [worker(*args, t) for t in range(trials)]
    fn = functools.partial(worker, *args)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, trials // (workers * 4))
        return list(pool.map(fn, range(trials), chunksize=chunk))


def _ga_for(ga: GaConfig, seed: int, trial: int, *slot: int) -> GaConfig:
    return replace(ga, rng_seed=_derived_seed(seed, trial, *slot))


# ---------------------------------------------------------------------------
# experiment 1: architecture latency comparison


def equal_finish_split(scn: Scenario, task: TaskSpec) -> np.ndarray:
    """Chromosome of the split where every used processor finishes together.

    For a divisible task the makespan-optimal split gives each processor a
    share proportional to its whole-pipeline throughput (upload + compute
    for fog nodes, compute only locally); dead links get nothing.  Used to
    warm-start the latency probe so its result does not hinge on how well
    the evolutionary search equalizes branches on its own.
    """
    ch = scn.channel
    local_tput = scn.initiator.cpu_freq_hz / task.complexity
    rates = link_rates(scn)
    tput = np.zeros(scn.p)
    for i, node in enumerate(scn.fog_nodes):
        if rates[i] > 0.0:
            per_bit = ch.overhead_ratio / rates[i] + task.complexity / node.cpu_freq_hz
            tput[i] = 1.0 / per_bit
    total = local_tput + tput.sum()
    rho = local_tput / total
    lam = tput / tput.sum() if tput.sum() > 0.0 else np.zeros(scn.p)
    return np.concatenate([[rho], lam])


def _latency_trial(dist, d0_bits, task_tmpl, ga, seed, trial):
    (scn_rng,) = _trial_generators(seed, trial, 1)
    scn = sample_scenario(dist, scn_rng)
    out = np.empty((len(d0_bits), 3))
    for di, bits in enumerate(d0_bits):
        task = replace(task_tmpl, data_size_bits=bits,
                       latency_bound_s=LATENCY_PROBE_T0_S,
                       reliability_bound=LATENCY_PROBE_R0)
        res = solve(scn, task, _ga_for(ga, seed, trial, di),
                    seed_solutions=[equal_finish_split(scn, task)],
                    collect_trace=False)
        out[di, 0] = cloud_latency(scn, task)
        out[di, 1] = local_only_latency(scn, task)
        out[di, 2] = res.metrics.t_total_s
    return out


def run_latency_comparison(dist: ScenarioDistribution, d0_sweep_mb: Sequence[float],
                           trials: int, ga: GaConfig = GaConfig(),
                           task: Optional[TaskSpec] = None,
                           seed: Optional[int] = None,
                           workers: int = 1) -> ExperimentResult:
    """Mean cloud / local-only / fog latency per input size.

    The fog number is the makespan of the solver's fastest split (see
    LATENCY_PROBE_T0_S above); all three are averaged over every trial.
    """
    seed = dist.rng_seed if seed is None else seed
    task_tmpl = task if task is not None else default_task()
    d0_bits = [mb_to_bits(mb) for mb in d0_sweep_mb]
    per = np.stack(_map_trials(_latency_trial, (dist, d0_bits, task_tmpl, ga, seed),
                               trials, workers))
    means = per.mean(axis=0)
    rows = tuple((float(mb), float(means[di, 0]), float(means[di, 1]), float(means[di, 2]))
                 for di, mb in enumerate(d0_sweep_mb))
    return ExperimentResult(name="latency", trials=trials,
                            columns=("d0_mb", "cloud_s", "local_s", "fog_s"),
                            rows=rows)


# ---------------------------------------------------------------------------
# experiments 2 and 4: per-algorithm reliability / energy comparison


def _comparison_trial(dist, d0_bits, algorithms, task_tmpl, ga, chunks, seed, trial):
    scn_rng, alloc_rng = _trial_generators(seed, trial, 2)
    scn = sample_scenario(dist, scn_rng)
    out = np.empty((len(d0_bits), len(algorithms), 3))
    for di, bits in enumerate(d0_bits):
        task = replace(task_tmpl, data_size_bits=bits)
        for ai, alg in enumerate(algorithms):
            if alg == "lrga":
                res = solve(scn, task, _ga_for(ga, seed, trial, di), collect_trace=False)
                metrics = res.metrics
            elif alg == "random":
                metrics = evaluate(scn, task, baselines.random_alloc(scn, task, alloc_rng))
            elif alg == "wrr":
                metrics = evaluate(scn, task, baselines.wrr_alloc(scn, task))
            elif alg == "maxmin":
                metrics = evaluate(scn, task, baselines.max_min_alloc(scn, task, chunks))
            elif alg == "minmin":
                metrics = evaluate(scn, task, baselines.min_min_alloc(scn, task, chunks))
            else:
                raise ValueError(f"unknown algorithm {alg!r}")
            out[di, ai] = (metrics.r_total, metrics.e_total_j,
                           1.0 if metrics.feasible else 0.0)
    return out


def _run_comparison(name, metric_index, dist, d0_sweep_mb, algorithms, trials,
                    ga, task, chunks, seed, workers, keep_trials=False):
    seed = dist.rng_seed if seed is None else seed
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {alg!r}")
    task_tmpl = task if task is not None else default_task()
    d0_bits = [mb_to_bits(mb) for mb in d0_sweep_mb]
    per = np.stack(_map_trials(
        _comparison_trial, (dist, d0_bits, tuple(algorithms), task_tmpl, ga, chunks, seed),
        trials, workers))
    rows = []
    for di, mb in enumerate(d0_sweep_mb):
        for ai, alg in enumerate(algorithms):
            values = per[:, di, ai, metric_index]
            feasible = per[:, di, ai, 2] > 0.5
            if alg == "lrga":
                mean = float(values[feasible].mean()) if feasible.any() else math.nan
            else:
                mean = float(values.mean())
            rows.append((float(mb), alg, mean, float(feasible.mean())))
    return ExperimentResult(name=name, trials=trials,
                            columns=("d0_mb", "algorithm", "mean_value",
                                     "feasible_fraction"),
                            rows=tuple(rows),
                            per_trial=per if keep_trials else None)


def run_reliability_study(dist: ScenarioDistribution, d0_sweep_mb: Sequence[float],
                          algorithms: Sequence[str], trials: int,
                          ga: GaConfig = GaConfig(), task: Optional[TaskSpec] = None,
                          chunks: int = 100, seed: Optional[int] = None,
                          workers: int = 1,
                          keep_trials: bool = False) -> ExperimentResult:
    """Mean swarm reliability per algorithm per input size."""
    return _run_comparison("reliability", 0, dist, d0_sweep_mb, algorithms, trials,
                           ga, task, chunks, seed, workers, keep_trials)


def run_energy_comparison(dist: ScenarioDistribution, d0_sweep_mb: Sequence[float],
                          algorithms: Sequence[str], trials: int,
                          ga: GaConfig = GaConfig(), task: Optional[TaskSpec] = None,
                          chunks: int = 100, seed: Optional[int] = None,
                          workers: int = 1,
                          keep_trials: bool = False) -> ExperimentResult:
    """Mean swarm energy per algorithm per input size."""
    return _run_comparison("energy-compare", 1, dist, d0_sweep_mb, algorithms, trials,
                           ga, task, chunks, seed, workers, keep_trials)


# ---------------------------------------------------------------------------
# experiment 3: energy over the (latency bound, reliability bound) grid


def _surface_trial(dist, t0_values, r0_values_desc, task_tmpl, ga, seed, trial):
    (scn_rng,) = _trial_generators(seed, trial, 1)
    scn = sample_scenario(dist, scn_rng)
    n_t, n_r = len(t0_values), len(r0_values_desc)
    out = np.empty((n_t, n_r, 2))
    warm = {}
    # Sweep from tight to loose bounds, planting each cell's solution into
    # its looser neighbors: relaxing a bound keeps the planted solution
    # feasible, so per trial the energy never increases along a relaxation.
    for j in range(n_r):
        for i in range(n_t):
            seeds = []
            if i > 0 and warm.get((i - 1, j)) is not None:
                seeds.append(warm[(i - 1, j)])
            if j > 0 and warm.get((i, j - 1)) is not None:
                seeds.append(warm[(i, j - 1)])
            task = replace(task_tmpl, latency_bound_s=t0_values[i],
                           reliability_bound=r0_values_desc[j])
            res = solve(scn, task, _ga_for(ga, seed, trial, i, j),
                        seed_solutions=seeds, collect_trace=False)
            warm[(i, j)] = normalized_chromosome(res) if res.metrics.feasible else None
            out[i, j] = (res.metrics.e_total_j, 1.0 if res.metrics.feasible else 0.0)
    return out


def run_energy_surface(dist: ScenarioDistribution, t0_sweep_s: Sequence[float],
                       r0_sweep: Sequence[float], trials: int,
                       ga: GaConfig = GaConfig(), task: Optional[TaskSpec] = None,
                       seed: Optional[int] = None, workers: int = 1,
                       keep_trials: bool = False) -> ExperimentResult:
    """Mean solver energy over the grid of latency and reliability bounds.

    Means are over the trials whose solve was feasible at that cell.  With
    ``keep_trials`` the per-trial (energy, feasible) grid comes back too,
    indexed [trial, t0_index_ascending, r0_index_descending].
    """
    seed = dist.rng_seed if seed is None else seed
    task_tmpl = task if task is not None else default_task()
    t0_values = sorted(float(v) for v in t0_sweep_s)
    r0_desc = sorted((float(v) for v in r0_sweep), reverse=True)
    per = np.stack(_map_trials(
        _surface_trial, (dist, t0_values, r0_desc, task_tmpl, ga, seed),
        trials, workers))
    rows = []
    for i, t0 in enumerate(t0_values):
        for j, r0 in enumerate(r0_desc):
            feasible = per[:, i, j, 1] > 0.5
            mean = float(per[feasible, i, j, 0].mean()) if feasible.any() else math.nan
            rows.append((t0, r0, mean))
    return ExperimentResult(name="energy-surface", trials=trials,
                            columns=("t0_s", "r0", "mean_energy_j"),
                            rows=tuple(rows),
                            per_trial=per if keep_trials else None)


# ---------------------------------------------------------------------------
# single solve (CLI's solve-one experiment)


def run_solve_one(dist: ScenarioDistribution, task: Optional[TaskSpec] = None,
                  ga: GaConfig = GaConfig(),
                  seed: Optional[int] = None) -> SolveResult:
    """Sample one scenario and solve it once, with a convergence trace."""
    seed = dist.rng_seed if seed is None else seed
    (scn_rng,) = _trial_generators(seed, 0, 1)
    scn = sample_scenario(dist, scn_rng)
    if task is None:
        task = default_task()
    return solve(scn, task, _ga_for(ga, seed, 0), collect_trace=True)
