"""Penalty-based real-coded genetic algorithm for the offloading problem.

Minimizes swarm energy subject to the latency and reliability bounds.
Chromosomes are (p+1)-gene real vectors in [0,1]: gene 0 is the local share
rho, genes 1..p raw per-node weights.  Every chromosome is scored at its
decoded point (weights scaled to sum to one), which enforces the
split-coupling equality by construction; the bound constraints enter
through an exterior penalty whose factor grows with the generation count,
plus an offset that lifts every infeasible individual above the worst
feasible fitness on record.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import _backend
from .model import Allocation, Metrics, Scenario, TaskSpec, evaluate, link_rates

# Upload seconds per unit weight are clamped here so dead links penalize an
# individual instead of producing inf/NaN fitness.
UPLOAD_SECONDS_CAP = 1e18

# Penalized scores are clamped here so the lift offset stays finite.
SCORE_CAP = 1e15


@dataclass(frozen=True)
class GaConfig:
    """Solver parameters.

    The penalty factor is ``penalty_h0 * (1 + g)`` at generation g (a
    strictly increasing schedule), capped at ``penalty_cap`` per individual.
    ``mutation_exponent`` selects the reading of the non-uniform mutation
    exponent: "product" for (1 - g/G)*b, "power" for (1 - g/G)**b.
    """

    generations: int = 300
    pop_size: int = 100
    crossover_prob: float = 0.8
    mutation_prob: float = 0.1
    mutation_shape: float = 3.0
    worst_init: float = 1e5
    penalty_h0: float = 1e3
    penalty_cap: float = 1e12
    elite_count: int = 2
    rng_seed: int = 0
    mutation_exponent: str = "product"

    def __post_init__(self):
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if not 1 <= self.elite_count < self.pop_size:
            raise ValueError("elite_count must be >= 1 and < pop_size")
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0,1]")
        if not 2.0 <= self.mutation_shape <= 5.0:
            raise ValueError("mutation_shape must be in [2,5]")
        if not self.worst_init > 0:
            raise ValueError("worst_init must be positive")
        if self.mutation_exponent not in ("product", "power"):
            raise ValueError("mutation_exponent must be 'product' or 'power'")


@dataclass
class EvolutionState:
    """Mutable per-run bookkeeping exposed to the fitness machinery."""

    population: np.ndarray
    generation: int = 0
    worst_feasible: float = 1e5
    best_fitness: float = np.inf
    best_solution: Optional[np.ndarray] = None


class GenerationRecord(NamedTuple):
    """Snapshot handed to a solve() observer after each generation's scoring."""

    generation: int
    fitness: np.ndarray
    feasible: np.ndarray
    energy: np.ndarray
    wor: float


@dataclass(frozen=True)
class GaTrace:
    """Per-generation convergence record."""

    generation: np.ndarray
    best_fitness: np.ndarray
    feasible_count: np.ndarray
    wor: np.ndarray


@dataclass(frozen=True)
class SolveResult:
    allocation: Allocation
    metrics: Metrics
    chromosome: np.ndarray
    best_fitness: float
    feasible_found: bool
    trace: Optional[GaTrace] = None


@dataclass(frozen=True)
class _EvalConstants:
    """Per-scenario arrays consumed by the kernels (see _core_py docstring)."""

    c_up: np.ndarray
    c_comp: np.ndarray
    nu: np.ndarray
    mu: np.ndarray
    e_node: np.ndarray
    c_local: float
    e_local: float
    nu0: float
    t_bound: float
    r_bound: float


def _eval_constants(scn: Scenario, task: TaskSpec) -> _EvalConstants:
    p = scn.p
    bits = task.data_size_bits
    cycles = task.total_cycles
    ch = scn.channel
    k = scn.cpu_power_coeff
    sig = scn.cpu_power_exp
    freq = np.array([node.cpu_freq_hz for node in scn.fog_nodes])
    rates = link_rates(scn) if p else np.empty(0)
    c_up = np.full(p, UPLOAD_SECONDS_CAP)
    live = rates > 0.0
    c_up[live] = np.minimum(ch.overhead_ratio * bits / rates[live], UPLOAD_SECONDS_CAP)
    c_comp = cycles / freq if p else np.empty(0)
    e_comp = k * freq ** (sig - 1.0) * cycles if p else np.empty(0)
    e_trans = (ch.tx_power_w + ch.rx_power_w) * c_up
    nu = np.array([node.fail_rate for node in scn.fog_nodes])
    return _EvalConstants(
        c_up=c_up,
        c_comp=c_comp,
        nu=nu,
        mu=np.asarray(scn.per_link_fail, dtype=np.float64),
        e_node=e_comp + e_trans,
        c_local=cycles / scn.initiator.cpu_freq_hz,
        e_local=k * scn.initiator.cpu_freq_hz ** (sig - 1.0) * cycles,
        nu0=scn.initiator.fail_rate,
        t_bound=task.latency_bound_s,
        r_bound=task.reliability_bound,
    )


# ---------------------------------------------------------------------------
# fitness machinery


def constraint_violations(x: np.ndarray, scn: Scenario, task: TaskSpec,
                          cfg: GaConfig = GaConfig()) -> np.ndarray:
    """Per-constraint violation vector of a chromosome (p+4 entries, >= 0).

    Rows 0..p: negative-gene violations; row p+1: split-coupling defect;
    row p+2: latency excess; row p+3: reliability shortfall.  The two bound
    rows are evaluated at the decoded point of the [0,1]-projected genes
    (what the kernels score; identical to the raw genes on the constraint
    manifold, where every near-feasible chromosome lives).
    """
    x = np.asarray(x, dtype=np.float64)
    p = scn.p
    if x.shape != (p + 1,):
        raise ValueError("chromosome length must be p+1")
    rho = float(x[0])
    out = np.empty(p + 4)
    out[:p + 1] = np.maximum(0.0, -x)
    out[p + 1] = abs(rho + float(np.sum(x[1:] * (1.0 - rho))) - 1.0)
    pop1 = np.clip(x, 0.0, 1.0)[None, :]
    _, latency, reliability, _, _ = _score_population(pop1, scn, task, cfg)
    out[p + 2] = max(0.0, float(latency[0]) - task.latency_bound_s)
    out[p + 3] = max(0.0, task.reliability_bound - float(reliability[0]))
    return out


def update_worst(worst_prev: float, feasible_energies: np.ndarray) -> float:
    """Running worst feasible fitness: max of history and this generation."""
    if feasible_energies.size == 0:
        return worst_prev
    return max(worst_prev, float(np.max(feasible_energies)))


def assign_fitness(energy: np.ndarray, violation: np.ndarray,
                   feasible: np.ndarray, h: float, wor: float,
                   penalty_cap: float = GaConfig.penalty_cap):
    """Fitness of one generation: energy if feasible, otherwise energy plus
    the capped penalty plus a lift that pins the best infeasible score to
    ``wor``.  Returns (fitness, lift).

    Consequence: every infeasible fitness >= wor >= every feasible fitness
    in the same generation (wor is updated before this call).
    """
    penalized = np.minimum(energy + np.minimum(h * violation, penalty_cap), SCORE_CAP)
    infeasible = ~feasible
    if infeasible.any():
        lift = wor - float(np.min(penalized[infeasible]))
    else:
        lift = 0.0
    return np.where(feasible, energy, penalized + lift), lift


def fitness(x: np.ndarray, scn: Scenario, task: TaskSpec, g: int,
            state: EvolutionState, cfg: GaConfig = GaConfig()) -> float:
    """Single-chromosome fitness against the rest of ``state.population``.

    Convenience wrapper over the batched machinery (the solver itself works
    on whole generations); ``state`` supplies the population whose infeasible
    minimum defines the lift, and the current worst-feasible record.
    """
    pop = np.vstack([state.population, np.asarray(x, dtype=np.float64)[None, :]])
    energy, _, _, violation, feas = _score_population(pop, scn, task, cfg)
    wor = update_worst(state.worst_feasible, energy[feas])
    h = cfg.penalty_h0 * (1.0 + g)
    fit, _ = assign_fitness(energy, violation, feas, h, wor, cfg.penalty_cap)
    return float(fit[-1])


def _score_population(pop: np.ndarray, scn: Scenario, task: TaskSpec,
                      cfg: GaConfig, kern=None, consts=None, out=None):
    """Kernel-evaluate a population; returns (energy, latency, reliability,
    violation, feasible-bool)."""
    if kern is None:
        kern = _backend.get_kernels()
    if consts is None:
        consts = _eval_constants(scn, task)
    S = pop.shape[0]
    if out is None:
        out = (np.empty(S), np.empty(S), np.empty(S), np.empty(S),
               np.empty(S, dtype=np.uint8))
    energy, latency, reliability, violation, feas8 = out
    kern.eval_population(np.ascontiguousarray(pop, dtype=np.float64),
                         consts.c_up, consts.c_comp, consts.nu, consts.mu,
                         consts.e_node, consts.c_local, consts.e_local,
                         consts.nu0, consts.t_bound, consts.r_bound,
                         energy, latency, reliability, violation, feas8)
    return energy, latency, reliability, violation, feas8.astype(bool)


# ---------------------------------------------------------------------------
# genetic operators (standalone forms; the solve loop runs the fused kernel)


def select(population: np.ndarray, fitnesses: np.ndarray, elite_count: int,
           rng: np.random.Generator) -> np.ndarray:
    """Elitist 2-tournament selection; output size equals input size.

    The ``elite_count`` lowest-fitness individuals are copied unchanged;
    every remaining slot is filled by drawing a uniform pair and keeping the
    lower-fitness one (first wins ties).
    """
    S = population.shape[0]
    order = np.argsort(fitnesses, kind="stable")
    pairs = rng.integers(0, S, size=(S - elite_count, 2))
    winners = np.where(fitnesses[pairs[:, 0]] <= fitnesses[pairs[:, 1]],
                       pairs[:, 0], pairs[:, 1])
    return np.concatenate([population[order[:elite_count]], population[winners]])


def crossover(x1: np.ndarray, x2: np.ndarray, rng: np.random.Generator):
    """Arithmetic crossover: children are the delta-blend of the parents.

    The elementwise parent sum is conserved: c1 + c2 == x1 + x2.
    """
    delta = rng.random()
    return (delta * x1 + (1.0 - delta) * x2,
            delta * x2 + (1.0 - delta) * x1)


def mutate(x: np.ndarray, g: int, G: int, b: float, rng: np.random.Generator,
           per_gene_prob: Optional[float] = None,
           exponent_mode: str = "product") -> np.ndarray:
    """Non-uniform mutation: each gene moves toward 0 or 1 (fair coin) by a
    step that shrinks to zero as g approaches G.  Result stays in [0,1].
    """
    out = np.array(x, dtype=np.float64)
    n = out.size
    if per_gene_prob is None:
        per_gene_prob = 1.0 / n
    ex = _mutation_exponent(g, G, b, exponent_mode)
    for l in range(n):
        if rng.random() < per_gene_prob:
            q = rng.random()
            bit = int(rng.integers(0, 2))
            step = 1.0 - q ** ex
            if bit == 0:
                out[l] = out[l] + (1.0 - out[l]) * step
            else:
                out[l] = out[l] - out[l] * step
    return np.clip(out, 0.0, 1.0)


def _mutation_exponent(g: int, G: int, b: float, mode: str) -> float:
    frac = 1.0 - g / G
    return frac * b if mode == "product" else frac ** b


# ---------------------------------------------------------------------------
# main loop


def solve(scn: Scenario, task: TaskSpec, cfg: GaConfig = GaConfig(),
          backend: Optional[str] = None,
          seed_solutions: Optional[Sequence[np.ndarray]] = None,
          collect_trace: bool = True,
          observer: Optional[Callable[[GenerationRecord], None]] = None) -> SolveResult:
    """Run the GA and return the best allocation found, evaluated exactly.

    The winning chromosome is the lowest-energy solver-feasible individual
    ever seen, or the least-violating individual if none was feasible
    (``feasible_found`` False).  Its weight vector is renormalized to sum to
    one before the final model evaluation, so the returned allocation
    satisfies the split coupling exactly.

    ``seed_solutions`` chromosomes are planted into the initial population
    (warm start); everything else is uniform random from ``cfg.rng_seed``,
    so identical inputs give bit-identical outputs.
    """
    p = scn.p
    if p == 0:
        alloc = Allocation(rho=1.0, lam=np.empty(0))
        metrics = evaluate(scn, task, alloc)
        trace = GaTrace(np.empty(0, dtype=np.int64), np.empty(0), np.empty(0, dtype=np.int64),
                        np.empty(0)) if collect_trace else None
        return SolveResult(allocation=alloc, metrics=metrics,
                           chromosome=np.array([1.0]),
                           best_fitness=metrics.e_total_j,
                           feasible_found=metrics.feasible, trace=trace)

    kern = _backend.get_kernels(backend)
    consts = _eval_constants(scn, task)
    G, S, n = cfg.generations, cfg.pop_size, p + 1
    elite = cfg.elite_count
    rng = np.random.default_rng(cfg.rng_seed)

    pop = rng.random((S, n))
    # All per-generation randomness is drawn up front in a fixed order so the
    # stream is identical no matter which kernel backend executes the steps.
    steps = G - 1  # the population bred in the last generation is never scored
    tour_all = rng.integers(0, S, size=(steps, S - elite, 2), dtype=np.int64)
    perm_all = rng.permuted(np.tile(np.arange(elite, S, dtype=np.int64), (steps, 1)), axis=1) \
        if steps else np.empty((0, S - elite), dtype=np.int64)
    n_pairs = (S - elite) // 2
    cross_gate_all = rng.random((steps, n_pairs))
    cross_delta_all = rng.random((steps, n_pairs))
    mut_gate_all = rng.random((steps, S))
    gene_gate_all = rng.random((steps, S, n))
    mut_q_all = rng.random((steps, S, n))
    mut_bit_all = rng.integers(0, 2, size=(steps, S, n), dtype=np.uint8)

    if seed_solutions:
        for k, sol in enumerate(seed_solutions):
            if k >= S:
                break
            pop[k] = np.clip(np.asarray(sol, dtype=np.float64), 0.0, 1.0)

    scratch = (np.empty(S), np.empty(S), np.empty(S), np.empty(S),
               np.empty(S, dtype=np.uint8))
    next_pop = np.empty_like(pop)
    gene_prob = 1.0 / n

    wor = cfg.worst_init
    best_fitness = np.inf
    best_feasible_energy = np.inf
    best_feasible_chrom = None
    least_viol = (np.inf, np.inf)
    least_viol_chrom = None
    if collect_trace:
        tr_best = np.empty(G)
        tr_feas = np.empty(G, dtype=np.int64)
        tr_wor = np.empty(G)

    for g in range(1, G + 1):
        energy, latency, reliability, violation, feas = _score_population(
            pop, scn, task, cfg, kern=kern, consts=consts, out=scratch)
        wor = update_worst(wor, energy[feas])
        h = cfg.penalty_h0 * (1.0 + g)
        fit, _ = assign_fitness(energy, violation, feas, h, wor, cfg.penalty_cap)

        i_best = int(np.argmin(fit))
        if fit[i_best] < best_fitness:
            best_fitness = float(fit[i_best])
        if feas.any():
            i_feas = int(np.flatnonzero(feas)[np.argmin(energy[feas])])
            if energy[i_feas] < best_feasible_energy:
                best_feasible_energy = float(energy[i_feas])
                best_feasible_chrom = pop[i_feas].copy()
        i_lv = int(np.argmin(violation))
        cand = (float(violation[i_lv]), float(energy[i_lv]))
        if cand < least_viol:
            least_viol = cand
            least_viol_chrom = pop[i_lv].copy()

        if collect_trace:
            tr_best[g - 1] = best_fitness
            tr_feas[g - 1] = int(np.count_nonzero(feas))
            tr_wor[g - 1] = wor
        if observer is not None:
            observer(GenerationRecord(generation=g, fitness=fit.copy(),
                                      feasible=feas.copy(), energy=energy.copy(),
                                      wor=wor))

        if g == G:
            break
        k = g - 1
        elite_idx = np.argsort(fit, kind="stable")[:elite].astype(np.int64)
        kern.next_population(pop, fit, np.ascontiguousarray(elite_idx),
                             tour_all[k], perm_all[k],
                             cross_gate_all[k], cross_delta_all[k],
                             cfg.crossover_prob,
                             mut_gate_all[k], cfg.mutation_prob,
                             gene_gate_all[k], gene_prob,
                             mut_q_all[k], mut_bit_all[k],
                             _mutation_exponent(g, G, cfg.mutation_shape,
                                                cfg.mutation_exponent),
                             next_pop)
        pop, next_pop = next_pop, pop

    feasible_found = best_feasible_chrom is not None
    chrom = best_feasible_chrom if feasible_found else least_viol_chrom
    alloc = decode(chrom)
    metrics = evaluate(scn, task, alloc)
    trace = GaTrace(generation=np.arange(1, G + 1, dtype=np.int64),
                    best_fitness=tr_best, feasible_count=tr_feas,
                    wor=tr_wor) if collect_trace else None
    return SolveResult(allocation=alloc, metrics=metrics, chromosome=chrom,
                       best_fitness=best_fitness,
                       feasible_found=feasible_found, trace=trace)


def decode(chrom: np.ndarray) -> Allocation:
    """Chromosome -> allocation, renormalizing the weights to sum to one.

    Renormalization is skipped when the sum is already within 1e-12 of one,
    so decoding an already-normalized chromosome is exact (idempotent).
    """
    chrom = np.asarray(chrom, dtype=np.float64)
    rho = min(max(float(chrom[0]), 0.0), 1.0)
    lam = np.clip(chrom[1:], 0.0, 1.0)
    total = float(np.sum(lam))
    if total > 0.0 and abs(total - 1.0) > 1e-12:
        lam = lam / total
    return Allocation(rho=rho, lam=lam)


def normalized_chromosome(result: SolveResult) -> np.ndarray:
    """The decoded allocation re-encoded as a chromosome (for warm starts)."""
    return np.concatenate([[result.allocation.rho], result.allocation.lam])
