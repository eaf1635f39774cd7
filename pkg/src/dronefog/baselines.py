"""Comparison allocation strategies: random, weighted round robin, and
greedy list scheduling (max-min / min-min flavors).

These are allocation heuristics, not constrained solvers: they ignore the
latency and reliability bounds and are judged afterward by the model.  All
of them return a normalized, in-bounds allocation.  The named discrete-task
heuristics are adapted to the divisible task by cutting it into ``chunks``
equal pieces and greedily placing each piece on the processor that finishes
it earliest; with equal pieces the max-min and min-min orderings coincide,
so the two entry points differ in name only.
"""

from __future__ import annotations

import numpy as np

from .model import Allocation, Scenario, TaskSpec, link_rates


def _require_fog_nodes(scn: Scenario):
    if scn.p < 1:
        raise ValueError("baseline allocators need at least one fog node")


def random_alloc(scn: Scenario, task: TaskSpec, rng: np.random.Generator) -> Allocation:
    """Uniform random local share; weights drawn uniform and normalized."""
    _require_fog_nodes(scn)
    rho = float(rng.random())
    lam = rng.random(scn.p)
    return Allocation(rho=rho, lam=lam / lam.sum())


def wrr_alloc(scn: Scenario, task: TaskSpec) -> Allocation:
    """Weighted round robin: shares proportional to CPU frequency."""
    _require_fog_nodes(scn)
    freq = np.array([node.cpu_freq_hz for node in scn.fog_nodes])
    f0 = scn.initiator.cpu_freq_hz
    return Allocation(rho=f0 / (f0 + freq.sum()), lam=freq / freq.sum())


def _unit_costs(scn: Scenario, task: TaskSpec, chunks: int) -> np.ndarray:
    """Completion seconds of one chunk on each processor (local first).

    A chunk is data_size/chunks bits; fog processors pay upload plus
    compute, the initiator pays compute only.  Dead links cost infinity.
    """
    chunk_bits = task.data_size_bits / chunks
    costs = np.empty(scn.p + 1)
    costs[0] = task.complexity * chunk_bits / scn.initiator.cpu_freq_hz
    rates = link_rates(scn)
    for i, node in enumerate(scn.fog_nodes):
        up = (scn.channel.overhead_ratio * chunk_bits / rates[i]
              if rates[i] > 0 else np.inf)
        costs[i + 1] = up + task.complexity * chunk_bits / node.cpu_freq_hz
    return costs


def _greedy_chunks(scn: Scenario, task: TaskSpec, chunks: int) -> Allocation:
    if chunks < scn.p:
        raise ValueError("chunks must be >= the number of fog nodes")
    _require_fog_nodes(scn)
    costs = _unit_costs(scn, task, chunks)
    counts = np.zeros(scn.p + 1, dtype=np.int64)
    for _ in range(chunks):
        # np.argmin keeps the lowest index on ties, so this is deterministic
        counts[np.argmin((counts + 1) * costs)] += 1
    rho = counts[0] / chunks
    offloaded = chunks - counts[0]
    if offloaded == 0:
        return Allocation(rho=1.0, lam=np.zeros(scn.p))
    return Allocation(rho=rho, lam=counts[1:] / offloaded)


def max_min_alloc(scn: Scenario, task: TaskSpec, chunks: int = 100) -> Allocation:
    """Max-min list scheduling over equal chunks (see module docstring)."""
    return _greedy_chunks(scn, task, chunks)


def min_min_alloc(scn: Scenario, task: TaskSpec, chunks: int = 100) -> Allocation:
    """Min-min list scheduling over equal chunks (see module docstring)."""
    return _greedy_chunks(scn, task, chunks)
