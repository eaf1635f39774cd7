"""Pure-Python fallback for the hot GA kernels.

This module and the compiled ``_core`` extension implement the same two
functions with the same arithmetic, in the same order, on IEEE doubles
(CPython floats are libm-backed doubles), so both backends produce
bit-identical populations from the same pre-drawn random numbers.  Keep any
change here in lockstep with ``_core.pyx``.
"""

import math


def eval_population(pop, c_up, c_comp, nu, mu, e_node,
                    c_local, e_local, nu0, t_bound, r_bound,
                    out_energy, out_latency, out_reliability,
                    out_violation, out_feasible):
    """Score every chromosome of a population against one scenario.

    ``pop`` is (S, p+1): gene 0 is the local share rho, genes 1..p the raw
    per-node weights.  Metrics are computed at the chromosome's *decoded*
    point (weights scaled to sum to one), which is the allocation a winning
    chromosome turns into.  Per-scenario constants:

    * ``c_up[i]``    seconds of upload per unit of assigned weight
    * ``c_comp[i]``  seconds of compute per unit of assigned weight
    * ``e_node[i]``  joules (cpu + radio) per unit of assigned weight
    * ``c_local`` / ``e_local``  same two for the initiator, per unit rho

    Outputs: energy, makespan, reliability, summed constraint violation
    and a feasibility flag, both for the decoded point: the decoded weights
    satisfy the split coupling exactly by construction, so the operational
    violation is the latency excess plus the reliability shortfall (plus
    any negative genes), and feasibility is just those three checks.
    """
    S, n = pop.shape
    p = n - 1
    rows = pop.tolist()
    cu = c_up.tolist()
    cc = c_comp.tolist()
    nus = nu.tolist()
    mus = mu.tolist()
    en = e_node.tolist()
    for s in range(S):
        x = rows[s]
        rho = x[0]
        u = 1.0 - rho
        viol_neg = 0.0
        for j in range(n):
            if x[j] < 0.0:
                viol_neg -= x[j]
        lam_sum = 0.0
        for i in range(p):
            lam_sum += x[i + 1]
        scale = 1.0 / lam_sum if lam_sum > 0.0 else 0.0
        t_local = rho * c_local
        t_max = t_local
        rel_exp = -nu0 * t_local
        energy = rho * e_local
        for i in range(p):
            w = x[i + 1] * scale * u
            t_up = w * cu[i]
            t_comp = w * cc[i]
            branch = t_up + t_comp
            if branch > t_max:
                t_max = branch
            rel_exp -= nus[i] * t_comp + mus[i] * t_up
            energy += w * en[i]
        rel = math.exp(rel_exp)
        v_t = t_max - t_bound
        if v_t < 0.0:
            v_t = 0.0
        v_r = r_bound - rel
        if v_r < 0.0:
            v_r = 0.0
        out_energy[s] = energy
        out_latency[s] = t_max
        out_reliability[s] = rel
        out_violation[s] = viol_neg + v_t + v_r
        out_feasible[s] = 1 if (viol_neg == 0.0 and t_max <= t_bound
                                and rel >= r_bound) else 0


def next_population(pop, fitness, elite_idx, tour_idx, perm,
                    cross_gate, cross_delta, crossover_prob,
                    mut_gate, mutation_prob, gene_gate, gene_prob,
                    mut_q, mut_bit, mut_exponent, out_pop):
    """One generation step: elitist tournament selection, then arithmetic
    crossover over a shuffled pairing, then non-uniform mutation.

    The elite copies (rows 0..e-1 of the output) pass into the next
    generation untouched; crossover and mutation only act on the tournament
    rows (``perm`` holds a shuffle of e..S-1).  All randomness is pre-drawn
    by the caller (``tour_idx`` pairs, ``perm`` pairing order,
    gates/deltas/q/bit arrays), so the step itself is deterministic and
    backend-independent.  Genes stay in [0, 1].
    """
    S, n = pop.shape
    e = elite_idx.shape[0]
    src = pop.tolist()
    fit = fitness.tolist()
    new = [None] * S
    for k in range(e):
        new[k] = src[elite_idx[k]][:]
    ti = tour_idx.tolist()
    for k in range(S - e):
        i, j = ti[k]
        new[e + k] = src[i][:] if fit[i] <= fit[j] else src[j][:]
    pm = perm.tolist()
    cg = cross_gate.tolist()
    cd = cross_delta.tolist()
    for k in range((S - e) // 2):
        if cg[k] < crossover_prob:
            a = new[pm[2 * k]]
            b = new[pm[2 * k + 1]]
            d = cd[k]
            for l in range(n):
                xa = a[l]
                xb = b[l]
                a[l] = d * xa + (1.0 - d) * xb
                b[l] = d * xb + (1.0 - d) * xa
    mg = mut_gate.tolist()
    gg = gene_gate.tolist()
    mq = mut_q.tolist()
    mb = mut_bit.tolist()
    for s in range(e, S):
        if mg[s] < mutation_prob:
            row = new[s]
            grow = gg[s]
            qrow = mq[s]
            brow = mb[s]
            for l in range(n):
                if grow[l] < gene_prob:
                    x = row[l]
                    step = 1.0 - qrow[l] ** mut_exponent
                    if brow[l] == 0:
                        x = x + (1.0 - x) * step
                    else:
                        x = x - x * step
                    if x < 0.0:
                        x = 0.0
                    elif x > 1.0:
                        x = 1.0
                    row[l] = x
    for s in range(S):
        row = new[s]
        for l in range(n):
            out_pop[s, l] = row[l]
