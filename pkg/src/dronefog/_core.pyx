# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled GA kernels.

Mirror of ``_core_py`` (same arithmetic, same order, libm math) compiled
with -ffp-contract=off, so both backends are bit-identical.  Keep any
change here in lockstep with ``_core_py.py``.
"""

from libc.math cimport exp, pow


def eval_population(const double[:, ::1] pop,
                    const double[::1] c_up, const double[::1] c_comp,
                    const double[::1] nu, const double[::1] mu, const double[::1] e_node,
                    double c_local, double e_local, double nu0,
                    double t_bound, double r_bound,
                    double[::1] out_energy, double[::1] out_latency,
                    double[::1] out_reliability, double[::1] out_violation,
                    unsigned char[::1] out_feasible):
    """Score every chromosome of a population; see ``_core_py`` for units."""
    cdef Py_ssize_t S = pop.shape[0]
    cdef Py_ssize_t n = pop.shape[1]
    cdef Py_ssize_t p = n - 1
    cdef Py_ssize_t s, i, j
    cdef double rho, u, viol_neg, t_local, t_max, rel_exp, energy
    cdef double lam_sum, scale, w, t_up, t_comp, branch, rel, v_t, v_r
    with nogil:
        for s in range(S):
            rho = pop[s, 0]
            u = 1.0 - rho
            viol_neg = 0.0
            for j in range(n):
                if pop[s, j] < 0.0:
                    viol_neg -= pop[s, j]
            lam_sum = 0.0
            for i in range(p):
                lam_sum += pop[s, i + 1]
            scale = 1.0 / lam_sum if lam_sum > 0.0 else 0.0
            t_local = rho * c_local
            t_max = t_local
            rel_exp = -nu0 * t_local
            energy = rho * e_local
            for i in range(p):
                w = pop[s, i + 1] * scale * u
                t_up = w * c_up[i]
                t_comp = w * c_comp[i]
                branch = t_up + t_comp
                if branch > t_max:
                    t_max = branch
                rel_exp -= nu[i] * t_comp + mu[i] * t_up
                energy += w * e_node[i]
            rel = exp(rel_exp)
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


def next_population(const double[:, ::1] pop, const double[::1] fitness,
                    const long[::1] elite_idx, const long[:, ::1] tour_idx, const long[::1] perm,
                    const double[::1] cross_gate, const double[::1] cross_delta,
                    double crossover_prob,
                    const double[::1] mut_gate, double mutation_prob,
                    const double[:, ::1] gene_gate, double gene_prob,
                    const double[:, ::1] mut_q, const unsigned char[:, ::1] mut_bit,
                    double mut_exponent,
                    double[:, ::1] out_pop):
    """One generation step on pre-drawn randomness; see ``_core_py``.

    Elite rows pass through untouched; ``perm`` shuffles only e..S-1.
    """
    cdef Py_ssize_t S = pop.shape[0]
    cdef Py_ssize_t n = pop.shape[1]
    cdef Py_ssize_t e = elite_idx.shape[0]
    cdef Py_ssize_t k, s, l
    cdef long i, j, a, b
    cdef double d, xa, xb, x, step
    with nogil:
        for k in range(e):
            i = elite_idx[k]
            for l in range(n):
                out_pop[k, l] = pop[i, l]
        for k in range(S - e):
            i = tour_idx[k, 0]
            j = tour_idx[k, 1]
            if fitness[i] <= fitness[j]:
                for l in range(n):
                    out_pop[e + k, l] = pop[i, l]
            else:
                for l in range(n):
                    out_pop[e + k, l] = pop[j, l]
        for k in range((S - e) // 2):
            if cross_gate[k] < crossover_prob:
                a = perm[2 * k]
                b = perm[2 * k + 1]
                d = cross_delta[k]
                for l in range(n):
                    xa = out_pop[a, l]
                    xb = out_pop[b, l]
                    out_pop[a, l] = d * xa + (1.0 - d) * xb
                    out_pop[b, l] = d * xb + (1.0 - d) * xa
        for s in range(e, S):
            if mut_gate[s] < mutation_prob:
                for l in range(n):
                    if gene_gate[s, l] < gene_prob:
                        x = out_pop[s, l]
                        step = 1.0 - pow(mut_q[s, l], mut_exponent)
                        if mut_bit[s, l] == 0:
                            x = x + (1.0 - x) * step
                        else:
                            x = x - x * step
                        if x < 0.0:
                            x = 0.0
                        elif x > 1.0:
                            x = 1.0
                        out_pop[s, l] = x
