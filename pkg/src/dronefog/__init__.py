"""Energy-aware task offloading for drone swarms.

The package models a swarm where one drone splits a divisible computing
task between itself, nearby worker drones, and optionally a remote cloud;
solves for the minimum-energy split under latency and reliability bounds
with a penalty-based genetic algorithm; and reproduces the comparison
studies as Monte-Carlo experiments.  Hot kernels run from a compiled
extension when available (see ``active_backend``).
"""

from ._backend import available_backends, default_backend as active_backend
from .baselines import max_min_alloc, min_min_alloc, random_alloc, wrr_alloc
from .harness import (ExperimentResult, ScenarioDistribution, default_channel,
                      default_cloud, default_task, mb_to_bits,
                      run_energy_comparison, run_energy_surface,
                      run_latency_comparison, run_reliability_study,
                      run_solve_one, sample_scenario)
from .model import (Allocation, ChannelModel, CloudSpec, DroneNode, Metrics,
                    Scenario, TaskSpec, cloud_latency, compute_latency,
                    dbm_to_watts, distance, evaluate, link_rates,
                    local_latency, local_only_latency, total_energy,
                    total_latency, total_reliability, uplink_rate,
                    upload_latency)
from .solver import (GaConfig, GaTrace, SolveResult, constraint_violations,
                     crossover, decode, mutate, select, solve, update_worst)

__version__ = "0.1.0"
