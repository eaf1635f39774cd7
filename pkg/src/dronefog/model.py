"""System model for task offloading inside a drone swarm.

One initiator drone holds a divisible computing task and may spread it over
nearby worker drones ("fog nodes") and/or keep a share local.  This module
evaluates a given split: channel rates, per-branch latencies, survival
probability of the whole swarm during execution, and total energy spent.
All quantities are SI (bits, Hz, seconds, watts, joules, meters) and every
function here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

# Path loss diverges as distance -> 0; distances are clamped to this floor
# (meters) before the loss exponent is applied.
MIN_PATH_DISTANCE_M = 1.0

# Absolute tolerance on the coupling constraint rho + sum(lambda)*(1-rho) = 1
# used by the feasibility verdict.
NORMALIZATION_TOL = 1e-9

# CPU power model: power = coeff * f**exponent (watts at f cycles/s).
DEFAULT_CPU_POWER_COEFF = 1.25e-26
DEFAULT_CPU_POWER_EXP = 3.0

Position = Sequence[float]


def dbm_to_watts(dbm: float) -> float:
    """Convert a dBm power level to linear watts."""
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class TaskSpec:
    """A divisible computing task with latency and reliability requirements.

    ``complexity`` is CPU cycles per input bit, so the task needs
    ``complexity * data_size_bits`` cycles in total.
    """

    data_size_bits: float
    complexity: float
    latency_bound_s: float
    reliability_bound: float

    def __post_init__(self):
        if not self.data_size_bits > 0:
            raise ValueError("data_size_bits must be positive")
        if not self.complexity > 0:
            raise ValueError("complexity must be positive")
        if not self.latency_bound_s > 0:
            raise ValueError("latency_bound_s must be positive")
        if not 0.0 < self.reliability_bound <= 1.0:
            raise ValueError("reliability_bound must be in (0, 1]")
        if not math.isfinite(self.complexity * self.data_size_bits):
            raise ValueError("total cycle count overflows")

    @property
    def total_cycles(self) -> float:
        return self.complexity * self.data_size_bits


@dataclass(frozen=True)
class DroneNode:
    """One drone: position, CPU speed and Poisson failure rate."""

    id: str
    position: tuple
    cpu_freq_hz: float
    fail_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        if len(self.position) != 3:
            raise ValueError("position must have three coordinates")
        if not self.cpu_freq_hz > 0:
            raise ValueError("cpu_freq_hz must be positive")
        if self.fail_rate < 0:
            raise ValueError("fail_rate must be nonnegative")


@dataclass(frozen=True)
class ChannelModel:
    """Uplink radio parameters shared by the initiator's links.

    ``noise_w`` is the AWGN power in linear watts.  ``fading_gain`` and
    ``link_fail_rate`` are per-link defaults; a scenario may override them
    with per-link vectors.
    """

    bandwidth_hz: float
    tx_power_w: float
    rx_power_w: float
    noise_w: float
    path_loss_exp: float
    max_radius_m: float
    fading_gain: float = 1.0
    overhead_ratio: float = 1.0
    link_fail_rate: float = 0.0

    def __post_init__(self):
        for name in ("bandwidth_hz", "tx_power_w", "rx_power_w", "noise_w",
                     "max_radius_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 2.0 <= self.path_loss_exp <= 5.0:
            raise ValueError("path_loss_exp must be in [2,5]")
        if self.overhead_ratio < 1.0:
            raise ValueError("overhead_ratio must be >= 1")
        if self.fading_gain < 0 or self.link_fail_rate < 0:
            raise ValueError("fading_gain and link_fail_rate must be nonnegative")


@dataclass(frozen=True)
class CloudSpec:
    """Remote cloud endpoint used by the architecture comparison."""

    position: tuple
    cpu_freq_hz: float
    bandwidth_hz: float
    fail_rate: float = 0.0
    link_fail_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        if not self.cpu_freq_hz > 0 or not self.bandwidth_hz > 0:
            raise ValueError("cloud cpu_freq_hz and bandwidth_hz must be positive")
        if self.fail_rate < 0 or self.link_fail_rate < 0:
            raise ValueError("cloud failure rates must be nonnegative")


@dataclass(frozen=True)
class Allocation:
    """A task split: local share ``rho`` plus per-fog-node fractions ``lam``.

    Node i receives the fraction ``lam[i] * (1 - rho)`` of the task.  A
    *normalized* allocation has sum(lam) == 1 (within NORMALIZATION_TOL), in
    which case the shares add up to the whole task automatically.
    """

    rho: float
    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=np.float64)
        object.__setattr__(self, "lam", lam)
        lam.setflags(write=False)
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must be in [0,1]")
        if lam.ndim != 1:
            raise ValueError("lam must be a 1-d vector")
        if lam.size and (lam.min() < 0.0 or lam.max() > 1.0):
            raise ValueError("every lambda must be in [0,1]")

    @property
    def p(self) -> int:
        return self.lam.size

    def coupling_defect(self) -> float:
        """|rho + sum(lam)*(1-rho) - 1|: distance from the split constraint."""
        return abs(self.rho + float(np.sum(self.lam * (1.0 - self.rho))) - 1.0)

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        return self.coupling_defect() <= tol


@dataclass(frozen=True)
class Metrics:
    """Evaluation of one allocation: time, survival probability, energy."""

    t_total_s: float
    r_total: float
    e_total_j: float
    feasible: bool


@dataclass(frozen=True)
class Scenario:
    """An initiator drone, its fog nodes, the channel, and an optional cloud.

    ``per_link_fading`` / ``per_link_fail`` carry one realization per fog
    node; if omitted they are filled from the channel's scalar defaults.
    Construction rejects fog nodes outside the communication radius.
    Instances are immutable and safe to share across threads.
    """

    initiator: DroneNode
    fog_nodes: tuple
    channel: ChannelModel
    per_link_fading: Optional[np.ndarray] = None
    per_link_fail: Optional[np.ndarray] = None
    cloud: Optional[CloudSpec] = None
    cpu_power_coeff: float = DEFAULT_CPU_POWER_COEFF
    cpu_power_exp: float = DEFAULT_CPU_POWER_EXP

    def __post_init__(self):
        object.__setattr__(self, "fog_nodes", tuple(self.fog_nodes))
        p = len(self.fog_nodes)
        fading = self.per_link_fading
        if fading is None:
            fading = np.full(p, self.channel.fading_gain)
        fading = np.asarray(fading, dtype=np.float64)
        link_fail = self.per_link_fail
        if link_fail is None:
            link_fail = np.full(p, self.channel.link_fail_rate)
        link_fail = np.asarray(link_fail, dtype=np.float64)
        if fading.shape != (p,) or link_fail.shape != (p,):
            raise ValueError("per-link vectors must have one entry per fog node")
        if (fading < 0).any() or (link_fail < 0).any():
            raise ValueError("per-link fading and failure rates must be nonnegative")
        fading.setflags(write=False)
        link_fail.setflags(write=False)
        object.__setattr__(self, "per_link_fading", fading)
        object.__setattr__(self, "per_link_fail", link_fail)
        if not self.cpu_power_coeff > 0:
            raise ValueError("cpu_power_coeff must be positive")
        if self.cpu_power_exp < 2.0:
            raise ValueError("cpu_power_exp must be >= 2")
        for node in self.fog_nodes:
            d = distance(self.initiator.position, node.position)
            if d > self.channel.max_radius_m:
                raise ValueError(
                    f"fog node {node.id!r} lies {d:.1f} m from the initiator, "
                    f"beyond the {self.channel.max_radius_m:.1f} m radius")

    @property
    def p(self) -> int:
        return len(self.fog_nodes)


# ---------------------------------------------------------------------------
# elementary operations


def distance(a: Position, b: Position) -> float:
    """Euclidean distance between two points (meters)."""
    return math.dist(a, b)


def uplink_rate(channel: ChannelModel, dist_m: float, fading: float) -> float:
    """Shannon uplink rate (bits/s) over a path-loss + flat-fading link.

    The distance is clamped to MIN_PATH_DISTANCE_M before the loss exponent
    is applied, so coincident drones do not blow up the SNR.
    """
    if not dist_m > 0:
        raise ValueError("distance must be positive")
    d = max(dist_m, MIN_PATH_DISTANCE_M)
    snr = channel.tx_power_w * d ** -channel.path_loss_exp * fading / channel.noise_w
    return channel.bandwidth_hz * math.log2(1.0 + snr)


def local_latency(task: TaskSpec, f0_hz: float, rho: float) -> float:
    """Seconds for the initiator to process its local share rho."""
    return rho * task.complexity * task.data_size_bits / f0_hz


def upload_latency(task: TaskSpec, channel: ChannelModel, rate_bps: float,
                   rho: float, lambda_i: float) -> float:
    """Seconds to push node i's share over the uplink (incl. overhead)."""
    if not rate_bps > 0:
        raise ValueError("uplink rate must be positive")
    return channel.overhead_ratio * lambda_i * (1.0 - rho) * task.data_size_bits / rate_bps


def compute_latency(task: TaskSpec, f_i_hz: float, rho: float, lambda_i: float) -> float:
    """Seconds for fog node i to process its share."""
    return task.complexity * lambda_i * (1.0 - rho) * task.data_size_bits / f_i_hz


def link_rates(scn: Scenario) -> np.ndarray:
    """Uplink rate (bits/s) from the initiator to each fog node."""
    out = np.empty(scn.p)
    for i, node in enumerate(scn.fog_nodes):
        d = distance(scn.initiator.position, node.position)
        out[i] = uplink_rate(scn.channel, d, float(scn.per_link_fading[i]))
    return out


# ---------------------------------------------------------------------------
# whole-allocation evaluation


def _branch_times(scn: Scenario, task: TaskSpec, alloc: Allocation):
    """Per-branch (t_local, t_up[], t_comp[]) for an allocation.

    A share of zero bits costs zero time regardless of the link; a dead link
    (rate 0) with a positive share costs infinite upload time.
    """
    if alloc.p != scn.p:
        raise ValueError("allocation length does not match the fog node count")
    rho = alloc.rho
    t_loc = local_latency(task, scn.initiator.cpu_freq_hz, rho)
    rates = link_rates(scn)
    t_up = np.empty(scn.p)
    t_comp = np.empty(scn.p)
    for i, node in enumerate(scn.fog_nodes):
        lam_i = float(alloc.lam[i])
        t_comp[i] = compute_latency(task, node.cpu_freq_hz, rho, lam_i)
        if lam_i * (1.0 - rho) == 0.0:
            t_up[i] = 0.0
        elif rates[i] <= 0.0:
            t_up[i] = math.inf
        else:
            t_up[i] = upload_latency(task, scn.channel, float(rates[i]), rho, lam_i)
    return t_loc, t_up, t_comp


def total_latency(scn: Scenario, task: TaskSpec, alloc: Allocation) -> float:
    """Makespan: the slowest of the local branch and every upload+compute branch."""
    t_loc, t_up, t_comp = _branch_times(scn, task, alloc)
    if scn.p == 0:
        return t_loc
    return max(t_loc, float(np.max(t_up + t_comp)))


def total_reliability(scn: Scenario, task: TaskSpec, alloc: Allocation) -> float:
    """Probability that every involved drone and link survives its busy time.

    Exponential (Poisson-failure) survival per processor over its compute
    time and per link over its transfer time, multiplied across the swarm.
    """
    t_loc, t_up, t_comp = _branch_times(scn, task, alloc)
    exponent = -scn.initiator.fail_rate * t_loc
    for i, node in enumerate(scn.fog_nodes):
        exponent -= node.fail_rate * t_comp[i] + float(scn.per_link_fail[i]) * t_up[i]
    return math.exp(exponent)


def total_energy(scn: Scenario, task: TaskSpec, alloc: Allocation) -> float:
    """Joules spent by the swarm: CPU energy everywhere plus radio energy.

    CPU power is coeff * f**exponent; each upload charges the sender's
    transmit power and the receiver's receive power for the transfer time.
    """
    t_loc, t_up, t_comp = _branch_times(scn, task, alloc)
    k = scn.cpu_power_coeff
    sig = scn.cpu_power_exp
    energy = k * scn.initiator.cpu_freq_hz ** sig * t_loc
    radio_w = scn.channel.tx_power_w + scn.channel.rx_power_w
    for i, node in enumerate(scn.fog_nodes):
        energy += k * node.cpu_freq_hz ** sig * t_comp[i]
        energy += radio_w * t_up[i]
    return energy


def evaluate(scn: Scenario, task: TaskSpec, alloc: Allocation) -> Metrics:
    """Full metrics plus the feasibility verdict for one allocation.

    Feasible means: latency and reliability bounds met, all shares
    nonnegative, and the split constraint rho + sum(lam)*(1-rho) = 1 holds
    within NORMALIZATION_TOL.
    """
    t = total_latency(scn, task, alloc)
    r = total_reliability(scn, task, alloc)
    e = total_energy(scn, task, alloc)
    nonneg = alloc.rho >= 0.0 and (alloc.p == 0 or float(alloc.lam.min()) >= 0.0)
    feasible = (t <= task.latency_bound_s
                and r >= task.reliability_bound
                and nonneg
                and alloc.coupling_defect() <= NORMALIZATION_TOL)
    return Metrics(t_total_s=t, r_total=r, e_total_j=e, feasible=feasible)


def cloud_latency(scn: Scenario, task: TaskSpec) -> float:
    """Seconds to ship the whole task to the cloud and compute it there.

    Single hop at the cloud bandwidth over the cloud distance with unit
    fading, then computation at the cloud CPU frequency; no partitioning.
    """
    if scn.cloud is None:
        raise ValueError("scenario has no cloud spec")
    ch = scn.channel
    d = distance(scn.initiator.position, scn.cloud.position)
    d = max(d, MIN_PATH_DISTANCE_M)
    snr = ch.tx_power_w * d ** -ch.path_loss_exp / ch.noise_w
    rate = scn.cloud.bandwidth_hz * math.log2(1.0 + snr)
    return (ch.overhead_ratio * task.data_size_bits / rate
            + task.total_cycles / scn.cloud.cpu_freq_hz)


def local_only_latency(scn: Scenario, task: TaskSpec) -> float:
    """Seconds to process the whole task on the initiator (rho = 1)."""
    return local_latency(task, scn.initiator.cpu_freq_hz, 1.0)
