"""Command-line entry point: flat-text config, experiment dispatch, CSV output.

Config files are ``key = value`` lines with ``#`` comments; unknown keys are
rejected and every missing key takes its default.  Each run writes one CSV
per experiment plus ``manifest.cfg`` holding every resolved parameter — the
manifest alone is a valid config that reproduces the run byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .harness import (ALGORITHMS, LATENCY_PROBE_R0, LATENCY_PROBE_T0_S,
                      ExperimentResult, ScenarioDistribution, mb_to_bits,
                      run_energy_comparison, run_energy_surface,
                      run_latency_comparison, run_reliability_study,
                      run_solve_one)
from .model import ChannelModel, CloudSpec, TaskSpec, dbm_to_watts
from .solver import GaConfig

EXPERIMENTS = ("latency", "reliability", "energy-surface", "energy-compare",
               "solve-one")


class ConfigError(ValueError):
    """Invalid run configuration (bad file, key, or value)."""


@dataclass(frozen=True)
class RunConfig:
    """Every run parameter, flat, mirroring the config-file keys."""

    experiment: str = ""
    seed: int = 0
    trials: int = 3000
    out_dir: str = "out"
    trace: bool = False
    workers: int = 1
    # scenario distribution
    p: int = 10
    freq_min_hz: float = 0.2e9
    freq_max_hz: float = 0.9e9
    fail_min: float = 0.001
    fail_max: float = 0.3
    link_fail_min: float = 0.001
    link_fail_max: float = 0.3
    placement_cube_m: float = 100.0
    bandwidth_hz: float = 1e6
    tx_power_w: float = 1.258
    rx_power_w: float = 1.181
    noise_w: float = dbm_to_watts(-100.0)
    path_loss_exp: float = 3.0
    overhead_ratio: float = 1.0
    max_radius_m: float = 100.0
    cpu_power_coeff: float = 1.25e-26
    cpu_power_exp: float = 3.0
    cloud_freq_hz: float = 1e9
    cloud_bandwidth_hz: float = 2e6
    cloud_fail_rate: float = 1e-5
    cloud_link_fail_rate: float = 0.17
    cloud_x_m: float = 2000.0
    cloud_y_m: float = 2000.0
    cloud_z_m: float = 2000.0
    # task
    d0_mb: float = 1.0
    complexity: float = 237.5
    t0_s: float = 0.8
    r0: float = 0.99
    # sweeps
    d0_sweep_mb: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    t0_sweep_s: tuple = (2.0, 2.1, 2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8, 2.9)
    r0_sweep: tuple = (0.90, 0.91, 0.92, 0.93, 0.94, 0.95, 0.96, 0.97, 0.98, 0.99)
    algorithms: tuple = ALGORITHMS
    chunks: int = 100
    # genetic algorithm
    generations: int = 300
    pop_size: int = 100
    crossover_prob: float = 0.8
    mutation_prob: float = 0.1
    mutation_shape: float = 3.0
    worst_init: float = 1e5
    penalty_h0: float = 1e3
    penalty_cap: float = 1e12
    elite_count: int = 2
    mutation_exponent: str = "product"

    # --- builders -----------------------------------------------------

    def channel(self) -> ChannelModel:
        return ChannelModel(bandwidth_hz=self.bandwidth_hz,
                            tx_power_w=self.tx_power_w, rx_power_w=self.rx_power_w,
                            noise_w=self.noise_w, path_loss_exp=self.path_loss_exp,
                            max_radius_m=self.max_radius_m,
                            overhead_ratio=self.overhead_ratio)

    def cloud(self) -> CloudSpec:
        return CloudSpec(position=(self.cloud_x_m, self.cloud_y_m, self.cloud_z_m),
                         cpu_freq_hz=self.cloud_freq_hz,
                         bandwidth_hz=self.cloud_bandwidth_hz,
                         fail_rate=self.cloud_fail_rate,
                         link_fail_rate=self.cloud_link_fail_rate)

    def distribution(self) -> ScenarioDistribution:
        return ScenarioDistribution(
            p=self.p, freq_range_hz=(self.freq_min_hz, self.freq_max_hz),
            fail_range=(self.fail_min, self.fail_max),
            link_fail_range=(self.link_fail_min, self.link_fail_max),
            placement_cube_m=self.placement_cube_m, channel=self.channel(),
            cloud=self.cloud(), cpu_power_coeff=self.cpu_power_coeff,
            cpu_power_exp=self.cpu_power_exp, rng_seed=self.seed)

    def task(self) -> TaskSpec:
        return TaskSpec(data_size_bits=mb_to_bits(self.d0_mb),
                        complexity=self.complexity, latency_bound_s=self.t0_s,
                        reliability_bound=self.r0)

    def ga(self) -> GaConfig:
        return GaConfig(generations=self.generations, pop_size=self.pop_size,
                        crossover_prob=self.crossover_prob,
                        mutation_prob=self.mutation_prob,
                        mutation_shape=self.mutation_shape,
                        worst_init=self.worst_init, penalty_h0=self.penalty_h0,
                        penalty_cap=self.penalty_cap, elite_count=self.elite_count,
                        rng_seed=self.seed,
                        mutation_exponent=self.mutation_exponent)


# --- config file parsing ---------------------------------------------------

def _parse_bool(text: str) -> bool:
    if text.lower() in ("true", "1", "yes"):
        return True
    if text.lower() in ("false", "0", "no"):
        return False
    raise ValueError("expected true/false")


def _parse_float_list(text: str) -> tuple:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_str_list(text: str) -> tuple:
    return tuple(part.strip() for part in text.split(",") if part.strip())


_INT_KEYS = {"seed", "trials", "workers", "p", "chunks", "generations",
             "pop_size", "elite_count"}
_FLOAT_LIST_KEYS = {"d0_sweep_mb", "t0_sweep_s", "r0_sweep"}
_STR_KEYS = {"experiment", "out_dir", "mutation_exponent"}
_BOOL_KEYS = {"trace"}


def _cast(key: str, text: str):
    if key in _INT_KEYS:
        return int(text)
    if key in _FLOAT_LIST_KEYS:
        return _parse_float_list(text)
    if key == "algorithms":
        return _parse_str_list(text)
    if key in _STR_KEYS:
        return text
    if key in _BOOL_KEYS:
        return _parse_bool(text)
    return float(text)


def _check_ranges(cfg: RunConfig):
    if cfg.experiment and cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}")
    if not 2.0 <= cfg.path_loss_exp <= 5.0:
        raise ConfigError("path_loss_exp must be in [2,5]")
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.p < 0:
        raise ConfigError("p must be nonnegative")
    if not 0.0 < cfg.r0 <= 1.0:
        raise ConfigError("r0 must be in (0,1]")
    for key in ("d0_mb", "t0_s", "bandwidth_hz", "tx_power_w", "rx_power_w",
                "noise_w", "complexity", "placement_cube_m", "max_radius_m"):
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"{key} must be positive")
    if cfg.overhead_ratio < 1.0:
        raise ConfigError("overhead_ratio must be >= 1")
    if not cfg.freq_min_hz <= cfg.freq_max_hz:
        raise ConfigError("freq_min_hz must be <= freq_max_hz")
    if not cfg.fail_min <= cfg.fail_max:
        raise ConfigError("fail_min must be <= fail_max")
    if not cfg.link_fail_min <= cfg.link_fail_max:
        raise ConfigError("link_fail_min must be <= link_fail_max")
    for alg in cfg.algorithms:
        if alg not in ALGORITHMS:
            raise ConfigError(f"algorithms entries must be among {', '.join(ALGORITHMS)}")
    try:
        cfg.ga()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


_KEYS = tuple(f.name for f in fields(RunConfig))


def parse_config(path) -> RunConfig:
    """Parse a ``key = value`` config file into a RunConfig."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    noise_dbm: Optional[float] = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value' on line {lineno}: {raw.strip()!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key == "noise_dbm":
            if "noise_w" in values:
                raise ConfigError("noise_w and noise_dbm are mutually exclusive")
            try:
                noise_dbm = float(text)
            except ValueError:
                raise ConfigError(f"noise_dbm: invalid value {text!r} (line {lineno})") from None
            continue
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r} (line {lineno})")
        if key in values:
            raise ConfigError(f"duplicate config key {key!r} (line {lineno})")
        try:
            values[key] = _cast(key, text)
        except ValueError:
            raise ConfigError(f"{key}: invalid value {text!r} (line {lineno})") from None
    if noise_dbm is not None:
        if "noise_w" in values:
            raise ConfigError("noise_w and noise_dbm are mutually exclusive")
        values["noise_w"] = dbm_to_watts(noise_dbm)
    cfg = replace(RunConfig(), **values)
    _check_ranges(cfg)
    return cfg


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical config text: every key, fixed order, full float precision."""
    lines = ["# dronefog run configuration (resolved)"]
    for name in _KEYS:
        lines.append(f"{name} = {_format_value(getattr(cfg, name))}")
    return "\n".join(lines) + "\n"


# --- CSV output ------------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _write_result(out_dir: Path, filename: str, result: ExperimentResult):
    _write_csv(out_dir / filename, result.columns, result.rows)


# --- experiment dispatch ---------------------------------------------------

def run(cfg: RunConfig) -> int:
    """Execute the configured experiment; returns a process exit code."""
    try:
        _check_ranges(cfg)
        if not cfg.experiment:
            raise ConfigError("no experiment selected (set 'experiment' or pass --experiment)")
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        dist = cfg.distribution()
        ga = cfg.ga()
        task = cfg.task()
        if cfg.experiment == "latency":
            result = run_latency_comparison(dist, cfg.d0_sweep_mb, cfg.trials, ga=ga,
                                            task=task, seed=cfg.seed, workers=cfg.workers)
            _write_result(out_dir, "latency.csv", result)
        elif cfg.experiment == "reliability":
            result = run_reliability_study(dist, cfg.d0_sweep_mb, cfg.algorithms,
                                           cfg.trials, ga=ga, task=task, chunks=cfg.chunks,
                                           seed=cfg.seed, workers=cfg.workers)
            _write_result(out_dir, "reliability.csv", result)
        elif cfg.experiment == "energy-compare":
            result = run_energy_comparison(dist, cfg.d0_sweep_mb, cfg.algorithms,
                                           cfg.trials, ga=ga, task=task, chunks=cfg.chunks,
                                           seed=cfg.seed, workers=cfg.workers)
            _write_result(out_dir, "energy_compare.csv", result)
        elif cfg.experiment == "energy-surface":
            result = run_energy_surface(dist, cfg.t0_sweep_s, cfg.r0_sweep, cfg.trials,
                                        ga=ga, task=task, seed=cfg.seed,
                                        workers=cfg.workers)
            _write_result(out_dir, "energy_surface.csv", result)
        else:  # solve-one
            res = run_solve_one(dist, task=task, ga=ga, seed=cfg.seed)
            alloc, metrics = res.allocation, res.metrics
            columns = (["rho"] + [f"lambda_{i + 1}" for i in range(alloc.p)]
                       + ["t_total_s", "r_total", "e_total_j", "feasible"])
            row = ([alloc.rho] + [float(v) for v in alloc.lam]
                   + [metrics.t_total_s, metrics.r_total, metrics.e_total_j,
                      metrics.feasible])
            _write_csv(out_dir / "solve_one.csv", columns, [row])
            if cfg.trace and res.trace is not None:
                _write_trace_csv(out_dir / "trace.csv", res.trace)
        if cfg.trace and cfg.experiment != "solve-one":
            _write_probe_trace(out_dir, cfg)
        (out_dir / "manifest.cfg").write_text(serialize_config(cfg))
    except ConfigError as exc:
        print(f"dronefog: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver/IO failure: diagnostic + nonzero exit
        print(f"dronefog: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def _write_trace_csv(path: Path, tr):
    _write_csv(path, ("generation", "best_fitness", "feasible_count", "wor"),
               [(int(tr.generation[k]), float(tr.best_fitness[k]),
                 int(tr.feasible_count[k]), float(tr.wor[k]))
                for k in range(len(tr.generation))])


def _write_probe_trace(out_dir: Path, cfg: RunConfig):
    """--trace on a sweep experiment records one representative solve
    (trial 0 scenario, first sweep point, that experiment's task bounds)."""
    task = cfg.task()
    if cfg.experiment == "latency":
        task = replace(task, data_size_bits=mb_to_bits(cfg.d0_sweep_mb[0]),
                       latency_bound_s=LATENCY_PROBE_T0_S,
                       reliability_bound=LATENCY_PROBE_R0)
    elif cfg.experiment in ("reliability", "energy-compare"):
        task = replace(task, data_size_bits=mb_to_bits(cfg.d0_sweep_mb[0]))
    elif cfg.experiment == "energy-surface":
        task = replace(task, latency_bound_s=sorted(cfg.t0_sweep_s)[0],
                       reliability_bound=sorted(cfg.r0_sweep, reverse=True)[0])
    res = run_solve_one(cfg.distribution(), task=task, ga=cfg.ga(), seed=cfg.seed)
    _write_trace_csv(out_dir / "trace.csv", res.trace)


# --- argv entry ------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dronefog",
        description="Drone-swarm offloading experiments: solve allocations and "
                    "reproduce the latency/reliability/energy studies as CSV tables.")
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--experiment", choices=EXPERIMENTS,
                        help="experiment to run (overrides the config)")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    parser.add_argument("--trials", type=int, help="Monte-Carlo trials (overrides the config)")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--trace", action="store_true",
                        help="also write a per-generation GA trace CSV")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else RunConfig()
    except ConfigError as exc:
        print(f"dronefog: {exc}", file=sys.stderr)
        return 2
    overrides = {}
    if args.experiment:
        overrides["experiment"] = args.experiment
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out:
        overrides["out_dir"] = args.out
    if args.trace:
        overrides["trace"] = True
    cfg = replace(cfg, **overrides)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
