"""Monte-Carlo experiment harness.

Trial seeds derive from a sha256 of (base_seed, n_devices, n_aps, trial), so
every algorithm sees the identical scenario sequence for a given
configuration: comparisons are paired. Solver seeds add the algorithm name so
no solver shares random draws with another.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .baselines import ExactSolverConfig, exact_solve, objective_value, run_kmeans
from .metrics import SolutionMetrics, evaluate
from .radio import RadioParams
from .rforce import RForceParams, default_k, run_rforce
from .scenario import Scenario, generate_scenario
from .solution import ClusterSolution

log = logging.getLogger(__name__)

ALGORITHMS = ("rforce", "kmeans", "exact")

CSV_COLUMNS = [
    "n_devices", "n_aps", "algorithm", "trials",
    "mean_failure_cost", "std_failure_cost",
    "mean_sr_bitrate_bps", "mean_lr_bitrate_bps",
    "mean_outage_frac", "mean_head_lifetime_min",
    "mean_objective", "mean_runtime_ms",
]


class ConfigError(ValueError):
    """Malformed run configuration file."""


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "rforce"
    n_devices: int = 200
    n_aps: int = 1
    area: tuple[float, float] = (100.0, 100.0)
    battery_range: tuple[float, float] = (0.1, 0.9)
    rating: float = 1.0
    n_trials: int = 25
    base_seed: int = 1
    rho: float = 20.0
    theta: float = 0.05
    k_sweep: bool = False
    k_sweep_halfwidth: int = 2
    node_limit: int = 10       # exact solver refuses instances above this
    time_limit_s: float = 120.0
    radio: RadioParams = field(default_factory=RadioParams)
    rforce: RForceParams = field(default_factory=RForceParams)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError("theta must be in [0, 1]")
        if self.k_sweep_halfwidth < 0:
            raise ConfigError("k_sweep_halfwidth must be >= 0")

    def exact_config(self) -> ExactSolverConfig:
        return ExactSolverConfig(rho=self.rho, theta=self.theta,
                                 delta_sr=self.rforce.delta_sr,
                                 delta_lr=self.rforce.delta_lr,
                                 node_limit=self.node_limit,
                                 time_limit_s=self.time_limit_s)


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from any argument tuple."""
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def scenario_seed(base_seed: int, n_devices: int, n_aps: int, trial: int) -> int:
    """Shared by all algorithms so trials pair up across solvers."""
    return derive_seed("scenario", base_seed, n_devices, n_aps, trial)


def solver_seed(base_seed: int, algorithm: str, n_devices: int, n_aps: int, trial: int) -> int:
    return derive_seed("solver", algorithm, base_seed, n_devices, n_aps, trial)


def _config_doc(cfg: RunConfig) -> dict:
    doc = asdict(cfg)
    doc["area"] = list(cfg.area)
    doc["battery_range"] = list(cfg.battery_range)
    return doc


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(_config_doc(cfg), indent=2) + "\n")


def load_config(path: str | Path) -> RunConfig:
    """Read a config file; every key optional, unknown keys rejected."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON (line {e.lineno}, col {e.colno}: {e.msg})") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_doc(doc)


def config_from_doc(doc: dict) -> RunConfig:
    top = {f.name for f in fields(RunConfig)}
    unknown = set(doc) - top
    if unknown:
        raise ConfigError(f"config has unknown fields: {sorted(unknown)}")
    kwargs = dict(doc)
    try:
        if "radio" in kwargs:
            sub = kwargs["radio"]
            bad = set(sub) - {f.name for f in fields(RadioParams)}
            if bad:
                raise ConfigError(f"config.radio has unknown fields: {sorted(bad)}")
            kwargs["radio"] = RadioParams(**sub)
        if "rforce" in kwargs:
            sub = kwargs["rforce"]
            bad = set(sub) - {f.name for f in fields(RForceParams)}
            if bad:
                raise ConfigError(f"config.rforce has unknown fields: {sorted(bad)}")
            kwargs["rforce"] = RForceParams(**sub)
        if "area" in kwargs:
            kwargs["area"] = tuple(kwargs["area"])
        if "battery_range" in kwargs:
            kwargs["battery_range"] = tuple(kwargs["battery_range"])
        return RunConfig(**kwargs)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"bad config value: {e}") from e


def make_scenario(cfg: RunConfig, trial: int = 0,
                  n_devices: int | None = None, n_aps: int | None = None) -> Scenario:
    n = n_devices if n_devices is not None else cfg.n_devices
    m = n_aps if n_aps is not None else cfg.n_aps
    return generate_scenario(
        n, m, area=cfg.area, battery_range=cfg.battery_range, rating=cfg.rating,
        ap_tx_power=cfg.radio.ap_tx_power,
        seed=scenario_seed(cfg.base_seed, n, m, trial))


def solve(algorithm: str, scenario: Scenario, cfg: RunConfig, seed: int
          ) -> tuple[ClusterSolution, float, dict]:
    """Run one solver on one scenario. Returns (solution, runtime_ms, extra)."""
    t0 = time.perf_counter()
    extra: dict = {}
    if algorithm == "rforce":
        if cfg.k_sweep:
            solution, k = sweep_k(scenario, cfg, seed)
            extra["k"] = k
        else:
            solution = run_rforce(scenario, cfg.radio, cfg.rforce, seed)
    elif algorithm == "kmeans":
        solution = run_kmeans(scenario, cfg.radio, k=cfg.rforce.k_centroids,
                              delta_sr=cfg.rforce.delta_sr,
                              delta_lr=cfg.rforce.delta_lr, seed=seed)
    elif algorithm == "exact":
        res = exact_solve(scenario, cfg.radio, cfg.exact_config())
        if not res.feasible:
            raise RuntimeError("exact solver found no feasible association")
        solution = res.solution
        extra["objective"] = res.objective
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return solution, (time.perf_counter() - t0) * 1e3, extra


def sweep_k(scenario: Scenario, cfg: RunConfig, seed: int) -> tuple[ClusterSolution, int]:
    """Try centroid counts around the capacity default, keep the best objective."""
    base = cfg.rforce.k_centroids or default_k(scenario.n_devices, cfg.rforce.delta_sr)
    best = None
    for k in range(max(1, base - cfg.k_sweep_halfwidth), base + cfg.k_sweep_halfwidth + 1):
        params = replace(cfg.rforce, k_centroids=k)
        sol = run_rforce(scenario, cfg.radio, params, derive_seed("ksweep", seed, k))
        obj = objective_value(sol, scenario, cfg.radio, cfg.rho)
        if best is None or obj < best[0]:
            best = (obj, k, sol)
    return best[2], best[1]


@dataclass
class TrialRecord:
    trial: int
    solution: ClusterSolution
    metrics: SolutionMetrics
    runtime_ms: float
    extra: dict


def run_trials(cfg: RunConfig, algorithm: str | None = None,
               n_devices: int | None = None, n_aps: int | None = None,
               scenario: Scenario | None = None) -> list[TrialRecord]:
    """Paired Monte-Carlo trials of one algorithm at one (N, M) cell.

    Passing an explicit scenario pins every trial to it (seeds still vary on
    the solver side).
    """
    algo = algorithm or cfg.algorithm
    n = n_devices if n_devices is not None else cfg.n_devices
    m = n_aps if n_aps is not None else cfg.n_aps
    records = []
    for trial in range(cfg.n_trials):
        sc = scenario if scenario is not None else make_scenario(cfg, trial, n, m)
        seed = solver_seed(cfg.base_seed, algo, n, m, trial)
        solution, runtime_ms, extra = solve(algo, sc, cfg, seed)
        met = evaluate(solution, sc, cfg.radio, rho=cfg.rho,
                       delta_lr=cfg.rforce.delta_lr, delta_sr=cfg.rforce.delta_sr,
                       theta=cfg.theta)
        records.append(TrialRecord(trial=trial, solution=solution, metrics=met,
                                   runtime_ms=runtime_ms, extra=extra))
    return records


@dataclass
class SweepRow:
    n_devices: int
    n_aps: int
    algorithm: str
    trials: int
    mean_failure_cost: float
    std_failure_cost: float
    mean_sr_bitrate_bps: float
    mean_lr_bitrate_bps: float
    mean_outage_frac: float
    mean_head_lifetime_min: float
    mean_objective: float
    mean_runtime_ms: float


def summarize(records: list[TrialRecord], n_devices: int, n_aps: int,
              algorithm: str) -> SweepRow:
    fc = np.array([r.metrics.total_failure_cost for r in records])
    return SweepRow(
        n_devices=n_devices,
        n_aps=n_aps,
        algorithm=algorithm,
        trials=len(records),
        mean_failure_cost=float(fc.mean()),
        std_failure_cost=float(fc.std(ddof=1)) if len(records) > 1 else 0.0,
        mean_sr_bitrate_bps=float(np.mean([r.metrics.avg_sr_bitrate_bps for r in records])),
        mean_lr_bitrate_bps=float(np.mean([r.metrics.avg_lr_bitrate_bps for r in records])),
        mean_outage_frac=float(np.mean([r.metrics.outage_fraction for r in records])),
        mean_head_lifetime_min=float(np.mean([r.metrics.avg_head_lifetime_min for r in records])),
        mean_objective=float(np.mean([r.metrics.objective for r in records])),
        mean_runtime_ms=float(np.mean([r.runtime_ms for r in records])),
    )


def run_sweep(cfg: RunConfig, device_counts: list[int], ap_counts: list[int],
              algorithms: list[str]) -> list[SweepRow]:
    """Full grid of (N, M, algorithm) cells, paired scenarios per cell.

    Exact cells above the node limit are skipped with a warning rather than
    aborting the grid.
    """
    rows = []
    for n in device_counts:
        for m in ap_counts:
            for algo in algorithms:
                if algo == "exact" and n > cfg.node_limit:
                    log.warning("skipping exact at n=%d: above node_limit=%d",
                                n, cfg.node_limit)
                    continue
                records = run_trials(cfg, algorithm=algo, n_devices=n, n_aps=m)
                rows.append(summarize(records, n, m, algo))
    return rows


def write_sweep_csv(rows: list[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: getattr(row, k) for k in CSV_COLUMNS})


def load_sweep_csv(path: str | Path) -> list[SweepRow]:
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected columns {reader.fieldnames}")
        for rec in reader:
            rows.append(SweepRow(
                n_devices=int(rec["n_devices"]), n_aps=int(rec["n_aps"]),
                algorithm=rec["algorithm"], trials=int(rec["trials"]),
                **{k: float(rec[k]) for k in CSV_COLUMNS[4:]}))
    return rows
