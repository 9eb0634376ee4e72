"""Reliability-aware cluster formation for D2D cooperative networks."""

from .scenario import (AccessPoint, Device, Scenario, ScenarioError,
                       generate_scenario, load_scenario, save_scenario)
from .radio import (RadioParams, bitrate, device_reliability, link_snr,
                    received_power, reliabilities, snr)
from .solution import NONE, ClusterSolution, SolutionError, load_solution, save_solution
from .rforce import (Centroid, ForceVector, Phase1Result, RForceParams,
                     associate_centroids, centroid_charge, default_k,
                     device_charge, finalize_solution, move_centroid,
                     pairwise_force, phase1, phase2_pick_heads,
                     phase3_associate_aps, repair_outage, run_rforce,
                     total_force)
from .baselines import (ExactResult, ExactSolverConfig, LloydResult,
                        exact_solve, lloyd, min_served, objective_value,
                        run_kmeans)
from .metrics import (FeasibilityReport, LifetimeModel, SolutionMetrics,
                      check_feasibility, evaluate, failure_cost,
                      head_lifetime_min)
from .harness import (ALGORITHMS, CSV_COLUMNS, ConfigError, RunConfig,
                      SweepRow, TrialRecord, derive_seed, load_config,
                      load_sweep_csv, run_sweep, run_trials, save_config,
                      scenario_seed, solve, solver_seed, summarize,
                      write_sweep_csv)

__version__ = "0.1.0"
