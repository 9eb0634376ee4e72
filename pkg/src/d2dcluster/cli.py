"""Command line interface.

Subcommands:
  generate  draw a random scenario and write it to JSON
  run       solve one scenario, write solution + metrics (optionally a figure)
  sweep     Monte-Carlo grid over device counts, write CSV (optionally figures)
  check     validate a solution file against its scenario's constraints
  report    render figures from an existing sweep CSV
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import harness
from .harness import ALGORITHMS, RunConfig, load_config
from .metrics import check_feasibility, evaluate
from .scenario import generate_scenario, load_scenario, save_scenario
from .solution import load_solution, save_solution

log = logging.getLogger("d2dcluster")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _algo_list(text: str) -> list[str]:
    algos = [a.strip() for a in text.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise argparse.ArgumentTypeError(f"unknown algorithm {a!r}")
    return algos


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="d2dcluster",
                                description="Reliability-aware D2D cluster formation")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random scenario file")
    g.add_argument("--devices", type=int, required=True)
    g.add_argument("--aps", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--area", type=float, nargs=2, default=[100.0, 100.0],
                   metavar=("W", "H"))
    g.add_argument("--battery-range", type=float, nargs=2, default=[0.1, 0.9],
                   metavar=("LO", "HI"))
    g.add_argument("--out", type=Path, required=True, help="output scenario JSON")

    r = sub.add_parser("run", help="solve one scenario end to end")
    r.add_argument("--scenario", type=Path, help="scenario JSON; omit to generate one")
    r.add_argument("--devices", type=int, default=None)
    r.add_argument("--aps", type=int, default=None)
    r.add_argument("--algo", choices=ALGORITHMS, default=None)
    r.add_argument("--seed", type=int, default=None, help="base seed")
    r.add_argument("--k", type=int, default=None, help="override centroid count")
    r.add_argument("--k-sweep", action="store_true",
                   help="pick the centroid count by objective around the default")
    r.add_argument("--config", type=Path, help="run configuration JSON")
    r.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    r.add_argument("--plot", action="store_true", help="also render the cluster figure")

    s = sub.add_parser("sweep", help="Monte-Carlo sweep over device counts")
    s.add_argument("--devices", type=_int_list, default=[50, 100, 150, 200, 250],
                   help="comma-separated device counts")
    s.add_argument("--aps", type=_int_list, default=[1],
                   help="comma-separated AP counts")
    s.add_argument("--algo", type=_algo_list, default=["rforce", "kmeans"],
                   help="comma-separated algorithms")
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--seed", type=int, default=None, help="base seed")
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--k-sweep", action="store_true")
    s.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path, default=Path("out"))
    s.add_argument("--plot", action="store_true", help="also render trend figures")

    c = sub.add_parser("check", help="validate a solution against a scenario")
    c.add_argument("--scenario", type=Path, required=True)
    c.add_argument("--solution", type=Path, required=True)
    c.add_argument("--config", type=Path)

    rep = sub.add_parser("report", help="render figures from a sweep CSV")
    rep.add_argument("--csv", type=Path, required=True)
    rep.add_argument("--out", type=Path, default=Path("out"))
    return p


def _load_cfg(args, **overrides) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    clean = {k: v for k, v in overrides.items() if v is not None}
    if "k" in clean or getattr(args, "k_sweep", False):
        rf = dataclasses.replace(cfg.rforce,
                                 k_centroids=clean.pop("k", cfg.rforce.k_centroids))
        clean["rforce"] = rf
        if getattr(args, "k_sweep", False):
            clean["k_sweep"] = True
    clean.pop("k", None)
    return dataclasses.replace(cfg, **clean)


def cmd_generate(args) -> int:
    sc = generate_scenario(args.devices, args.aps, area=tuple(args.area),
                           battery_range=tuple(args.battery_range), seed=args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_scenario(sc, args.out)
    print(f"wrote {args.out}: {sc.n_devices} devices, {sc.n_aps} APs, seed {sc.seed}")
    return 0


def cmd_run(args) -> int:
    cfg = _load_cfg(args, algorithm=args.algo, n_devices=args.devices,
                    n_aps=args.aps, base_seed=args.seed, k=args.k)
    if args.scenario:
        sc = load_scenario(args.scenario)
    else:
        sc = harness.make_scenario(cfg, trial=0)
    seed = harness.solver_seed(cfg.base_seed, cfg.algorithm, sc.n_devices, sc.n_aps, 0)
    solution, runtime_ms, extra = harness.solve(cfg.algorithm, sc, cfg, seed)
    met = evaluate(solution, sc, cfg.radio, rho=cfg.rho,
                   delta_lr=cfg.rforce.delta_lr, delta_sr=cfg.rforce.delta_sr,
                   theta=cfg.theta)
    args.out.mkdir(parents=True, exist_ok=True)
    save_scenario(sc, args.out / "scenario.json")
    save_solution(solution, args.out / "solution.json")
    met.to_json(args.out / "metrics.json")
    if args.plot:
        from .plots import plot_solution
        fig = plot_solution(sc, solution, args.out / "solution.png")
        print(f"figure: {fig}")
    chosen = f", k={extra['k']}" if "k" in extra else ""
    print(f"{cfg.algorithm} on {sc.n_devices} devices / {sc.n_aps} APs"
          f" in {runtime_ms:.1f} ms{chosen}")
    print(f"  heads {met.n_heads}  served {met.n_served}/{sc.n_devices}"
          f"  failure_cost {met.total_failure_cost:.3f}"
          f"  objective {met.objective:.3f}")
    print(f"wrote {args.out}/scenario.json, solution.json, metrics.json")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args, n_trials=args.trials, base_seed=args.seed, k=args.k)
    rows = harness.run_sweep(cfg, args.devices, args.aps, args.algo)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "sweep.csv"
    harness.write_sweep_csv(rows, csv_path)
    print(f"wrote {csv_path} ({len(rows)} rows, {cfg.n_trials} trials each)")
    if args.plot:
        from .plots import plot_sweep
        for path in plot_sweep(rows, args.out):
            print(f"figure: {path}")
    return 0


def cmd_check(args) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    sc = load_scenario(args.scenario)
    sol = load_solution(args.solution)
    rep = check_feasibility(sol, sc, cfg.radio,
                            delta_lr=cfg.rforce.delta_lr,
                            delta_sr=cfg.rforce.delta_sr, theta=cfg.theta)
    for name, ok in rep.flags().items():
        print(f"{name}: {'ok' if ok else 'VIOLATED'}")
    print(f"served {rep.served} of {sol.n_devices} (outage budget requires {rep.required})")
    for v in rep.violations:
        print(f"  {v}")
    return 0 if rep.hard_ok else 1


def cmd_report(args) -> int:
    from .plots import plot_sweep
    rows = harness.load_sweep_csv(args.csv)
    for path in plot_sweep(rows, args.out):
        print(f"figure: {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {
        "generate": cmd_generate,
        "run": cmd_run,
        "sweep": cmd_sweep,
        "check": cmd_check,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError, RuntimeError, TimeoutError) as e:
        log.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
