"""Figure rendering for solutions and sweep results.

Everything draws straight to files (Agg backend), matching how the CLI is
used in batch runs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .harness import SweepRow
from .scenario import Scenario
from .solution import NONE, ClusterSolution


def plot_solution(scenario: Scenario, solution: ClusterSolution,
                  path: str | Path, title: str | None = None) -> Path:
    """Scatter snapshot: clusters by color, heads starred, APs squared."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 7))
    xy = scenario.device_xy()
    cmap = plt.get_cmap("tab20")
    color_of = {h: cmap(i % 20) for i, h in enumerate(solution.heads)}

    out = solution.outage
    if out:
        ax.scatter(xy[out, 0], xy[out, 1], marker="x", c="0.6", s=30, label="outage")
    for h in solution.heads:
        members = solution.members_of(h)
        col = color_of[h]
        if members:
            ax.scatter(xy[members, 0], xy[members, 1], color=col, s=25)
            for j in members:
                ax.plot([xy[j, 0], xy[h, 0]], [xy[j, 1], xy[h, 1]],
                        color=col, lw=0.5, alpha=0.5)
        ax.scatter([xy[h, 0]], [xy[h, 1]], color=col, marker="*", s=160,
                   edgecolors="black", linewidths=0.5, zorder=3)
        m = solution.ap_of(h)
        if m != NONE:
            ap = scenario.aps[m]
            ax.plot([xy[h, 0], ap.x], [xy[h, 1], ap.y], color="black",
                    lw=0.8, ls="--", alpha=0.4)
    ap_xy = scenario.ap_xy()
    ax.scatter(ap_xy[:, 0], ap_xy[:, 1], marker="s", c="red", s=90,
               zorder=4, label="access point")
    ax.set_xlim(0, scenario.area_width)
    ax.set_ylim(0, scenario.area_height)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(title or f"{scenario.n_devices} devices, "
                          f"{len(solution.heads)} clusters, {len(out)} outage")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


_SERIES = [
    ("mean_failure_cost", "mean failure cost", "failure_cost"),
    ("mean_head_lifetime_min", "mean head lifetime [min]", "head_lifetime"),
    ("mean_sr_bitrate_bps", "mean short-range bitrate [bit/s]", "sr_bitrate"),
    ("mean_lr_bitrate_bps", "mean long-range bitrate [bit/s]", "lr_bitrate"),
    ("mean_outage_frac", "mean outage fraction", "outage"),
    ("mean_objective", "mean objective", "objective"),
]


def plot_sweep(rows: list[SweepRow], out_dir: str | Path,
               prefix: str = "sweep") -> list[Path]:
    """One trend figure per metric: value vs device count, line per (algorithm, M).

    Returns the written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple[str, int], list[SweepRow]] = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.n_aps), []).append(r)
    written = []
    for attr, label, stem in _SERIES:
        fig, ax = plt.subplots(figsize=(6.5, 4.5))
        for (algo, m), grp in sorted(groups.items()):
            grp = sorted(grp, key=lambda r: r.n_devices)
            xs = [g.n_devices for g in grp]
            ys = [getattr(g, attr) for g in grp]
            name = algo if len({k[1] for k in groups}) == 1 else f"{algo}, M={m}"
            ax.plot(xs, ys, marker="o", label=name)
            if attr == "mean_failure_cost":
                err = [g.std_failure_cost for g in grp]
                ax.errorbar(xs, ys, yerr=err, fmt="none", ecolor="0.5",
                            elinewidth=0.8, capsize=2)
        ax.set_xlabel("devices")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"{prefix}_{stem}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
