"""Solution quality metrics and the constraint checker.

Failure cost is the exposure metric: each cluster contributes its head's
failure probability (1 - reliability) times the number of members relying on
that head. Lifetime converts a head's remaining battery into minutes of
operation under a fixed average draw.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .baselines import min_served, objective_value
from .radio import RadioParams, bitrate, link_snr, reliabilities
from .scenario import Scenario
from .solution import NONE, ClusterSolution


@dataclass(frozen=True)
class LifetimeModel:
    capacity_mah: float = 2000.0
    draw_ma: float = 340.0   # average current while serving as head

    def minutes(self, battery_frac: float) -> float:
        return battery_frac * self.capacity_mah / self.draw_ma * 60.0


def head_lifetime_min(battery_frac: float, model: LifetimeModel | None = None) -> float:
    """Minutes a head can serve before its battery empties."""
    if not 0.0 <= battery_frac <= 1.0:
        raise ValueError("battery_frac must be in [0, 1]")
    return (model or LifetimeModel()).minutes(battery_frac)


def failure_cost(solution: ClusterSolution, gamma: np.ndarray) -> tuple[dict[int, float], float]:
    """Per-head and total expected members stranded by head failure."""
    per_head = {}
    for h in solution.heads:
        per_head[h] = (1.0 - float(gamma[h])) * len(solution.members_of(h))
    return per_head, sum(per_head.values())


@dataclass
class FeasibilityReport:
    """Constraint-by-constraint verdicts plus human-readable violations.

    outage_budget is advisory: the heuristics never enforce it, so it is
    reported separately from the hard structural and SNR constraints.
    """
    head_has_ap: bool = True
    single_link: bool = True
    ap_capacity: bool = True
    cluster_capacity: bool = True
    lr_snr: bool = True
    sr_snr: bool = True
    outage_budget: bool = True
    served: int = 0
    required: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def hard_ok(self) -> bool:
        """Everything except the advisory outage budget."""
        return (self.head_has_ap and self.single_link and self.ap_capacity
                and self.cluster_capacity and self.lr_snr and self.sr_snr)

    def flags(self) -> dict[str, bool]:
        return {
            "head_has_ap": self.head_has_ap,
            "single_link": self.single_link,
            "ap_capacity": self.ap_capacity,
            "cluster_capacity": self.cluster_capacity,
            "lr_snr": self.lr_snr,
            "sr_snr": self.sr_snr,
            "outage_budget": self.outage_budget,
        }


def check_feasibility(solution: ClusterSolution, scenario: Scenario,
                      radio: RadioParams | None = None,
                      delta_lr: int = 30, delta_sr: int = 10,
                      theta: float = 0.05,
                      snr_lr: float | None = None,
                      snr_sr: float | None = None) -> FeasibilityReport:
    """Verify a solution against every association constraint.

    snr_lr / snr_sr default to the admission thresholds in radio. The report
    lists each violated constraint with the offending ids.
    """
    radio = radio or RadioParams()
    snr_lr = radio.snr_min_lr if snr_lr is None else snr_lr
    snr_sr = radio.snr_min_sr if snr_sr is None else snr_sr
    rep = FeasibilityReport()
    device_xy = scenario.device_xy()
    if solution.n_devices != scenario.n_devices:
        rep.single_link = False
        rep.violations.append(
            f"solution covers {solution.n_devices} devices, scenario has {scenario.n_devices}")
        return rep

    for i, h in enumerate(solution.head_of):
        if h != NONE and h != i and solution.head_of[h] != h:
            rep.single_link = False
            rep.violations.append(f"device {i} attached to {h}, which is not a head")

    ap_load = [0] * scenario.n_aps
    for h, m in zip(solution.heads, solution.ap_of_head):
        if m == NONE:
            rep.head_has_ap = False
            rep.violations.append(f"head {h} has no access point")
            continue
        if not 0 <= m < scenario.n_aps:
            rep.head_has_ap = False
            rep.violations.append(f"head {h} points at access point {m}, which does not exist")
            continue
        ap_load[m] += 1
        ap = scenario.aps[m]
        d = math.hypot(ap.x - device_xy[h, 0], ap.y - device_xy[h, 1])
        s = link_snr(ap.tx_power, d, radio)
        if s < snr_lr:
            rep.lr_snr = False
            rep.violations.append(f"head {h} to access point {m}: snr {s:.3g} below {snr_lr:.3g}")
    for m, load in enumerate(ap_load):
        if load > delta_lr:
            rep.ap_capacity = False
            rep.violations.append(f"access point {m} serves {load} heads, limit {delta_lr}")

    for h in solution.heads:
        members = solution.members_of(h)
        if len(members) > delta_sr:
            rep.cluster_capacity = False
            rep.violations.append(f"head {h} serves {len(members)} members, limit {delta_sr}")
        for j in members:
            d = math.hypot(*(device_xy[j] - device_xy[h]))
            s = link_snr(radio.dev_tx_power, d, radio)
            if s < snr_sr:
                rep.sr_snr = False
                rep.violations.append(f"member {j} to head {h}: snr {s:.3g} below {snr_sr:.3g}")

    rep.served = solution.n_served
    rep.required = min_served(solution.n_devices, theta)
    if rep.served < rep.required:
        rep.outage_budget = False
        rep.violations.append(
            f"{rep.served} devices served, outage budget requires {rep.required}")
    return rep


@dataclass
class SolutionMetrics:
    total_failure_cost: float
    avg_sr_bitrate_bps: float
    avg_lr_bitrate_bps: float
    outage_fraction: float
    avg_head_lifetime_min: float
    objective: float
    n_heads: int
    n_served: int
    feasibility: dict[str, bool]

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2) + "\n")


def evaluate(solution: ClusterSolution, scenario: Scenario,
             radio: RadioParams | None = None, rho: float = 20.0,
             delta_lr: int = 30, delta_sr: int = 10, theta: float = 0.05,
             lifetime: LifetimeModel | None = None) -> SolutionMetrics:
    """All quality metrics for one solution on its scenario.

    Bitrate averages are over existing links only and 0 when a link class is
    empty; lifetime averages over heads.
    """
    radio = radio or RadioParams()
    lifetime = lifetime or LifetimeModel()
    device_xy = scenario.device_xy()
    gamma = reliabilities(scenario, radio)
    _, total_fc = failure_cost(solution, gamma)

    sr_rates = []
    lr_rates = []
    for h, m in zip(solution.heads, solution.ap_of_head):
        if m != NONE:
            ap = scenario.aps[m]
            d = math.hypot(ap.x - device_xy[h, 0], ap.y - device_xy[h, 1])
            lr_rates.append(bitrate(link_snr(ap.tx_power, d, radio), radio))
        for j in solution.members_of(h):
            d = math.hypot(*(device_xy[j] - device_xy[h]))
            sr_rates.append(bitrate(link_snr(radio.dev_tx_power, d, radio), radio))
    lifetimes = [lifetime.minutes(scenario.devices[h].battery_frac) for h in solution.heads]

    rep = check_feasibility(solution, scenario, radio,
                            delta_lr=delta_lr, delta_sr=delta_sr, theta=theta)
    return SolutionMetrics(
        total_failure_cost=total_fc,
        avg_sr_bitrate_bps=float(np.mean(sr_rates)) if sr_rates else 0.0,
        avg_lr_bitrate_bps=float(np.mean(lr_rates)) if lr_rates else 0.0,
        outage_fraction=len(solution.outage) / solution.n_devices,
        avg_head_lifetime_min=float(np.mean(lifetimes)) if lifetimes else 0.0,
        objective=objective_value(solution, scenario, radio, rho),
        n_heads=len(solution.heads),
        n_served=solution.n_served,
        feasibility=rep.flags(),
    )
