"""Force-driven cluster formation in three phases.

Phase 1 moves virtual centroids under electrostatic forces: centroids carry a
positive charge that shrinks as they accumulate members, devices carry a
negative charge equal to minus their reliability. Mutual centroid repulsion
spreads coverage; attraction drags centroids toward reliable devices. Each
step a centroid moves a fixed distance eta along its net force, so the layout
is judged converged when positions stop drifting over a trailing window
rather than when forces vanish.

Phase 2 snaps each virtual centroid to a real device, which becomes the
cluster head and inherits the centroid's members. Phase 3 associates heads to
access points greedily by ascending link distance subject to AP capacity.
Links that fall below the admission SNR thresholds are pruned afterwards,
turning the affected devices (or whole clusters) into outage.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .kernels import centroid_forces, greedy_capacity_assign
from .radio import RadioParams, link_snr
from .scenario import Scenario
from .solution import NONE, ClusterSolution

log = logging.getLogger(__name__)

# pairs closer than this contribute no force; the unit vector is meaningless
DIST_FLOOR = 1e-6


class ForceVector(NamedTuple):
    fx: float
    fy: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.fx, self.fy)


@dataclass
class Centroid:
    x: float
    y: float
    degree: int = 0        # members currently associated
    prev_x: float | None = None
    prev_y: float | None = None


@dataclass(frozen=True)
class RForceParams:
    k_centroids: int | None = None   # None: ceil(N / delta_sr)
    lam: float = 0.8                 # centroid charge scale
    kappa: float = 1.0               # force constant
    eta: float = 0.4                 # per-step move distance, m
    delta_sr: int = 10               # cluster capacity (members per head)
    delta_lr: int = 30               # heads per access point
    max_iters: int = 1000
    stability_window: int = 5        # iterations between compared snapshots
    stability_eps: float | None = None  # None: eta / 10
    attraction: str = "members"      # "members": own cluster only, "all": every device
    repair: bool = True              # promote serviceable outage devices to heads

    def __post_init__(self):
        if self.k_centroids is not None and self.k_centroids < 1:
            raise ValueError("k_centroids must be >= 1")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lam must be in (0, 1]")
        if self.kappa <= 0 or self.eta <= 0:
            raise ValueError("kappa and eta must be positive")
        if self.delta_sr < 1 or self.delta_lr < 1:
            raise ValueError("delta_sr and delta_lr must be >= 1")
        if self.max_iters < 1 or self.stability_window < 1:
            raise ValueError("max_iters and stability_window must be >= 1")
        if self.stability_eps is not None and self.stability_eps < 0:
            raise ValueError("stability_eps must be >= 0")
        if self.attraction not in ("members", "all"):
            raise ValueError("attraction must be 'members' or 'all'")

    @property
    def eps(self) -> float:
        return self.eta / 10.0 if self.stability_eps is None else self.stability_eps


def default_k(n_devices: int, delta_sr: int) -> int:
    """Centroid count that can cover every device at full cluster capacity."""
    return math.ceil(n_devices / delta_sr)


def device_charge(reliability: float) -> float:
    """Negative, so reliable devices attract the positive centroids harder."""
    return -reliability


def centroid_charge(n_members: int, lam: float = 0.8) -> float:
    """Positive charge that decays as the cluster fills up."""
    if n_members < 0:
        raise ValueError("n_members must be >= 0")
    return lam / (n_members + 1)


def pairwise_force(q_on: float, q_from: float,
                   pos_on: tuple[float, float], pos_from: tuple[float, float],
                   kappa: float = 1.0) -> ForceVector:
    """Force exerted on the first charge by the second, inverse-square law.

    Like signs repel (force points away from pos_from), opposite signs
    attract. Zero inside the distance floor.
    """
    dx = pos_on[0] - pos_from[0]
    dy = pos_on[1] - pos_from[1]
    d = math.hypot(dx, dy)
    if d < DIST_FLOOR:
        return ForceVector(0.0, 0.0)
    s = kappa * q_on * q_from / (d * d * d)
    return ForceVector(s * dx, s * dy)


def total_force(centroid: Centroid, others: Sequence[Centroid],
                member_xy: Sequence[tuple[float, float]],
                member_charges: Sequence[float],
                lam: float = 0.8, kappa: float = 1.0) -> ForceVector:
    """Net force on one centroid from the other centroids and its members."""
    q = centroid_charge(centroid.degree, lam)
    fx = 0.0
    fy = 0.0
    for other in others:
        if other is centroid:
            continue
        f = pairwise_force(q, centroid_charge(other.degree, lam),
                           (centroid.x, centroid.y), (other.x, other.y), kappa)
        fx += f.fx
        fy += f.fy
    for (x, y), qj in zip(member_xy, member_charges):
        f = pairwise_force(q, qj, (centroid.x, centroid.y), (x, y), kappa)
        fx += f.fx
        fy += f.fy
    return ForceVector(fx, fy)


def move_centroid(centroid: Centroid, force: ForceVector, eta: float = 0.4) -> None:
    """Step the centroid exactly eta along the force direction (in place).

    A zero force leaves the position unchanged. Either way the previous
    position is recorded for stability tracking.
    """
    centroid.prev_x = centroid.x
    centroid.prev_y = centroid.y
    mag = force.magnitude
    if mag == 0.0:
        return
    centroid.x += eta * force.fx / mag
    centroid.y += eta * force.fy / mag


def associate_centroids(centroids: Sequence[Centroid], device_xy: np.ndarray,
                        delta_sr: int = 10) -> list[list[int]]:
    """Greedy capacity-bounded association, resetting centroid degrees.

    Devices are processed in id order, each taking its nearest centroid that
    still has room. Returns the member id list per centroid and stores the
    new degrees on the centroids.
    """
    cen_xy = np.array([(c.x, c.y) for c in centroids], dtype=np.float64)
    assign, degree = greedy_capacity_assign(
        np.asarray(device_xy, dtype=np.float64), cen_xy, delta_sr)
    for c, d in zip(centroids, degree):
        c.degree = int(d)
    members: list[list[int]] = [[] for _ in centroids]
    for i, a in enumerate(assign):
        if a >= 0:
            members[a].append(i)
    return members


@dataclass
class Phase1Result:
    centroid_xy: np.ndarray          # (K, 2) final positions
    members: list[list[int]]         # device ids per centroid, id order
    assign: np.ndarray               # (N,) centroid index per device, -1 if none
    iterations: int
    converged: bool                  # False when max_iters hit first


def phase1(device_xy: np.ndarray, device_reliab: np.ndarray,
           area: tuple[float, float], params: RForceParams, seed: int,
           initial_xy: np.ndarray | None = None) -> Phase1Result:
    """Run the force loop until the layout is stable or max_iters is hit.

    Because every non-zero step has length exactly eta, per-step displacement
    never shrinks; stability means centroids orbit in place, detected as the
    largest net drift over stability_window iterations dropping to eps.
    """
    device_xy = np.asarray(device_xy, dtype=np.float64)
    n = device_xy.shape[0]
    k = params.k_centroids if params.k_centroids is not None else default_k(n, params.delta_sr)
    if initial_xy is not None:
        cen = np.array(initial_xy, dtype=np.float64).copy()
        if cen.shape != (k, 2):
            raise ValueError(f"initial_xy shape {cen.shape} does not match ({k}, 2)")
    else:
        rng = np.random.default_rng(seed)
        cen = rng.uniform((0.0, 0.0), area, size=(k, 2))
    dev_q = -np.asarray(device_reliab, dtype=np.float64)
    attract_all = params.attraction == "all"
    window = params.stability_window
    trail = [cen.copy()]
    it = 0
    converged = False
    while it < params.max_iters:
        assign, degree = greedy_capacity_assign(device_xy, cen, params.delta_sr)
        cen_q = params.lam / (degree.astype(np.float64) + 1.0)
        force = centroid_forces(cen, cen_q, device_xy, dev_q, assign,
                                params.kappa, DIST_FLOOR, attract_all)
        mag = np.hypot(force[:, 0], force[:, 1])
        moving = mag > 0.0
        cen = cen.copy()
        cen[moving] += params.eta * force[moving] / mag[moving, None]
        it += 1
        trail.append(cen.copy())
        if len(trail) > window + 1:
            trail.pop(0)
        if len(trail) == window + 1:
            drift = np.hypot(*(trail[-1] - trail[0]).T).max()
            if drift <= params.eps:
                converged = True
                break
    # re-associate so membership matches the final positions
    assign, _ = greedy_capacity_assign(device_xy, cen, params.delta_sr)
    members: list[list[int]] = [[] for _ in range(k)]
    for i, a in enumerate(assign):
        if a >= 0:
            members[a].append(i)
    return Phase1Result(centroid_xy=cen, members=members, assign=assign,
                        iterations=it, converged=converged)


def phase2_pick_heads(centroid_xy: np.ndarray, device_xy: np.ndarray,
                      members: list[list[int]]) -> np.ndarray:
    """Replace each virtual centroid with a real head device.

    Centroids claim heads sequentially: the nearest still-unclaimed device,
    ties to the lowest id. The centroid's members follow their head unless an
    earlier centroid already took them. Returns head_of over all devices.
    """
    n = device_xy.shape[0]
    head_of = np.full(n, NONE, dtype=np.int64)
    for k in range(centroid_xy.shape[0]):
        free = head_of == NONE
        if not free.any():
            log.warning("phase2: %d surplus centroids, every device already claimed",
                        centroid_xy.shape[0] - k)
            break
        d2 = ((device_xy - centroid_xy[k]) ** 2).sum(axis=1)
        d2[~free] = np.inf
        h = int(np.argmin(d2))
        head_of[h] = h
        for i in members[k]:
            if head_of[i] == NONE:
                head_of[i] = h
    return head_of


def phase3_associate_aps(ap_xy: np.ndarray, heads: Sequence[int],
                         device_xy: np.ndarray, delta_lr: int = 30) -> dict[int, int]:
    """Greedy head-to-AP matching by ascending link distance.

    All (AP, head) pairs are visited shortest first; a pair binds when the
    head is still free and the AP below capacity. Heads left over get NONE.
    Ties break on (distance, ap id, head id).
    """
    pairs = []
    for m in range(ap_xy.shape[0]):
        for h in heads:
            dx = ap_xy[m, 0] - device_xy[h, 0]
            dy = ap_xy[m, 1] - device_xy[h, 1]
            pairs.append((math.hypot(dx, dy), m, h))
    pairs.sort()
    ap_of = {h: NONE for h in heads}
    load = [0] * ap_xy.shape[0]
    for _, m, h in pairs:
        if ap_of[h] == NONE and load[m] < delta_lr:
            ap_of[h] = m
            load[m] += 1
    return ap_of


def finalize_solution(scenario: Scenario, radio: RadioParams,
                      head_of: np.ndarray, ap_of: dict[int, int]) -> ClusterSolution:
    """Prune links below the admission SNR and pack the result.

    A head whose AP link misses snr_min_lr (or that got no AP at all) is
    dissolved: the head and its members all become outage. Members whose
    short-range link misses snr_min_sr are dropped individually.
    """
    head_of = np.asarray(head_of, dtype=np.int64).copy()
    device_xy = scenario.device_xy()
    heads = [i for i in range(len(head_of)) if head_of[i] == i]
    kept: list[int] = []
    kept_ap: list[int] = []
    for h in heads:
        m = ap_of.get(h, NONE)
        if m != NONE:
            ap = scenario.aps[m]
            d = math.hypot(ap.x - device_xy[h, 0], ap.y - device_xy[h, 1])
            if link_snr(ap.tx_power, d, radio) < radio.snr_min_lr:
                m = NONE
        if m == NONE:
            head_of[head_of == h] = NONE
            continue
        for j in np.flatnonzero(head_of == h):
            if j == h:
                continue
            d = math.hypot(*(device_xy[j] - device_xy[h]))
            if link_snr(radio.dev_tx_power, d, radio) < radio.snr_min_sr:
                head_of[j] = NONE
        kept.append(h)
        kept_ap.append(m)
    return ClusterSolution(n_devices=scenario.n_devices,
                           head_of=[int(v) for v in head_of],
                           heads=kept, ap_of_head=kept_ap)


def repair_outage(scenario: Scenario, radio: RadioParams,
                  solution: ClusterSolution,
                  delta_lr: int = 30) -> ClusterSolution:
    """Serve leftover outage devices directly through spare AP capacity.

    While some AP has slots left, the outage device closest to such an AP
    (and meeting the LR admission SNR) is promoted to a single-device
    cluster served by that AP. Pure coverage repair: no members move, so
    failure cost is untouched; with a lone AP the spare slots usually run
    out first, with several APs most of the leftover outage gets served.
    No-op when every AP is full or no outage device can reach one.
    """
    n = scenario.n_devices
    device_xy = scenario.device_xy()
    head_of = list(solution.head_of)
    heads = list(solution.heads)
    ap_of_head = list(solution.ap_of_head)
    load = [0] * scenario.n_aps
    for m in ap_of_head:
        if m != NONE:
            load[m] += 1
    outage = {i for i in range(n) if head_of[i] == NONE}
    while outage:
        best = None
        for i in outage:
            for ap in scenario.aps:
                if load[ap.id] >= delta_lr:
                    continue
                d = math.hypot(ap.x - device_xy[i, 0], ap.y - device_xy[i, 1])
                if link_snr(ap.tx_power, d, radio) < radio.snr_min_lr:
                    continue
                if best is None or (d, i, ap.id) < best:
                    best = (d, i, ap.id)
        if best is None:
            break
        _, h, m = best
        head_of[h] = h
        load[m] += 1
        outage.discard(h)
        heads.append(h)
        ap_of_head.append(m)
    order = sorted(range(len(heads)), key=lambda idx: heads[idx])
    return ClusterSolution(n_devices=n, head_of=head_of,
                           heads=[heads[idx] for idx in order],
                           ap_of_head=[ap_of_head[idx] for idx in order])


def run_rforce(scenario: Scenario, radio: RadioParams | None = None,
               params: RForceParams | None = None, seed: int = 0) -> ClusterSolution:
    """Full pipeline on one scenario: phases 1-3, SNR pruning, outage repair."""
    from .radio import reliabilities  # local import keeps module load cheap
    radio = radio or RadioParams()
    params = params or RForceParams()
    device_xy = scenario.device_xy()
    reliab = reliabilities(scenario, radio)
    p1 = phase1(device_xy, reliab, (scenario.area_width, scenario.area_height),
                params, seed)
    head_of = phase2_pick_heads(p1.centroid_xy, device_xy, p1.members)
    heads = [i for i in range(scenario.n_devices) if head_of[i] == i]
    ap_of = phase3_associate_aps(scenario.ap_xy(), heads, device_xy, params.delta_lr)
    solution = finalize_solution(scenario, radio, head_of, ap_of)
    if params.repair:
        solution = repair_outage(scenario, radio, solution, params.delta_lr)
    return solution
