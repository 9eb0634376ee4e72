"""Reference solvers: capacity-bounded k-means and an exact small-instance solver.

The k-means baseline clusters on geometry alone (battery state never enters),
then reuses the same head-snapping, AP association, and SNR pruning as the
force heuristic so the two differ only in where the centroids end up.

The exact solver minimizes the association objective

    rho * sum_i (1 - gamma_i) * |members(i)|  -  sum P_lr  -  sum P_sr

by enumerating every candidate set of directly-served devices (the heads).
Given that set the problem splits into two independent assignment problems,
each solved optimally: heads onto AP slots, and the remaining devices onto
cluster slots or outage slots. Guaranteed optimal, exponential in N, so it
is gated behind node_limit.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .kernels import greedy_capacity_assign
from .radio import RadioParams, received_power, reliabilities, snr
from .rforce import (default_k, finalize_solution, phase2_pick_heads,
                     phase3_associate_aps, repair_outage)
from .scenario import Scenario
from .solution import NONE, ClusterSolution

log = logging.getLogger(__name__)


@dataclass
class LloydResult:
    centroid_xy: np.ndarray
    assign: np.ndarray
    members: list[list[int]]
    wcss: float
    wcss_trace: list[float]      # value after each assignment step
    iterations: int
    converged: bool


def _wcss(points: np.ndarray, cen: np.ndarray, assign: np.ndarray) -> float:
    diffs = points - cen[np.maximum(assign, 0)]
    return float((diffs[assign >= 0] ** 2).sum())


def lloyd(points: np.ndarray, k: int, capacity: int | None = None,
          seed: int = 0, max_iters: int = 300, tol: float = 1e-9) -> LloydResult:
    """Lloyd iterations with an optional per-centroid capacity.

    Assignment is the same sequential greedy used everywhere else; with
    capacity None (or >= len(points)) it reduces to plain nearest-centroid,
    and the usual monotone-WCSS argument applies. A binding capacity can
    produce non-optimal assignments, so only the mean objective trend is
    guaranteed then. Initial centroids are a uniform draw of distinct input
    points.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        log.warning("lloyd: k=%d exceeds %d points, clamping", k, n)
        k = n
    cap = n if capacity is None else capacity
    rng = np.random.default_rng(seed)
    cen = points[rng.choice(n, size=k, replace=False)].copy()
    assign, _ = greedy_capacity_assign(points, cen, cap)
    trace = [_wcss(points, cen, assign)]
    it = 0
    converged = False
    while it < max_iters:
        new = cen.copy()
        for c in range(k):
            sel = assign == c
            if sel.any():
                new[c] = points[sel].mean(axis=0)
        shift = np.hypot(*(new - cen).T).max()
        cen = new
        assign, _ = greedy_capacity_assign(points, cen, cap)
        trace.append(_wcss(points, cen, assign))
        it += 1
        if shift <= tol:
            converged = True
            break
    members: list[list[int]] = [[] for _ in range(k)]
    for i, a in enumerate(assign):
        if a >= 0:
            members[a].append(i)
    return LloydResult(centroid_xy=cen, assign=assign, members=members,
                       wcss=trace[-1], wcss_trace=trace, iterations=it,
                       converged=converged)


def run_kmeans(scenario: Scenario, radio: RadioParams | None = None,
               k: int | None = None, delta_sr: int = 10, delta_lr: int = 30,
               seed: int = 0, max_iters: int = 300,
               repair: bool = True) -> ClusterSolution:
    """Geometry-only baseline through the shared head/AP/pruning pipeline.

    Uses the same AP association, pruning, and outage repair as the force
    heuristic, so the comparison isolates where the centroids land and which
    devices become heads.
    """
    radio = radio or RadioParams()
    device_xy = scenario.device_xy()
    if k is None:
        k = default_k(scenario.n_devices, delta_sr)
    res = lloyd(device_xy, k, capacity=delta_sr, seed=seed, max_iters=max_iters)
    head_of = phase2_pick_heads(res.centroid_xy, device_xy, res.members)
    heads = [i for i in range(scenario.n_devices) if head_of[i] == i]
    ap_of = phase3_associate_aps(scenario.ap_xy(), heads, device_xy, delta_lr)
    solution = finalize_solution(scenario, radio, head_of, ap_of)
    if repair:
        solution = repair_outage(scenario, radio, solution, delta_lr)
    return solution


def objective_value(solution: ClusterSolution, scenario: Scenario,
                    radio: RadioParams, rho: float = 20.0) -> float:
    """Association objective of a solution; lower is better, empty is 0."""
    gamma = reliabilities(scenario, radio)
    device_xy = scenario.device_xy()
    total = 0.0
    for h, m in zip(solution.heads, solution.ap_of_head):
        members = solution.members_of(h)
        total += rho * (1.0 - gamma[h]) * len(members)
        if m != NONE:
            ap = scenario.aps[m]
            d = math.hypot(ap.x - device_xy[h, 0], ap.y - device_xy[h, 1])
            total -= received_power(ap.tx_power, d, radio)
        for j in members:
            d = math.hypot(*(device_xy[j] - device_xy[h]))
            total -= received_power(radio.dev_tx_power, d, radio)
    return total


@dataclass(frozen=True)
class ExactSolverConfig:
    rho: float = 20.0
    theta: float = 0.05          # tolerated outage fraction
    delta_sr: int = 10
    delta_lr: int = 30
    node_limit: int = 10         # refuse larger instances outright
    time_limit_s: float = 120.0


@dataclass
class ExactResult:
    solution: ClusterSolution | None
    objective: float
    feasible: bool
    n_candidate_sets: int        # head sets that survived the cheap pre-checks


def min_served(n: int, theta: float) -> int:
    """Smallest served count satisfying the outage budget.

    ceil((1 - theta) * n) computed away from the float boundary, so e.g.
    n=100, theta=0.05 gives 95 and not 96.
    """
    return max(0, math.ceil((1.0 - theta) * n - 1e-9))


def exact_solve(scenario: Scenario, radio: RadioParams | None = None,
                config: ExactSolverConfig | None = None) -> ExactResult:
    """Provably optimal association for small instances.

    For each subset T of devices cast as heads, the member side and the AP
    side decouple: member link costs depend only on which heads exist, never
    on which AP a head uses. Both sides are assignment problems (capacity
    handled by duplicating columns, the outage budget by zero-cost sink
    columns) solved exactly. Links below the admission SNR are forbidden, so
    the winner satisfies every constraint by construction.
    """
    radio = radio or RadioParams()
    cfg = config or ExactSolverConfig()
    n = scenario.n_devices
    if n > cfg.node_limit:
        raise ValueError(f"exact_solve: {n} devices exceeds node_limit={cfg.node_limit}")
    n_aps = scenario.n_aps
    device_xy = scenario.device_xy()
    ap_xy = scenario.ap_xy()
    gamma = reliabilities(scenario, radio)

    # link powers and admission masks, precomputed once
    dd = np.hypot(device_xy[:, None, 0] - device_xy[None, :, 0],
                  device_xy[:, None, 1] - device_xy[None, :, 1])
    p_sr = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            p_sr[i, j] = received_power(radio.dev_tx_power, dd[i, j], radio)
    sr_ok = np.array([[snr(p_sr[i, j], radio) >= radio.snr_min_sr for j in range(n)]
                      for i in range(n)])
    ad = np.hypot(ap_xy[:, None, 0] - device_xy[None, :, 0],
                  ap_xy[:, None, 1] - device_xy[None, :, 1])
    p_lr = np.empty((n_aps, n))
    for m in range(n_aps):
        for i in range(n):
            p_lr[m, i] = received_power(scenario.aps[m].tx_power, ad[m, i], radio)
    lr_ok = np.array([[snr(p_lr[m, i], radio) >= radio.snr_min_lr for i in range(n)]
                      for m in range(n_aps)])

    need = min_served(n, cfg.theta)
    outage_budget = n - need
    best_obj = math.inf
    best_mask = -1
    evaluated = 0
    deadline = time.perf_counter() + cfg.time_limit_s

    def side_costs(mask: int):
        """(ap_cost, member_cost) for this head set, or None if infeasible."""
        heads = [i for i in range(n) if mask >> i & 1]
        rest = [i for i in range(n) if not mask >> i & 1]
        ap_cost = 0.0
        if heads:
            if len(heads) > n_aps * cfg.delta_lr:
                return None
            slots = min(cfg.delta_lr, len(heads))
            cost = np.full((len(heads), n_aps * slots), math.inf)
            for r, h in enumerate(heads):
                for m in range(n_aps):
                    if lr_ok[m, h]:
                        cost[r, m * slots:(m + 1) * slots] = -p_lr[m, h]
            try:
                rows, cols = linear_sum_assignment(cost)
            except ValueError:
                return None  # some head cannot reach any access point
            ap_cost = float(cost[rows, cols].sum())
        member_cost = 0.0
        if rest:
            slots = min(cfg.delta_sr, len(rest))
            width = len(heads) * slots + outage_budget
            if len(rest) > width:
                return None
            cost = np.full((len(rest), width), math.inf)
            for r, j in enumerate(rest):
                for t, h in enumerate(heads):
                    if sr_ok[h, j]:
                        cost[r, t * slots:(t + 1) * slots] = cfg.rho * (1.0 - gamma[h]) - p_sr[h, j]
                cost[r, len(heads) * slots:] = 0.0
            try:
                rows, cols = linear_sum_assignment(cost)
            except ValueError:
                return None  # outage budget exhausted and some device unreachable
            member_cost = float(cost[rows, cols].sum())
        return ap_cost, member_cost

    for mask in range(1 << n):
        if mask % 256 == 0 and time.perf_counter() > deadline:
            raise TimeoutError(f"exact_solve: time_limit_s={cfg.time_limit_s} exceeded "
                               f"after {mask} of {1 << n} head sets")
        n_heads = mask.bit_count()
        if n_heads > n_aps * cfg.delta_lr:
            continue
        if n_heads + n_heads * cfg.delta_sr + outage_budget < n:
            continue  # cannot serve enough devices even at full capacity
        evaluated += 1
        parts = side_costs(mask)
        if parts is None:
            continue
        obj = parts[0] + parts[1]
        if obj < best_obj:
            best_obj = obj
            best_mask = mask

    if best_mask < 0:
        return ExactResult(solution=None, objective=math.nan, feasible=False,
                           n_candidate_sets=evaluated)

    # rebuild the winning assignment
    heads = [i for i in range(n) if best_mask >> i & 1]
    rest = [i for i in range(n) if not best_mask >> i & 1]
    head_of = [NONE] * n
    ap_of_head = []
    for h in heads:
        head_of[h] = h
    if heads:
        slots = min(cfg.delta_lr, len(heads))
        cost = np.full((len(heads), n_aps * slots), math.inf)
        for r, h in enumerate(heads):
            for m in range(n_aps):
                if lr_ok[m, h]:
                    cost[r, m * slots:(m + 1) * slots] = -p_lr[m, h]
        rows, cols = linear_sum_assignment(cost)
        ap_pick = dict(zip((heads[r] for r in rows), (int(c) // slots for c in cols)))
        ap_of_head = [ap_pick[h] for h in heads]
    if rest:
        slots = min(cfg.delta_sr, len(rest))
        width = len(heads) * slots + outage_budget
        cost = np.full((len(rest), width), math.inf)
        for r, j in enumerate(rest):
            for t, h in enumerate(heads):
                if sr_ok[h, j]:
                    cost[r, t * slots:(t + 1) * slots] = cfg.rho * (1.0 - gamma[h]) - p_sr[h, j]
            cost[r, len(heads) * slots:] = 0.0
        rows, cols = linear_sum_assignment(cost)
        for r, c in zip(rows, cols):
            if c < len(heads) * slots:
                head_of[rest[r]] = heads[c // slots]
    sol = ClusterSolution(n_devices=n, head_of=head_of, heads=heads, ap_of_head=ap_of_head)
    return ExactResult(solution=sol, objective=best_obj, feasible=True,
                       n_candidate_sets=evaluated)
