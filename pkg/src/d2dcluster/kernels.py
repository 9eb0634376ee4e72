"""Compiled inner loops shared by the force heuristic and the k-means baseline.

Everything here works on plain float64/int64 arrays so numba can cache the
compiled machine code between runs.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def greedy_capacity_assign(dev_xy, cen_xy, capacity):
    """Assign each device (in id order) to its nearest centroid with spare capacity.

    Sequential semantics matter: earlier devices can fill a centroid and push
    later ones elsewhere. Returns (assign, degree); assign[i] is -1 when every
    centroid is already full. Distance ties keep the lowest centroid index.
    """
    n = dev_xy.shape[0]
    k = cen_xy.shape[0]
    assign = np.full(n, -1, dtype=np.int64)
    degree = np.zeros(k, dtype=np.int64)
    for i in range(n):
        best = -1
        best_d2 = np.inf
        for c in range(k):
            if degree[c] >= capacity:
                continue
            dx = dev_xy[i, 0] - cen_xy[c, 0]
            dy = dev_xy[i, 1] - cen_xy[c, 1]
            d2 = dx * dx + dy * dy
            if d2 < best_d2:
                best_d2 = d2
                best = c
        if best >= 0:
            assign[i] = best
            degree[best] += 1
    return assign, degree


@njit(cache=True)
def centroid_forces(cen_xy, cen_q, dev_xy, dev_q, assign, kappa, dist_floor, attract_all):
    """Net electrostatic force on every centroid.

    Centroid-centroid terms are mutual repulsion (both charges positive),
    device terms attraction (device charges negative). A pair closer than
    dist_floor contributes nothing: the direction is numerically meaningless
    there. attract_all=True pulls every device on every centroid instead of
    members only.
    """
    K = cen_xy.shape[0]
    n = dev_xy.shape[0]
    force = np.zeros((K, 2), dtype=np.float64)
    for a in range(K):
        fx = 0.0
        fy = 0.0
        for b in range(K):
            if b == a:
                continue
            dx = cen_xy[a, 0] - cen_xy[b, 0]
            dy = cen_xy[a, 1] - cen_xy[b, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if d < dist_floor:
                continue
            s = kappa * cen_q[a] * cen_q[b] / (d * d * d)
            fx += s * dx
            fy += s * dy
        force[a, 0] = fx
        force[a, 1] = fy
    if attract_all:
        for a in range(K):
            for j in range(n):
                dx = cen_xy[a, 0] - dev_xy[j, 0]
                dy = cen_xy[a, 1] - dev_xy[j, 1]
                d = math.sqrt(dx * dx + dy * dy)
                if d < dist_floor:
                    continue
                s = kappa * cen_q[a] * dev_q[j] / (d * d * d)
                force[a, 0] += s * dx
                force[a, 1] += s * dy
    else:
        for j in range(n):
            a = assign[j]
            if a < 0:
                continue
            dx = cen_xy[a, 0] - dev_xy[j, 0]
            dy = cen_xy[a, 1] - dev_xy[j, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if d < dist_floor:
                continue
            s = kappa * cen_q[a] * dev_q[j] / (d * d * d)
            force[a, 0] += s * dx
            force[a, 1] += s * dy
    return force
