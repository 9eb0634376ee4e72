"""Cluster solutions in the representation shared by every solver.

head_of[i] is the head device id serving device i: a head points at itself,
an unserved device holds NONE. heads is the ascending list of head ids and
ap_of_head runs parallel to it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

NONE = -1


class SolutionError(ValueError):
    """Malformed solution file or inconsistent assignment structure."""


@dataclass
class ClusterSolution:
    n_devices: int
    head_of: list[int]
    heads: list[int]
    ap_of_head: list[int]

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.n_devices < 1:
            raise SolutionError("n_devices must be >= 1")
        if len(self.head_of) != self.n_devices:
            raise SolutionError(f"head_of has {len(self.head_of)} entries for {self.n_devices} devices")
        if len(self.ap_of_head) != len(self.heads):
            raise SolutionError("ap_of_head must run parallel to heads")
        if self.heads != sorted(set(self.heads)):
            raise SolutionError("heads must be strictly ascending device ids")
        head_set = set(self.heads)
        for h in self.heads:
            if not 0 <= h < self.n_devices:
                raise SolutionError(f"head id {h} out of range")
            if self.head_of[h] != h:
                raise SolutionError(f"head {h} has head_of[{h}] = {self.head_of[h]}, expected itself")
        for i, h in enumerate(self.head_of):
            if h == NONE:
                continue
            if h not in head_set:
                raise SolutionError(f"head_of[{i}] = {h} is not a declared head")

    def members_of(self, head: int) -> list[int]:
        """Member device ids of a cluster, excluding the head itself."""
        return [i for i, h in enumerate(self.head_of) if h == head and i != head]

    def ap_of(self, head: int) -> int:
        return self.ap_of_head[self.heads.index(head)]

    @property
    def outage(self) -> list[int]:
        return [i for i, h in enumerate(self.head_of) if h == NONE]

    @property
    def n_served(self) -> int:
        return self.n_devices - len(self.outage)

    def cluster_sizes(self) -> dict[int, int]:
        """Head id -> cluster size including the head."""
        return {h: 1 + len(self.members_of(h)) for h in self.heads}


def save_solution(solution: ClusterSolution, path: str | Path) -> None:
    doc = {
        "n_devices": solution.n_devices,
        "heads": solution.heads,
        "head_of": solution.head_of,
        "ap_of_head": solution.ap_of_head,
        "outage": solution.outage,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


_SOLUTION_KEYS = {"n_devices", "heads", "head_of", "ap_of_head", "outage"}


def load_solution(path: str | Path) -> ClusterSolution:
    """Parse and structurally validate a solution file."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise SolutionError(f"{path}: not valid JSON (line {e.lineno}, col {e.colno}: {e.msg})") from e
    if not isinstance(doc, dict):
        raise SolutionError(f"{path}: top level must be an object")
    extra = set(doc) - _SOLUTION_KEYS
    if extra:
        raise SolutionError(f"solution has unknown fields: {sorted(extra)}")
    for key in ("heads", "head_of", "ap_of_head"):
        if key not in doc or not isinstance(doc[key], list):
            raise SolutionError(f"solution.{key} missing or not a list")
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in doc[key]):
            raise SolutionError(f"solution.{key} must contain only integers")
    n = doc.get("n_devices", len(doc["head_of"]))
    if not isinstance(n, int) or isinstance(n, bool):
        raise SolutionError("solution.n_devices must be an integer")
    sol = ClusterSolution(
        n_devices=n,
        head_of=list(doc["head_of"]),
        heads=list(doc["heads"]),
        ap_of_head=list(doc["ap_of_head"]),
    )
    if "outage" in doc and sorted(doc["outage"]) != sol.outage:
        raise SolutionError("solution.outage disagrees with head_of")
    return sol
