"""Network scenarios: the area, device placements/state, and access points.

A Scenario is immutable after construction so it can be shared freely between
solvers running on the same instance. Generation is fully determined by the
seed; files round-trip byte-identically through save/load.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np


class ScenarioError(ValueError):
    """Malformed scenario file or violated placement invariant."""


@dataclass(frozen=True)
class Device:
    id: int
    x: float
    y: float
    battery_frac: float  # remaining charge as fraction of full capacity, in [0, 1]
    rating: float = 1.0  # cooperation history score in [0, 1]


@dataclass(frozen=True)
class AccessPoint:
    id: int
    x: float
    y: float
    tx_power: float  # transmit power in watts


@dataclass(frozen=True)
class Scenario:
    area_width: float
    area_height: float
    devices: tuple[Device, ...]
    aps: tuple[AccessPoint, ...]
    seed: int = 0

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    @property
    def n_aps(self) -> int:
        return len(self.aps)

    def device_xy(self) -> np.ndarray:
        """(N, 2) array of device positions, row i = device id i."""
        return np.array([(d.x, d.y) for d in self.devices], dtype=np.float64)

    def ap_xy(self) -> np.ndarray:
        return np.array([(a.x, a.y) for a in self.aps], dtype=np.float64)

    def battery_fracs(self) -> np.ndarray:
        return np.array([d.battery_frac for d in self.devices], dtype=np.float64)

    def ratings(self) -> np.ndarray:
        return np.array([d.rating for d in self.devices], dtype=np.float64)

    def validate(self) -> None:
        if self.area_width <= 0 or self.area_height <= 0:
            raise ScenarioError("area dimensions must be positive")
        if not self.devices:
            raise ScenarioError("scenario has no devices")
        if not self.aps:
            raise ScenarioError("scenario has no access points")
        for i, d in enumerate(self.devices):
            if d.id != i:
                raise ScenarioError(f"devices[{i}].id = {d.id}, ids must be 0..N-1 in order")
            if not (0.0 <= d.x <= self.area_width and 0.0 <= d.y <= self.area_height):
                raise ScenarioError(f"devices[{i}] at ({d.x}, {d.y}) outside area")
            if not 0.0 <= d.battery_frac <= 1.0:
                raise ScenarioError(f"devices[{i}].battery_frac = {d.battery_frac} outside [0, 1]")
            if not 0.0 <= d.rating <= 1.0:
                raise ScenarioError(f"devices[{i}].rating = {d.rating} outside [0, 1]")
        for m, a in enumerate(self.aps):
            if a.id != m:
                raise ScenarioError(f"aps[{m}].id = {a.id}, ids must be 0..M-1 in order")
            if not (0.0 <= a.x <= self.area_width and 0.0 <= a.y <= self.area_height):
                raise ScenarioError(f"aps[{m}] at ({a.x}, {a.y}) outside area")
            if a.tx_power <= 0:
                raise ScenarioError(f"aps[{m}].tx_power = {a.tx_power} must be positive")


def ap_grid_positions(n_aps: int, area_width: float, area_height: float) -> list[tuple[float, float]]:
    """Deterministic AP layout: cell centers of the smallest near-square grid.

    One AP lands at the area center; four land at the quarter points, etc.
    """
    if n_aps < 1:
        raise ValueError("n_aps must be >= 1")
    cols = math.ceil(math.sqrt(n_aps))
    rows = math.ceil(n_aps / cols)
    out = []
    for m in range(n_aps):
        r, c = divmod(m, cols)
        out.append(((c + 0.5) * area_width / cols, (r + 0.5) * area_height / rows))
    return out


def generate_scenario(
    n_devices: int,
    n_aps: int = 1,
    area: tuple[float, float] = (100.0, 100.0),
    battery_range: tuple[float, float] = (0.1, 0.9),
    rating: float = 1.0,
    ap_tx_power: float = 10.0,
    seed: int = 0,
) -> Scenario:
    """Draw a random instance: devices uniform over the area, APs on the grid.

    Battery fractions are uniform over battery_range. All randomness comes
    from the seed, so equal arguments give an identical scenario.
    """
    if n_devices < 1:
        raise ValueError("n_devices must be >= 1")
    lo, hi = battery_range
    if not (0.0 <= lo <= hi <= 1.0):
        raise ValueError(f"battery_range {battery_range} must satisfy 0 <= lo <= hi <= 1")
    w, h = area
    rng = np.random.default_rng(seed)
    xy = rng.uniform((0.0, 0.0), (w, h), size=(n_devices, 2))
    batt = rng.uniform(lo, hi, size=n_devices)
    devices = tuple(
        Device(id=i, x=float(xy[i, 0]), y=float(xy[i, 1]), battery_frac=float(batt[i]), rating=rating)
        for i in range(n_devices)
    )
    aps = tuple(
        AccessPoint(id=m, x=x, y=y, tx_power=ap_tx_power)
        for m, (x, y) in enumerate(ap_grid_positions(n_aps, w, h))
    )
    sc = Scenario(area_width=w, area_height=h, devices=devices, aps=aps, seed=seed)
    sc.validate()
    return sc


_DEVICE_KEYS = {"id", "x", "y", "battery_frac", "rating"}
_AP_KEYS = {"id", "x", "y", "tx_power"}
_TOP_KEYS = {"area_width", "area_height", "seed", "devices", "aps"}


def _require_number(obj: dict, key: str, where: str) -> float:
    if key not in obj:
        raise ScenarioError(f"{where} missing required field '{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}.{key} = {v!r} is not a number")
    return float(v)


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ScenarioError(f"{where} has unknown fields: {sorted(extra)}")


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    doc = {
        "area_width": scenario.area_width,
        "area_height": scenario.area_height,
        "seed": scenario.seed,
        "devices": [asdict(d) for d in scenario.devices],
        "aps": [asdict(a) for a in scenario.aps],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file. Unknown fields are an error."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: not valid JSON (line {e.lineno}, col {e.colno}: {e.msg})") from e
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    _reject_unknown(doc, _TOP_KEYS, "scenario")
    for key in ("devices", "aps"):
        if key not in doc or not isinstance(doc[key], list):
            raise ScenarioError(f"scenario.{key} missing or not a list")
    devices = []
    for i, rec in enumerate(doc["devices"]):
        where = f"devices[{i}]"
        if not isinstance(rec, dict):
            raise ScenarioError(f"{where} is not an object")
        _reject_unknown(rec, _DEVICE_KEYS, where)
        devices.append(Device(
            id=int(_require_number(rec, "id", where)),
            x=_require_number(rec, "x", where),
            y=_require_number(rec, "y", where),
            battery_frac=_require_number(rec, "battery_frac", where),
            rating=_require_number(rec, "rating", where) if "rating" in rec else 1.0,
        ))
    aps = []
    for m, rec in enumerate(doc["aps"]):
        where = f"aps[{m}]"
        if not isinstance(rec, dict):
            raise ScenarioError(f"{where} is not an object")
        _reject_unknown(rec, _AP_KEYS, where)
        aps.append(AccessPoint(
            id=int(_require_number(rec, "id", where)),
            x=_require_number(rec, "x", where),
            y=_require_number(rec, "y", where),
            tx_power=_require_number(rec, "tx_power", where),
        ))
    sc = Scenario(
        area_width=_require_number(doc, "area_width", "scenario"),
        area_height=_require_number(doc, "area_height", "scenario"),
        devices=tuple(devices),
        aps=tuple(aps),
        seed=int(_require_number(doc, "seed", "scenario")) if "seed" in doc else 0,
    )
    sc.validate()
    return sc
