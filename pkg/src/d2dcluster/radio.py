"""Link-budget model and per-device reliability.

Power-law path loss anchored at a reference distance: below ref_distance the
received power saturates at tx_power * ref_gain instead of blowing up. SNR is
linear (not dB) throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario


@dataclass(frozen=True)
class RadioParams:
    ap_tx_power: float = 10.0      # W, long-range downlink
    dev_tx_power: float = 0.22     # W, short-range device-to-device
    noise_power: float = 1e-9      # W, receiver noise floor
    bandwidth_hz: float = 20e6
    pathloss_exp: float = 3.0
    ref_gain: float = 1e-4         # channel gain at the reference distance
    ref_distance: float = 1.0      # m
    snr_min_lr: float = 1.0        # admission threshold, long-range links
    snr_min_sr: float = 1.0        # admission threshold, short-range links
    battery_floor: float = 0.3     # battery fraction below which a device won't cooperate

    def __post_init__(self):
        if self.ap_tx_power <= 0 or self.dev_tx_power <= 0:
            raise ValueError("transmit powers must be positive")
        if self.noise_power <= 0:
            raise ValueError("noise_power must be positive")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.pathloss_exp <= 0:
            raise ValueError("pathloss_exp must be positive")
        if self.ref_gain <= 0 or self.ref_distance <= 0:
            raise ValueError("ref_gain and ref_distance must be positive")
        if not 0.0 <= self.battery_floor < 1.0:
            raise ValueError("battery_floor must be in [0, 1)")


def received_power(tx_power: float, distance: float, params: RadioParams) -> float:
    """Received power in watts over a link of the given length."""
    d = max(distance, params.ref_distance)
    return tx_power * params.ref_gain * (d / params.ref_distance) ** (-params.pathloss_exp)


def snr(rx_power: float, params: RadioParams) -> float:
    return rx_power / params.noise_power


def link_snr(tx_power: float, distance: float, params: RadioParams) -> float:
    return snr(received_power(tx_power, distance, params), params)


def bitrate(snr_value: float, params: RadioParams) -> float:
    """Shannon-capacity bitrate in bit/s for a link at the given linear SNR."""
    if snr_value < 0:
        raise ValueError("snr_value must be >= 0")
    return params.bandwidth_hz * math.log2(1.0 + snr_value)


def device_reliability(battery_frac: float, rating: float, battery_floor: float = 0.3) -> float:
    """Cooperation reliability in [0, 1].

    Zero at or below the battery floor, then the rating scaled by how much
    battery headroom remains above the floor, saturating at the full rating.
    """
    headroom = (battery_frac - battery_floor) / (1.0 - battery_floor)
    return rating * min(max(headroom, 0.0), 1.0)


def reliabilities(scenario: Scenario, params: RadioParams) -> np.ndarray:
    """Per-device reliability vector, row i = device id i."""
    head = (scenario.battery_fracs() - params.battery_floor) / (1.0 - params.battery_floor)
    return scenario.ratings() * np.clip(head, 0.0, 1.0)
