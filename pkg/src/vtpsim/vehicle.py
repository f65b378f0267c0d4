"""Closed-loop quad-rotor stand-in: per-axis second-order waypoint tracker."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .planner import Waypoint


@dataclass(frozen=True)
class DroneState:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0

    @property
    def speed(self) -> float:
        """Horizontal speed norm."""
        return math.hypot(self.vx, self.vy)


@dataclass(frozen=True)
class VehicleParams:
    natural_frequency: float = 6.0
    damping_ratio: float = 0.9
    v_max: float = 1.5
    dt: float = 0.005

    def __post_init__(self) -> None:
        if min(self.natural_frequency, self.damping_ratio, self.v_max, self.dt) <= 0:
            raise ConfigError("vehicle parameters must all be > 0")
        if self.dt * self.natural_frequency >= 0.5:
            raise ConfigError("dt * natural_frequency must be < 0.5 for a stable step")


def step_vehicle(state: DroneState, wp: Waypoint, p: VehicleParams) -> DroneState:
    """Semi-implicit Euler step of x'' = wn^2 (x_w - x) - 2 zeta wn x'.

    Horizontal speed is clamped to ``v_max`` keeping its direction; the
    ground stops the vertical axis at z = 0.
    """
    wn, zeta, dt = p.natural_frequency, p.damping_ratio, p.dt
    k, c = wn * wn, 2 * zeta * wn

    vx = state.vx + (k * (wp.x_w - state.x) - c * state.vx) * dt
    vy = state.vy + (k * (wp.y_w - state.y) - c * state.vy) * dt
    vz = state.vz + (k * (wp.z_w - state.z) - c * state.vz) * dt

    speed = math.hypot(vx, vy)
    if speed > p.v_max:
        vx *= p.v_max / speed
        vy *= p.v_max / speed

    z = state.z + vz * dt
    if z < 0.0:
        z, vz = 0.0, 0.0
    return DroneState(state.x + vx * dt, state.y + vy * dt, z, vx, vy, vz)
