"""Path planner: integrate the world-frame waypoint from pixel errors."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .ips import IpsConfig, IpsOutput

APPLY_PER = ("pp_tick", "ips_tick")


@dataclass(frozen=True)
class PlannerConfig:
    """Planner gains and timing.

    ``alpha`` and ``beta`` are in metres per pixel.  ``apply_per`` picks
    whether a held IPS output is integrated on every planner tick
    (``pp_tick``) or only on the tick where a fresh frame arrives
    (``ips_tick``).
    """

    alpha: float = 0.003
    beta: float = 0.018
    z_h: float = 1.0
    t_pp: float = 0.005
    centered_tol: float = 1.0
    apply_per: str = "ips_tick"

    def __post_init__(self) -> None:
        if not self.alpha > 0 or not self.beta > 0:
            raise ConfigError("alpha and beta must be > 0")
        if not self.z_h > 0 or not self.t_pp > 0:
            raise ConfigError("z_h and t_pp must be > 0")
        if self.centered_tol < 0:
            raise ConfigError("centered_tol must be >= 0")
        if self.apply_per not in APPLY_PER:
            raise ConfigError(f"apply_per must be one of {APPLY_PER}, got {self.apply_per!r}")


@dataclass(frozen=True)
class Waypoint:
    x_w: float
    y_w: float
    z_w: float


def is_centered(ips: IpsOutput, tol: float) -> bool:
    return abs(ips.e_x) <= tol and abs(ips.e_y) <= tol


def plan_step(prev: Waypoint, ips: IpsOutput, cfg: PlannerConfig) -> Waypoint:
    """One planner update.

    Pixel axes map onto world axes one-to-one since heading is never changed.
    With no flag raised the waypoint is held.
    """
    if not all(math.isfinite(v) for v in (prev.x_w, prev.y_w, prev.z_w, ips.e_x, ips.e_y)):
        raise ValueError("non-finite planner input")
    if ips.flag_vtp:
        return Waypoint(prev.x_w + cfg.alpha * ips.e_x, prev.y_w + cfg.alpha * ips.e_y, cfg.z_h)
    if ips.flag_marker:
        if is_centered(ips, cfg.centered_tol):
            return Waypoint(prev.x_w, prev.y_w, 0.0)
        return Waypoint(prev.x_w + cfg.beta * ips.e_x, prev.y_w + cfg.beta * ips.e_y, cfg.z_h)
    return prev


def predicted_speed(cfg: PlannerConfig, ips_cfg: IpsConfig, alpha: float | None = None) -> float:
    """Waypoint speed when the error is pinned at the mean ring radius.

    Per-tick integration gives ``alpha / t_pp * (r_min + r_max) / 2``.
    """
    a = cfg.alpha if alpha is None else alpha
    return a / cfg.t_pp * (ips_cfg.r_min + ips_cfg.r_max) / 2
