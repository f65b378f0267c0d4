"""Four-state mission sequencer: take-off, following, end-marker, landing.

``Done`` and ``Failed`` are terminal bookkeeping states for the simulator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Phase(enum.Enum):
    TAKE_OFF = "TakeOff"
    FOLLOWING = "Following"
    END_MARKER = "EndMarker"
    LANDING = "Landing"
    DONE = "Done"
    FAILED = "Failed"

    @property
    def terminal(self) -> bool:
        return self in (Phase.DONE, Phase.FAILED)


# Allowed edges, self-loops included.
TRANSITIONS = {
    Phase.TAKE_OFF: {Phase.TAKE_OFF, Phase.FOLLOWING, Phase.FAILED},
    Phase.FOLLOWING: {Phase.FOLLOWING, Phase.END_MARKER, Phase.FAILED},
    Phase.END_MARKER: {Phase.END_MARKER, Phase.LANDING, Phase.FAILED},
    Phase.LANDING: {Phase.LANDING, Phase.DONE, Phase.FAILED},
    Phase.DONE: set(),
    Phase.FAILED: set(),
}

HOVER_TOL = 0.02
HOVER_RATE_TOL = 0.05
GROUND_TOL = 0.01
SETTLED_SPEED = 0.05  # horizontal speed below which a centred fix is trusted
LOST_TIMEOUT = 5.0


@dataclass(frozen=True)
class MissionState:
    value: Phase = Phase.TAKE_OFF
    entered_at: float = 0.0
    last_progress: float = 0.0  # last time a path or marker flag was seen


@dataclass(frozen=True)
class MissionInputs:
    hovering: bool = False
    flag_vtp: bool = False
    flag_marker: bool = False
    centered: bool = False
    landed: bool = False
    now: float = 0.0


def is_hovering(z: float, vz: float, z_h: float) -> bool:
    return abs(z - z_h) <= HOVER_TOL and abs(vz) <= HOVER_RATE_TOL


def is_settled(speed: float) -> bool:
    return speed <= SETTLED_SPEED


def is_landed(z: float) -> bool:
    return z <= GROUND_TOL


def _move(state: MissionState, to: Phase, now: float, progress: float) -> MissionState:
    if to is state.value:
        return MissionState(state.value, state.entered_at, progress)
    return MissionState(to, now, progress)


def step_mission(state: MissionState, inputs: MissionInputs,
                 lost_timeout: float = LOST_TIMEOUT) -> MissionState:
    if state.value.terminal:
        raise ValueError(f"mission already finished ({state.value.value})")
    now = inputs.now
    seen = inputs.flag_vtp or inputs.flag_marker
    progress = now if seen else state.last_progress
    s = state.value

    if s is Phase.TAKE_OFF and inputs.hovering and inputs.flag_vtp:
        return _move(state, Phase.FOLLOWING, now, progress)
    if s is Phase.FOLLOWING and not inputs.flag_vtp and inputs.flag_marker:
        return _move(state, Phase.END_MARKER, now, progress)
    if s is Phase.END_MARKER and inputs.centered:
        return _move(state, Phase.LANDING, now, progress)
    if s is Phase.LANDING and inputs.landed:
        return _move(state, Phase.DONE, now, progress)

    if now - max(progress, state.entered_at) >= lost_timeout:
        return _move(state, Phase.FAILED, now, progress)
    return _move(state, s, now, progress)
