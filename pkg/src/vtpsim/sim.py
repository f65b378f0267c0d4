"""Deterministic multi-rate closed loop: camera -> IPS -> planner -> vehicle.

The planner, mission and vehicle advance every ``t_pp``.  A camera frame is
rendered and processed every ``t_ips`` (first one at t = 0); its output is
held until the next frame.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import imaging
from .errors import ConfigError
from .ips import IpsConfig, IpsOutput, VtpTrackerState, process_frame, stages
from .mission import (
    LOST_TIMEOUT,
    MissionInputs,
    MissionState,
    Phase,
    is_hovering,
    is_settled,
    is_landed,
    step_mission,
)
from .planner import PlannerConfig, Waypoint, is_centered, plan_step
from .vehicle import DroneState, VehicleParams, step_vehicle
from .world import CameraModel, TrackSpec, path_distances, render_frame

LOG_COLUMNS = (
    "t", "x", "y", "z", "vx", "vy", "vz", "v_d",
    "wp_x", "wp_y", "wp_z", "e_x", "e_y", "flag_vtp", "flag_marker", "state",
)


@dataclass(frozen=True)
class SimConfig:
    track: TrackSpec
    ips: IpsConfig = field(default_factory=IpsConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    camera: CameraModel = field(default_factory=CameraModel)
    t_ips: float = 0.2
    max_time: float = 120.0
    lost_timeout: float = LOST_TIMEOUT

    def __post_init__(self) -> None:
        if not self.max_time > 0:
            raise ConfigError("max_time must be > 0")
        if not self.lost_timeout > 0:
            raise ConfigError("lost_timeout must be > 0")
        if not math.isclose(self.vehicle.dt, self.t_pp, rel_tol=1e-12):
            raise ConfigError("vehicle.dt must equal planner.t_pp")
        ratio = self.t_ips / self.t_pp
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("t_ips must be an integer multiple of t_pp")
        if (self.camera.frame_w, self.camera.frame_h) != (self.ips.frame_w, self.ips.frame_h):
            raise ConfigError("camera and IPS frame sizes differ")

    @property
    def t_pp(self) -> float:
        return self.planner.t_pp

    @property
    def ips_ratio(self) -> int:
        return round(self.t_ips / self.t_pp)


_SECTIONS = {"ips": "ips", "planner": "planner", "vehicle": "vehicle", "camera": "camera"}


def _coerce(current, raw: str, key: str):
    if isinstance(raw, str):
        if isinstance(current, bool):
            if raw.lower() in ("1", "true", "yes"):
                return True
            if raw.lower() in ("0", "false", "no"):
                return False
            raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
        if isinstance(current, int):
            try:
                return int(raw)
            except ValueError:
                raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
        if isinstance(current, float):
            try:
                return float(raw)
            except ValueError:
                raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
        if isinstance(current, str):
            return raw
        raise ConfigError(f"{key}: cannot be overridden from the command line")
    return raw


def with_overrides(cfg: SimConfig, overrides: dict[str, object]) -> SimConfig:
    """Apply dotted-key overrides such as ``{"planner.alpha": "0.004"}``.

    ``t_pp`` is kept in step across planner and vehicle.
    """
    top: dict[str, object] = {}
    nested: dict[str, dict[str, object]] = {}
    for key, raw in overrides.items():
        if key == "t_pp":
            val = _coerce(cfg.t_pp, raw, key)
            nested.setdefault("planner", {})["t_pp"] = val
            nested.setdefault("vehicle", {})["dt"] = val
            continue
        section, _, name = key.partition(".")
        if name:
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section {section!r}")
            sub = getattr(cfg, section)
            names = {f.name for f in dataclasses.fields(sub)}
            if name not in names:
                raise ConfigError(f"unknown key {key!r}")
            nested.setdefault(section, {})[name] = _coerce(getattr(sub, name), raw, key)
        else:
            if key not in ("t_ips", "max_time", "lost_timeout"):
                raise ConfigError(f"unknown key {key!r}")
            top[key] = _coerce(getattr(cfg, key), raw, key)
    for section, values in nested.items():
        top[section] = dataclasses.replace(getattr(cfg, section), **values)
    return dataclasses.replace(cfg, **top)


@dataclass
class TrajectoryLog:
    rows: list[tuple] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = LOG_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows])

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv(self, metrics: RunMetrics | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        if metrics is not None:
            for k, v in metrics.as_dict().items():
                buf.write(f"# {k}={_fmt(v)}\n")
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class RunMetrics:
    outcome: str
    mission_time: float
    mean_path_error: float
    max_path_error: float
    landing_offset: float
    following_time: float

    def as_dict(self) -> dict[str, object]:
        return dataclasses.asdict(self)


def read_log_csv(text: str) -> tuple[list[dict[str, str]], dict[str, str]]:
    """Parse a log written by ``TrajectoryLog.to_csv``: rows and footer metrics."""
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    footer = dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))
    return list(csv.DictReader(body)), footer


def _metrics(cfg: SimConfig, log: TrajectoryLog, outcome: str) -> RunMetrics:
    phases = log.column("state")
    xy = np.column_stack([log.column("x"), log.column("y")])
    following = phases == Phase.FOLLOWING.value
    if following.any():
        err = path_distances(cfg.track, xy[following])
        mean_err, max_err = float(err.mean()), float(err.max())
    else:
        mean_err = max_err = math.nan
    offset = math.dist(xy[-1], cfg.track.marker_center)
    return RunMetrics(
        outcome=outcome,
        mission_time=float(log.rows[-1][0]),
        mean_path_error=mean_err,
        max_path_error=max_err,
        landing_offset=offset,
        following_time=round(float(following.sum() * cfg.t_pp), 9),
    )


def run(cfg: SimConfig, dump_dir: str | Path | None = None) -> tuple[TrajectoryLog, RunMetrics]:
    """Simulate one mission until Done, Failed or ``max_time``."""
    track = cfg.track
    pl = cfg.planner
    sx, sy = track.start_pose
    drone = DroneState(sx, sy, 0.0)
    wp = Waypoint(sx, sy, pl.z_h)
    mission = MissionState(Phase.TAKE_OFF, 0.0, 0.0)
    tracker = VtpTrackerState()
    ips_out = IpsOutput()
    log = TrajectoryLog()
    if dump_dir is not None:
        dump_dir = Path(dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)

    n_ticks = math.ceil(cfg.max_time / cfg.t_pp - 1e-9)
    outcome = "Timeout"
    for k in range(n_ticks):
        t = k * cfg.t_pp
        hovering = is_hovering(drone.z, drone.vz, pl.z_h)
        fresh = k % cfg.ips_ratio == 0
        if fresh:
            phase = mission.value
            # camera is only used once airborne at cruise height, never while landing
            if phase is Phase.LANDING or (phase is Phase.TAKE_OFF and not hovering):
                ips_out = IpsOutput(theta=tracker.prev_theta)
            else:
                frame = render_frame(track, (drone.x, drone.y), drone.z, cfg.camera)
                if dump_dir is not None:
                    _dump(dump_dir, k // cfg.ips_ratio, frame, tracker, cfg.ips)
                ips_out = process_frame(frame, tracker, cfg.ips,
                                        track_path=phase is not Phase.END_MARKER)

        centered = (ips_out.flag_marker and is_centered(ips_out, pl.centered_tol)
                    and is_settled(drone.speed))
        mission = step_mission(mission, MissionInputs(
            hovering=hovering,
            flag_vtp=ips_out.flag_vtp,
            flag_marker=ips_out.flag_marker,
            centered=centered,
            landed=is_landed(drone.z),
            now=t,
        ), cfg.lost_timeout)

        phase = mission.value
        if phase is Phase.TAKE_OFF:
            wp = Waypoint(sx, sy, pl.z_h)
        elif phase in (Phase.FOLLOWING, Phase.END_MARKER):
            if pl.apply_per == "pp_tick" or fresh:
                wp = plan_step(wp, ips_out, pl)
            # descent starts only once the mission accepts the centring
            wp = Waypoint(wp.x_w, wp.y_w, pl.z_h)
        elif phase is Phase.LANDING:
            wp = Waypoint(wp.x_w, wp.y_w, 0.0)

        log.rows.append((
            t, drone.x, drone.y, drone.z, drone.vx, drone.vy, drone.vz, drone.speed,
            wp.x_w, wp.y_w, wp.z_w, ips_out.e_x, ips_out.e_y,
            ips_out.flag_vtp, ips_out.flag_marker, phase.value,
        ))
        if phase.terminal:
            outcome = phase.value
            break
        drone = step_vehicle(drone, wp, cfg.vehicle)

    return log, _metrics(cfg, log, outcome)


def _dump(dump_dir: Path, idx: int, frame, tracker: VtpTrackerState, ips_cfg: IpsConfig) -> None:
    st = stages(frame, tracker, ips_cfg)
    imaging.write_ppm(dump_dir / f"frame_{idx:05d}.ppm", frame)
    imaging.write_pgm(dump_dir / f"frame_{idx:05d}_gray.pgm", st.gray)
    imaging.write_pgm(dump_dir / f"frame_{idx:05d}_binary.pgm", st.binary)
    imaging.write_pgm(dump_dir / f"frame_{idx:05d}_eroded.pgm", st.eroded)
    imaging.write_pgm(dump_dir / f"frame_{idx:05d}_mask.pgm", st.mask)


def write_run(out_dir: str | Path, log: TrajectoryLog, metrics: RunMetrics) -> None:
    """Write ``log.csv`` (with metrics footer) and ``metrics.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "log.csv").write_text(log.to_csv(metrics), encoding="utf-8")
    (out / "metrics.json").write_text(
        json.dumps(metrics.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- alpha sweeps -----------------------------------------------------------

@dataclass(frozen=True)
class SweepEntry:
    alpha: float
    metrics: RunMetrics | None
    error: str | None = None


def _sweep_one(cfg: SimConfig, alpha: float) -> SweepEntry:
    try:
        c = dataclasses.replace(cfg, planner=dataclasses.replace(cfg.planner, alpha=alpha))
        return SweepEntry(alpha, run(c)[1])
    except Exception as exc:  # one bad run must not abort the sweep
        return SweepEntry(alpha, None, f"{type(exc).__name__}: {exc}")


def sweep_alpha(cfg: SimConfig, alphas, jobs: int = 1) -> list[SweepEntry]:
    """Independent runs that differ only in alpha, returned in input order."""
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ConfigError("alpha list is empty")
    if any(not a > 0 for a in alphas):
        raise ConfigError("every alpha must be > 0")
    if jobs <= 1 or len(alphas) == 1:
        return [_sweep_one(cfg, a) for a in alphas]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_one, [cfg] * len(alphas), alphas))


SWEEP_COLUMNS = ("alpha", "outcome", "mission_time", "mean_path_error",
                 "max_path_error", "landing_offset", "following_time", "error")


def sweep_csv(entries: list[SweepEntry]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for e in entries:
        if e.metrics is None:
            w.writerow([_fmt(e.alpha), "Error", "", "", "", "", "", e.error])
        else:
            m = e.metrics
            w.writerow([_fmt(e.alpha), m.outcome, _fmt(m.mission_time), _fmt(m.mean_path_error),
                        _fmt(m.max_path_error), _fmt(m.landing_offset),
                        _fmt(m.following_time), ""])
    return buf.getvalue()
