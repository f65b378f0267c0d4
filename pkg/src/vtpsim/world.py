"""Track geometry, track files, the downward camera renderer and path distance.

World coordinates are metres.  The camera is aligned with the world axes
(heading is fixed), so image rows follow world ``x`` and image columns
follow world ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, TrackError
from .imaging import PixelFrame

JOINT_TOL = 1e-9


@dataclass(frozen=True)
class Line:
    p0: tuple[float, float]
    p1: tuple[float, float]

    @property
    def start(self) -> tuple[float, float]:
        return self.p0

    @property
    def end(self) -> tuple[float, float]:
        return self.p1

    @property
    def length(self) -> float:
        return math.dist(self.p0, self.p1)

    def distance(self, pts: np.ndarray) -> np.ndarray:
        a = np.asarray(self.p0, dtype=np.float64)
        d = np.asarray(self.p1, dtype=np.float64) - a
        rel = pts - a
        dd = float(d @ d)
        if dd == 0.0:
            return np.hypot(rel[..., 0], rel[..., 1])
        t = np.clip((rel @ d) / dd, 0.0, 1.0)
        diff = rel - t[..., None] * d
        return np.hypot(diff[..., 0], diff[..., 1])

    def sample(self, step: float) -> np.ndarray:
        n = max(1, math.ceil(self.length / step))
        t = np.linspace(0.0, 1.0, n + 1)[:, None]
        return np.asarray(self.p0) + t * (np.asarray(self.p1) - np.asarray(self.p0))

    def to_text(self) -> str:
        return "line {!r} {!r} {!r} {!r}".format(*self.p0, *self.p1)


@dataclass(frozen=True)
class Arc:
    """Circular arc swept from ``angle0`` to ``angle1`` (either direction)."""

    center: tuple[float, float]
    radius: float
    angle0: float
    angle1: float

    def _point(self, a: float) -> tuple[float, float]:
        cx, cy = self.center
        return (cx + self.radius * math.cos(a), cy + self.radius * math.sin(a))

    @property
    def start(self) -> tuple[float, float]:
        return self._point(self.angle0)

    @property
    def end(self) -> tuple[float, float]:
        return self._point(self.angle1)

    @property
    def sweep(self) -> float:
        return self.angle1 - self.angle0

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    def distance(self, pts: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=np.float64)
        rel = pts - c
        rho = np.hypot(rel[..., 0], rel[..., 1])
        phi = np.arctan2(rel[..., 1], rel[..., 0])
        direction = 1.0 if self.sweep >= 0 else -1.0
        along = np.remainder(direction * (phi - self.angle0), 2 * np.pi)
        inside = along <= abs(self.sweep)
        s, e = np.asarray(self.start), np.asarray(self.end)
        to_ends = np.minimum(np.hypot(*np.moveaxis(pts - s, -1, 0)),
                             np.hypot(*np.moveaxis(pts - e, -1, 0)))
        return np.where(inside, np.abs(rho - self.radius), to_ends)

    def sample(self, step: float) -> np.ndarray:
        n = max(1, math.ceil(self.length / step))
        a = np.linspace(self.angle0, self.angle1, n + 1)
        return np.column_stack([self.center[0] + self.radius * np.cos(a),
                                self.center[1] + self.radius * np.sin(a)])

    def to_text(self) -> str:
        return "arc {!r} {!r} {!r} {!r} {!r}".format(
            *self.center, self.radius, self.angle0, self.angle1)


Segment = Line | Arc


@dataclass(frozen=True)
class TrackSpec:
    segments: tuple[Segment, ...]
    marker_center: tuple[float, float]
    marker_diameter: float
    path_width: float = 0.05
    path_color: tuple[int, int, int] = (255, 0, 0)
    background_color: tuple[int, int, int] = (70, 150, 70)
    start_pose: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not self.segments:
            raise TrackError("no segments")
        if not self.path_width > 0:
            raise TrackError("path width must be > 0")
        if not self.marker_diameter > 0:
            raise TrackError("marker diameter must be > 0")
        for i, (a, b) in enumerate(zip(self.segments, self.segments[1:]), start=1):
            gap = math.dist(a.end, b.start)
            if gap > JOINT_TOL:
                raise TrackError(f"segments {i} and {i + 1} do not join (gap {gap:.3g} m)")
        if math.dist(self.segments[-1].end, self.marker_center) > JOINT_TOL:
            raise TrackError("marker must sit at the end of the last segment")
        for rgb in (self.path_color, self.background_color):
            if len(rgb) != 3 or not all(0 <= c <= 255 for c in rgb):
                raise TrackError(f"bad color {rgb}")
        if self.start_pose is None:
            object.__setattr__(self, "start_pose", tuple(self.segments[0].start))

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def marker_radius(self) -> float:
        return self.marker_diameter / 2

    def to_text(self) -> str:
        lines = [
            f"width {self.path_width!r}",
            "color {} {} {}".format(*self.path_color),
            "background {} {} {}".format(*self.background_color),
            "start {!r} {!r}".format(*self.start_pose),
        ]
        lines += [s.to_text() for s in self.segments]
        lines.append("marker {!r} {!r} {!r}".format(*self.marker_center, self.marker_diameter))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CameraModel:
    scale: float = 100.0  # pixels per metre at ref_altitude
    frame_w: int = 160
    frame_h: int = 120
    ref_altitude: float = 1.0

    def __post_init__(self) -> None:
        if not self.scale > 0 or not self.ref_altitude > 0:
            raise ConfigError("camera scale and reference altitude must be > 0")
        if self.frame_w < 1 or self.frame_h < 1:
            raise ConfigError("camera frame size must be positive")


# -- track files ------------------------------------------------------------

_ARITY = {"width": 1, "color": 3, "background": 3, "start": 2,
          "line": 4, "arc": 5, "marker": 3}


def parse_track(text: str) -> TrackSpec:
    """Parse the line-based track format.

    Directives: ``width``, ``color``, ``background``, ``start``, ``line``,
    ``arc``, ``marker``; ``#`` starts a comment.
    """
    segments: list[Segment] = []
    seg_lines: list[int] = []
    opts: dict = {}
    marker = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        word, *args = body.split()
        if word not in _ARITY:
            raise TrackError(f"unknown directive {word!r}", lineno)
        if len(args) != _ARITY[word]:
            raise TrackError(f"{word} takes {_ARITY[word]} values, got {len(args)}", lineno)
        try:
            vals = [float(a) for a in args]
        except ValueError:
            raise TrackError(f"non-numeric value in {word!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise TrackError("non-finite value", lineno)

        if word == "width":
            opts["path_width"] = vals[0]
        elif word in ("color", "background"):
            if not all(v.is_integer() and 0 <= v <= 255 for v in vals):
                raise TrackError("colour channels must be integers in [0, 255]", lineno)
            key = "path_color" if word == "color" else "background_color"
            opts[key] = tuple(int(v) for v in vals)
        elif word == "start":
            opts["start_pose"] = (vals[0], vals[1])
        elif word == "line":
            seg = Line((vals[0], vals[1]), (vals[2], vals[3]))
            if seg.length == 0:
                raise TrackError("zero-length line", lineno)
            segments.append(seg)
            seg_lines.append(lineno)
        elif word == "arc":
            if not vals[2] > 0:
                raise TrackError("arc radius must be > 0", lineno)
            segments.append(Arc((vals[0], vals[1]), vals[2], vals[3], vals[4]))
            seg_lines.append(lineno)
        else:
            if marker is not None:
                raise TrackError("duplicate marker", lineno)
            marker = ((vals[0], vals[1]), vals[2])

    if not segments:
        raise TrackError("no segments")
    for i in range(1, len(segments)):
        gap = math.dist(segments[i - 1].end, segments[i].start)
        if gap > JOINT_TOL:
            raise TrackError(
                f"gap of {gap:.6g} m between segment ending on line {seg_lines[i - 1]} "
                f"and segment starting on line {seg_lines[i]}", seg_lines[i])
    if marker is None:
        raise TrackError("missing marker")
    return TrackSpec(tuple(segments), marker[0], marker[1], **opts)


def load_track(source) -> TrackSpec:
    """Load a track from a path, or a shipped track by bare name (``scurve``)."""
    p = Path(source)
    if p.exists():
        return parse_track(p.read_text(encoding="utf-8"))
    name = str(source)
    if not name.endswith(".track"):
        name += ".track"
    res = resources.files("vtpsim") / "tracks" / name
    if res.is_file():
        return parse_track(res.read_text(encoding="utf-8"))
    raise FileNotFoundError(source)


def shipped_tracks() -> list[str]:
    root = resources.files("vtpsim") / "tracks"
    return sorted(p.name[:-6] for p in root.iterdir() if p.name.endswith(".track"))


# -- rendering and distance -------------------------------------------------

def path_distances(track: TrackSpec, pts) -> np.ndarray:
    """Distance from each point (..., 2) to the union of segment centrelines."""
    pts = np.asarray(pts, dtype=np.float64)
    out = np.full(pts.shape[:-1], np.inf)
    for seg in track.segments:
        out = np.minimum(out, seg.distance(pts))
    return out


def path_distance(track: TrackSpec, p) -> float:
    return float(path_distances(track, np.asarray(p, dtype=np.float64)))


def pixel_world_coords(drone_xy, altitude: float, cam: CameraModel) -> np.ndarray:
    """World (x, y) of every pixel centre, shape (H, W, 2)."""
    s = cam.scale * cam.ref_altitude / altitude
    rows = (np.arange(cam.frame_h) - cam.frame_h / 2) / s + drone_xy[0]
    cols = (np.arange(cam.frame_w) - cam.frame_w / 2) / s + drone_xy[1]
    grid = np.empty((cam.frame_h, cam.frame_w, 2))
    grid[..., 0] = rows[:, None]
    grid[..., 1] = cols[None, :]
    return grid


def render_frame(track: TrackSpec, drone_xy, altitude: float,
                 cam: CameraModel = CameraModel()) -> PixelFrame:
    """Orthographic ground-plane view from straight above ``drone_xy``."""
    if not altitude > 0:
        raise ValueError("altitude must be > 0")
    pts = pixel_world_coords(drone_xy, altitude, cam)
    on_path = path_distances(track, pts) <= track.path_width / 2
    mc = np.asarray(track.marker_center)
    on_path |= np.hypot(*np.moveaxis(pts - mc, -1, 0)) <= track.marker_radius
    px = np.empty((cam.frame_h, cam.frame_w, 3), dtype=np.uint8)
    px[...] = track.background_color
    px[on_path] = track.path_color
    return PixelFrame(px)
