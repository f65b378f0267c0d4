"""Image processing system: path extraction, virtual target point, end-marker.

Each camera frame goes through red-channel conversion, thresholding and a
square erosion.  The eroded frame is then searched on an annulus around the
frame centre (the arc mask) for the virtual target point (VTP).  When no path
pixel lies on the mask, a second erosion with a disk isolates the filled
landing marker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .imaging import (
    BinaryFrame,
    GrayFrame,
    Kernel,
    PixelFrame,
    binarize,
    centroid,
    channel_conv,
    erode,
)


@dataclass(frozen=True)
class IpsConfig:
    gg: float = 2.0
    gb: float = 2.0
    k_t: float = 150.0
    r_min: float = 26.0
    r_max: float = 28.0
    fov_theta: float = 2.3  # total angular width of the mask, radians
    path_kernel: Kernel = field(default_factory=lambda: Kernel.square(3))
    marker_kernel: Kernel = field(default_factory=lambda: Kernel.disk(4))
    frame_w: int = 160
    frame_h: int = 120

    def __post_init__(self) -> None:
        if self.gg < 1 or self.gb < 1:
            raise ConfigError("gg and gb must be >= 1")
        if not 0 < self.r_min < self.r_max:
            raise ConfigError("arc mask radii must satisfy 0 < r_min < r_max")
        if not 0 < self.fov_theta <= 2 * math.pi:
            raise ConfigError("fov_theta must lie in (0, 2*pi]")
        if self.frame_w < 1 or self.frame_h < 1:
            raise ConfigError("frame dimensions must be positive")


@dataclass(frozen=True)
class FrameCoM:
    """Reference point of the frame: (row, column) = (H/2, W/2)."""

    x_com: float
    y_com: float

    @classmethod
    def for_frame(cls, height: int, width: int) -> FrameCoM:
        return cls(height / 2, width / 2)


@dataclass
class VtpTrackerState:
    prev_theta: float | None = None


@dataclass(frozen=True)
class IpsOutput:
    e_x: float = 0.0
    e_y: float = 0.0
    flag_vtp: bool = False
    flag_marker: bool = False
    theta: float | None = None


@dataclass(frozen=True)
class IpsStages:
    gray: GrayFrame
    binary: BinaryFrame
    eroded: BinaryFrame
    mask: BinaryFrame


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w


def arc_mask_contains(p, com: FrameCoM, prev_theta: float | None, cfg: IpsConfig) -> bool:
    dx = p[0] - com.x_com
    dy = p[1] - com.y_com
    d2 = dx * dx + dy * dy
    if not cfg.r_min ** 2 <= d2 <= cfg.r_max ** 2:
        return False
    if prev_theta is None:
        return True
    return abs(wrap_angle(math.atan2(dy, dx) - prev_theta)) <= cfg.fov_theta / 2


def arc_mask(height: int, width: int, com: FrameCoM, prev_theta: float | None,
             cfg: IpsConfig) -> np.ndarray:
    """Boolean (H, W) array of pixels accepted by ``arc_mask_contains``."""
    dx = np.arange(height, dtype=np.float64)[:, None] - com.x_com
    dy = np.arange(width, dtype=np.float64)[None, :] - com.y_com
    d2 = dx * dx + dy * dy
    mask = (d2 >= cfg.r_min ** 2) & (d2 <= cfg.r_max ** 2)
    if prev_theta is not None:
        rows, cols = np.nonzero(mask)
        ang = np.arctan2(dy[0, cols], dx[rows, 0]) - prev_theta
        ang = np.abs(np.remainder(ang + np.pi, 2 * np.pi) - np.pi)
        keep = ang <= cfg.fov_theta / 2
        mask[rows[~keep], cols[~keep]] = False
    return mask


def _masked(path_frame: BinaryFrame, com: FrameCoM, state: VtpTrackerState,
            cfg: IpsConfig) -> np.ndarray:
    return path_frame.bits & arc_mask(path_frame.height, path_frame.width, com,
                                      state.prev_theta, cfg)


def detect_track(path_frame: BinaryFrame, com: FrameCoM, state: VtpTrackerState,
                 cfg: IpsConfig) -> bool:
    return bool(_masked(path_frame, com, state, cfg).any())


def vtp(path_frame: BinaryFrame, com: FrameCoM, state: VtpTrackerState,
        cfg: IpsConfig) -> tuple[float, float, float]:
    """Centroid of the masked path pixels and its bearing from the CoM.

    Updates ``state.prev_theta`` so the next frame searches around the new
    bearing.
    """
    x, y = centroid(BinaryFrame(_masked(path_frame, com, state, cfg)))
    theta = math.atan2(y - com.y_com, x - com.x_com)
    state.prev_theta = theta
    return x, y, theta


def _marker_core(path_frame: BinaryFrame, cfg: IpsConfig) -> BinaryFrame:
    return erode(path_frame, cfg.marker_kernel)


def detect_marker(path_frame: BinaryFrame, cfg: IpsConfig) -> bool:
    return _marker_core(path_frame, cfg).any()


def cg_marker(path_frame: BinaryFrame, cfg: IpsConfig) -> tuple[float, float]:
    return centroid(_marker_core(path_frame, cfg))


def stages(frame: PixelFrame, state: VtpTrackerState, cfg: IpsConfig) -> IpsStages:
    """Intermediate rasters for debug dumps; does not touch ``state``."""
    gray = channel_conv(frame, cfg.gg, cfg.gb)
    binary = binarize(gray, cfg.k_t)
    eroded = erode(binary, cfg.path_kernel)
    com = FrameCoM.for_frame(frame.height, frame.width)
    mask = arc_mask(frame.height, frame.width, com, state.prev_theta, cfg)
    return IpsStages(gray, binary, eroded, BinaryFrame(mask))


def process_frame(frame: PixelFrame, state: VtpTrackerState, cfg: IpsConfig,
                  *, track_path: bool = True) -> IpsOutput:
    """Run the full image pipeline on one camera frame.

    The path branch wins over the marker branch, so the two flags are never
    raised together.  With ``track_path=False`` only the marker is searched
    for (used once the mission is centring over the end-marker).
    """
    if (frame.width, frame.height) != (cfg.frame_w, cfg.frame_h):
        raise ConfigError(
            f"frame is {frame.width}x{frame.height}, "
            f"configured for {cfg.frame_w}x{cfg.frame_h}")
    gray = channel_conv(frame, cfg.gg, cfg.gb)
    eroded = erode(binarize(gray, cfg.k_t), cfg.path_kernel)
    com = FrameCoM.for_frame(frame.height, frame.width)

    if track_path and detect_track(eroded, com, state, cfg):
        x, y, theta = vtp(eroded, com, state, cfg)
        return IpsOutput(x - com.x_com, y - com.y_com, True, False, theta)
    if detect_marker(eroded, cfg):
        x, y = cg_marker(eroded, cfg)
        return IpsOutput(x - com.x_com, y - com.y_com, False, True, state.prev_theta)
    return IpsOutput(theta=state.prev_theta)
