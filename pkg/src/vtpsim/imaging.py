"""Raster types and pixel-level transforms for red-path extraction.

Frames are thin wrappers around numpy arrays indexed ``[row, column]``.
Row index is the image ``x`` axis (pointing down), column index is the
image ``y`` axis (pointing right).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class PixelFrame:
    """8-bit RGB frame of shape (H, W, 3)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"expected an (H, W, 3) array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("channel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def filled(cls, height: int, width: int, rgb) -> PixelFrame:
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[...] = np.asarray(rgb, dtype=np.uint8)
        return cls(px)


@dataclass(frozen=True, eq=False)
class GrayFrame:
    """Signed real intensity frame, values in [-255, 255]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"expected an (H, W) array, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class BinaryFrame:
    """Frame of {0, 1} bits stored as a boolean array."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        b = np.asarray(self.bits)
        if b.ndim != 2 or b.shape[0] < 1 or b.shape[1] < 1:
            raise ValueError(f"expected an (H, W) array, got shape {b.shape}")
        if b.dtype != bool:
            if not np.isin(b, (0, 1)).all():
                raise ValueError("binary frame may only hold 0/1 values")
            b = b.astype(bool)
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def count(self) -> int:
        return int(self.bits.sum())

    def any(self) -> bool:
        return bool(self.bits.any())


@dataclass(frozen=True)
class Kernel:
    """Structuring element: ``square`` (odd side) or ``disk`` (radius)."""

    shape: str
    size: int

    def __post_init__(self) -> None:
        if self.shape == "square":
            if self.size < 1 or self.size % 2 == 0:
                raise ValueError(f"square kernel side must be odd and >= 1, got {self.size}")
        elif self.shape == "disk":
            if self.size < 1:
                raise ValueError(f"disk kernel radius must be >= 1, got {self.size}")
        else:
            raise ValueError(f"unknown kernel shape {self.shape!r}")

    @classmethod
    def square(cls, side: int) -> Kernel:
        return cls("square", side)

    @classmethod
    def disk(cls, radius: int) -> Kernel:
        return cls("disk", radius)

    @property
    def reach(self) -> int:
        return self.size // 2 if self.shape == "square" else self.size

    def offsets(self) -> list[tuple[int, int]]:
        r = self.reach
        out = []
        for dr in range(-r, r + 1):
            for dc in range(-r, r + 1):
                if self.shape == "disk" and dr * dr + dc * dc > self.size * self.size:
                    continue
                out.append((dr, dc))
        return out


def marker_kernel_for(path_width_px: float) -> Kernel:
    """Disk just wide enough to erase a path stripe of the given width."""
    return Kernel.disk(math.ceil(path_width_px / 2) + 1)


def channel_conv(frame: PixelFrame, gg: float, gb: float) -> GrayFrame:
    """Red-emphasis intensity: ``R - G/gg - B/gb`` in real arithmetic."""
    if gg < 1 or gb < 1:
        raise ValueError("gg and gb must be >= 1")
    px = frame.pixels.astype(np.float64)
    return GrayFrame(px[..., 0] - px[..., 1] / gg - px[..., 2] / gb)


def binarize(gray: GrayFrame, k_t: float) -> BinaryFrame:
    # inclusive threshold
    return BinaryFrame(gray.values >= k_t)


def erode(frame: BinaryFrame, kernel: Kernel) -> BinaryFrame:
    """Morphological erosion; pixels outside the frame count as 0."""
    r = kernel.reach
    h, w = frame.height, frame.width
    padded = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
    padded[r:r + h, r:r + w] = frame.bits
    out = np.ones((h, w), dtype=bool)
    for dr, dc in kernel.offsets():
        out &= padded[r + dr:r + dr + h, r + dc:r + dc + w]
    return BinaryFrame(out)


def centroid(frame: BinaryFrame) -> tuple[float, float]:
    rows, cols = np.nonzero(frame.bits)
    if rows.size == 0:
        raise ValueError("centroid of an empty pixel set")
    return float(rows.mean()), float(cols.mean())


# -- debug dumps -----------------------------------------------------------

def _write_netpbm(path: Path, magic: bytes, data: np.ndarray) -> None:
    h, w = data.shape[:2]
    header = magic + b"\n%d %d\n255\n" % (w, h)
    Path(path).write_bytes(header + np.ascontiguousarray(data, dtype=np.uint8).tobytes())


def write_ppm(path, frame: PixelFrame) -> None:
    """Binary P6 dump of an RGB frame."""
    _write_netpbm(path, b"P6", frame.pixels)


def write_pgm(path, frame: GrayFrame | BinaryFrame) -> None:
    """Binary P5 dump; binary frames map to {0, 255}, gray values are clipped."""
    if isinstance(frame, BinaryFrame):
        data = frame.bits.astype(np.uint8) * 255
    else:
        data = np.clip(np.rint(frame.values), 0, 255).astype(np.uint8)
    _write_netpbm(path, b"P5", data)


def read_netpbm(path) -> np.ndarray:
    """Read back a P5/P6 file written by this module (no comments, maxval 255)."""
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    magic, dims, maxval, body = parts
    w, h = (int(t) for t in dims.split())
    if int(maxval) != 255:
        raise ValueError("only maxval 255 is supported")
    if magic == b"P6":
        return np.frombuffer(body, dtype=np.uint8, count=w * h * 3).reshape(h, w, 3)
    if magic == b"P5":
        return np.frombuffer(body, dtype=np.uint8, count=w * h).reshape(h, w)
    raise ValueError(f"unsupported magic {magic!r}")
