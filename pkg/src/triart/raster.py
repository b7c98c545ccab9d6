"""Fixed-size 8-bit RGB rasters and their file formats.

The raster is the unit of targets, canvases, and control images.  Pixels
live in a (height, width, 3) uint8 numpy array, row-major.  File I/O
covers PNG and JPEG reading, PNG and binary PPM (P6) writing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


def round_half_up(x: float) -> int:
    """Round to the nearest integer, ties toward +inf: floor(x + 0.5)."""
    return math.floor(x + 0.5)


def clamp_channel(v: int) -> int:
    return min(max(v, 0), 255)


@dataclass(frozen=True)
class Color:
    """RGBA color, all channels in [0, 255]."""

    r: int
    g: int
    b: int
    a: int = 255

    def __post_init__(self):
        for name in ("r", "g", "b", "a"):
            v = getattr(self, name)
            if not 0 <= v <= 255:
                raise ValueError(f"channel {name}={v} outside [0, 255]")

    @property
    def rgb(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)

    def hex_rgb(self) -> str:
        return f"#{self.r:02x}{self.g:02x}{self.b:02x}"


@dataclass
class Raster:
    """RGB image buffer backed by a (height, width, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) pixel array, got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("raster dimensions must be >= 1")
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def filled(cls, width: int, height: int, color: Color) -> Raster:
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[:] = color.rgb
        return cls(px)

    def copy(self) -> Raster:
        return Raster(self.pixels.copy())

    def same_pixels(self, other: Raster) -> bool:
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


def load_raster(path: str | Path) -> Raster:
    """Read a PNG/JPEG/PPM file as an RGB raster."""
    with Image.open(path) as im:
        return Raster(np.asarray(im.convert("RGB"), dtype=np.uint8))


def save_png(path: str | Path, raster: Raster) -> None:
    Image.fromarray(raster.pixels, mode="RGB").save(path, format="PNG")


def save_ppm(path: str | Path, raster: Raster) -> None:
    """Write binary PPM (P6), maxval 255."""
    header = f"P6\n{raster.width} {raster.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + raster.pixels.tobytes())


def resize_center_crop(raster: Raster, edge: int) -> Raster:
    """Resize so the shorter edge equals `edge` (bilinear), then center-crop square."""
    if edge < 1:
        raise ValueError("target edge must be positive")
    w, h = raster.width, raster.height
    scale = edge / min(w, h)
    new_w = max(edge, round_half_up(w * scale))
    new_h = max(edge, round_half_up(h * scale))
    im = Image.fromarray(raster.pixels, mode="RGB").resize(
        (new_w, new_h), resample=Image.Resampling.BILINEAR
    )
    left = (new_w - edge) // 2
    top = (new_h - edge) // 2
    im = im.crop((left, top, left + edge, top + edge))
    return Raster(np.asarray(im, dtype=np.uint8))
