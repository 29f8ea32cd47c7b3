"""
Raster images: the render request, the pixel buffer and the binary PPM/PNG writers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
from PIL import Image

from util.errors import InvalidParams, OutputError
from util.params import get_param

RGB = Tuple[int, int, int]
Window = Tuple[float, float, float, float]

_PPM_HEADER = re.compile(rb"P6\s+(\d+)\s+(\d+)\s+(\d+)\s")


def _rgb(value) -> RGB:
    r, g, b = (int(c) for c in value)
    return r, g, b


@dataclass(frozen=True)
class Palette:
    undecided: RGB = (128, 128, 128)
    error: RGB = (255, 0, 0)
    # escape gradient runs from light (fast escape) to dark (slow escape)
    escape_light: RGB = (255, 250, 205)
    escape_dark: RGB = (110, 140, 200)
    # dark shades handed out to basins in order of first appearance
    basin_shades: Tuple[RGB, ...] = ((10, 10, 10), (45, 25, 70), (20, 60, 40), (70, 30, 30))

    @classmethod
    def from_params(cls) -> Palette:
        return cls(
            undecided=_rgb(get_param("render/undecided_rgb", cls.undecided)),
            error=_rgb(get_param("render/error_rgb", cls.error)),
            escape_light=_rgb(get_param("render/escape_light_rgb", cls.escape_light)),
            escape_dark=_rgb(get_param("render/escape_dark_rgb", cls.escape_dark)),
            basin_shades=tuple(_rgb(s) for s in get_param("render/basin_shades", cls.basin_shades)),
        )

    def basin(self, index: int) -> RGB:
        return self.basin_shades[index % len(self.basin_shades)]

    def escape(self, t: np.ndarray) -> np.ndarray:
        """Gradient colours for t in [0, 1], shape t.shape + (3,)."""
        light = np.array(self.escape_light, dtype=float)
        dark = np.array(self.escape_dark, dtype=float)
        t = np.clip(t, 0.0, 1.0)[..., np.newaxis]
        return np.rint(light + t * (dark - light)).astype(np.uint8)


@dataclass(frozen=True)
class ImageSpec:
    window: Window
    width: int
    height: int
    max_iter: int = 200
    palette: Palette = field(default_factory=Palette)
    # sub-pixel jitter is off unless a seed is given
    seed: Optional[int] = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidParams(f"image size {self.width}x{self.height} must be at least 1x1")
        re_min, re_max, im_min, im_max = self.window
        if not (re_min < re_max and im_min < im_max):
            raise InvalidParams(f"degenerate window {self.window}")
        if self.max_iter < 1:
            raise InvalidParams(f"max_iter = {self.max_iter} must be at least 1")

    @classmethod
    def from_params(cls, **kwargs) -> ImageSpec:
        size = get_param("render/size", 512)
        defaults = dict(
            window=tuple(get_param("cli/window", (-2.0, 2.0, -2.0, 2.0))),
            width=size,
            height=size,
            max_iter=get_param("render/max_iter", 200),
            palette=Palette.from_params(),
        )
        defaults.update({k: v for k, v in kwargs.items() if v is not None})
        return cls(**defaults)

    @property
    def pixel_size(self) -> Tuple[float, float]:
        re_min, re_max, im_min, im_max = self.window
        return (re_max - re_min) / self.width, (im_max - im_min) / self.height


@dataclass
class ImageBuffer:
    width: int
    height: int
    # row-major, shape (height, width, 3)
    pixels: np.ndarray
    counts: Dict[str, int] = field(default_factory=dict)
    # per-pixel class codes and basin indices (-1 outside every basin), filled in by the renderer
    classes: Optional[np.ndarray] = None
    basins: Optional[np.ndarray] = None

    def __post_init__(self):
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != (self.height, self.width, 3):
            raise InvalidParams(f"pixel array of shape {self.pixels.shape} does not match {self.width}x{self.height}")

    @classmethod
    def blank(cls, width: int, height: int, rgb: RGB = (0, 0, 0)) -> ImageBuffer:
        pixels = np.empty((height, width, 3), dtype=np.uint8)
        pixels[...] = rgb
        return cls(width, height, pixels)

    def to_bytes(self) -> bytes:
        return self.pixels.tobytes()


def ppm_bytes(buf: ImageBuffer) -> bytes:
    return f"P6\n{buf.width} {buf.height}\n255\n".encode("ascii") + buf.to_bytes()


def write_ppm(buf: ImageBuffer, path: Path) -> None:
    """
    :param buf: the image
    :param path: destination file
    :raises OutputError: if the file cannot be written
    """
    try:
        Path(path).write_bytes(ppm_bytes(buf))
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}") from e


def read_ppm(path: Path) -> ImageBuffer:
    """
    Parse a binary PPM with maxval 255.

    :raises OutputError: if the file is unreadable or not such a PPM
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise OutputError(f"cannot read {path}: {e.strerror or e}") from e
    match = _PPM_HEADER.match(data)
    if match is None or int(match.group(3)) != 255:
        raise OutputError(f"{path} is not a binary PPM with maxval 255")
    width, height = int(match.group(1)), int(match.group(2))
    body = data[match.end() :]
    if len(body) != 3 * width * height:
        raise OutputError(f"{path}: expected {3 * width * height} pixel bytes, found {len(body)}")
    return ImageBuffer(width, height, np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3))


def write_png(buf: ImageBuffer, path: Path) -> None:
    try:
        Image.fromarray(buf.pixels, mode="RGB").save(path, format="PNG")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
