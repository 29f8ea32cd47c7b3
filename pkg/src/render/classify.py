"""
Escape-time and basin pictures: every pixel centre is iterated and coloured by how its orbit ends.
"""
from __future__ import annotations

import math
from dataclasses import replace
from typing import List, Optional

import numpy as np
from aenum import Enum, NoAlias

from model.function_model import FunctionModel
from orbits.iteration import OrbitSettings, iterate_orbit
from orbits.record import AttractedToCycle, ExponentialEscape, OrbitClassification, OrbitRecord, StopReason
from render.image import ImageBuffer, ImageSpec
from util.log import loginfo, logwarn
from util.np_utils import complex_grid
from util.parallel import parallel_map
from util.params import get_param


class PixelClass(Enum):
    _settings_ = NoAlias

    basin = 0
    escape = 1
    undecided = 2
    error = 3


def render_settings() -> OrbitSettings:
    return replace(
        OrbitSettings.from_params(),
        cycle_tol=get_param("render/cycle_tol", 1e-9),
        max_period=get_param("render/max_period", 16),
    )


def pixel_classification(record: OrbitRecord) -> OrbitClassification:
    """
    The orbit classification as the picture shows it. Orbits that land exactly on an attracting cycle lie in its
    basin, so they are reported as attracted even though the orbit engine calls them preperiodic.
    """
    cycle = record.cycle
    if cycle is not None and cycle.multiplier_log_mod < 0:
        return AttractedToCycle(cycle.period, cycle.multiplier_log_mod, cycle.representative)
    return record.classification


def pixel_class(record: OrbitRecord) -> PixelClass:
    if record.stop_reason is StopReason.error_state:
        return PixelClass.error
    c = pixel_classification(record)
    if isinstance(c, AttractedToCycle):
        return PixelClass.basin
    if isinstance(c, ExponentialEscape) or record.stop_reason is StopReason.saturated:
        return PixelClass.escape
    return PixelClass.undecided


def pixel_centres(img: ImageSpec) -> np.ndarray:
    z = complex_grid(img.window, img.width, img.height)
    if img.seed is None:
        return z
    rng = np.random.default_rng(img.seed)
    dx, dy = img.pixel_size
    return z + (rng.uniform(-0.5, 0.5, z.shape) * dx + 1j * rng.uniform(-0.5, 0.5, z.shape) * dy)


def cluster_basins(representatives: List[complex], tol: float) -> List[int]:
    """
    Basin index per attracted pixel, in pixel order: a new index for every limit cycle point not within tol of
    one seen before.
    """
    seen: List[complex] = []
    out = []
    for z in representatives:
        for i, s in enumerate(seen):
            if abs(z - s) <= tol * max(1.0, abs(s)):
                out.append(i)
                break
        else:
            seen.append(z)
            out.append(len(seen) - 1)
    return out


def render_classification(
    model: FunctionModel, img: ImageSpec, threads: Optional[int] = None, settings: Optional[OrbitSettings] = None
) -> ImageBuffer:
    """
    Classify every pixel centre of the window by its orbit. Basins of attracting cycles are painted in dark shades,
    one per limit cycle. Escaping points get a light gradient by the first iterate beyond the escape radius.
    Undecided orbits are gray and evaluation failures pure red. The output depends on img alone, not on threads.

    :param model: the function model
    :param img: window, size, iteration cap, palette and jitter seed
    :param threads: worker hint
    :param settings: orbit settings, the render section of the config when omitted
    :returns: the image with per-class counts
    """
    settings = settings or render_settings()
    z = pixel_centres(img).ravel()
    records = parallel_map(lambda w: iterate_orbit(model, complex(w), img.max_iter, settings), list(z), threads)

    classes = np.array([pixel_class(r).value for r in records], dtype=np.int8)
    pixels = np.empty((len(records), 3), dtype=np.uint8)
    palette = img.palette

    basins = np.full(len(records), -1, dtype=np.int32)
    in_basin = np.flatnonzero(classes == PixelClass.basin.value)
    reps = [pixel_classification(records[i]).representative for i in in_basin]  # type: ignore[union-attr]
    basins[in_basin] = cluster_basins(reps, get_param("render/basin_tol", 1e-6))
    for i in in_basin:
        pixels[i] = palette.basin(int(basins[i]))

    log_escape = math.log(get_param("render/escape_radius", 1.0e10))
    escaping = np.flatnonzero(classes == PixelClass.escape.value)
    steps = np.array([_escape_step(records[i], log_escape) for i in escaping], dtype=float)
    pixels[escaping] = palette.escape(np.log1p(steps) / math.log1p(img.max_iter))

    pixels[classes == PixelClass.undecided.value] = palette.undecided
    pixels[classes == PixelClass.error.value] = palette.error

    counts = {c.name: int(np.count_nonzero(classes == c.value)) for c in PixelClass}
    counts["basins"] = int(basins.max()) + 1
    if counts["error"]:
        logwarn(f"{model.name}: {counts['error']} pixel(s) ended in an evaluation error")
    loginfo(f"{model.name}: rendered {img.width}x{img.height}, {counts}")
    shape = (img.height, img.width)
    return ImageBuffer(
        img.width, img.height, pixels.reshape(shape + (3,)), counts, classes.reshape(shape), basins.reshape(shape)
    )


def _escape_step(record: OrbitRecord, log_radius: float) -> int:
    n = record.first_escape_index(log_radius)
    return len(record.points) - 1 if n is None else n
