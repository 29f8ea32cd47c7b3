from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from shapely.geometry import Polygon, box
from shapely.ops import unary_union

from measure.parameters import ParameterSet
from model.geometry import SectorGeometry
from model.spec_io import FunctionSpec
from util.errors import InvalidParams, WindowTooSmall
from util.log import logdebug, loginfo
from util.params import get_param

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SquareRegion:
    center: complex
    half_side: float

    def __post_init__(self):
        if self.half_side < 0:
            raise InvalidParams(f"half_side = {self.half_side} must not be negative")
        object.__setattr__(self, "center", complex(self.center))

    @property
    def side(self) -> float:
        return 2.0 * self.half_side

    @property
    def diam(self) -> float:
        return 2.0 * SQRT2 * self.half_side

    @property
    def area(self) -> float:
        return self.side**2

    @property
    def sup_abs(self) -> float:
        return abs(self.center) + SQRT2 * self.half_side

    @property
    def inf_abs(self) -> float:
        return max(abs(self.center) - SQRT2 * self.half_side, 0.0)

    def scaled(self, factor: float) -> SquareRegion:
        """The square with the same center and side multiplied by factor."""
        return SquareRegion(self.center, factor * self.half_side)

    def children(self) -> List[SquareRegion]:
        h = 0.5 * self.half_side
        return [SquareRegion(self.center + complex(dx * h, dy * h), h) for dx in (-1, 1) for dy in (-1, 1)]

    def to_polygon(self) -> Polygon:
        c, h = self.center, self.half_side
        return box(c.real - h, c.imag - h, c.real + h, c.imag + h)

    def sample(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Map unit-square coordinates (u, v) in [0, 1)^2 into the square."""
        h = self.half_side
        return self.center + (2.0 * u - 1.0) * h + 1j * (2.0 * v - 1.0) * h


def band_distance(geom: SectorGeometry, spec: FunctionSpec, z: np.ndarray) -> np.ndarray:
    """
    First-order signed distance from z to the complement of G: (|Re Q| - |z|^delta) / |Q'|, capped by |z| - M.
    Negative values lie outside G.
    """
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        re_q = np.abs(np.real(spec.Q.evaluate_array(z)))
        slope = np.abs(spec.Q.derivative().evaluate_array(z))
        d = np.where(slope > 0, (re_q - r**geom.delta) / slope, np.inf)
    return np.minimum(d, r - geom.M)


def band_width(params: ParameterSet, r: np.ndarray) -> np.ndarray:
    """|z|^(-delta1) / 2, the width of the band around the complement of G."""
    with np.errstate(divide="ignore"):
        return 0.5 * np.asarray(r, dtype=float) ** (-params.delta1)


def size_bounds(square: SquareRegion, params: ParameterSet, c: float):
    """
    (lower, upper) diameter bounds of a family square: (c / 8) inf|z|^(-delta2) and
    (c / 2) sup_{(1/c) S}|z|^(-delta2).
    """
    upper = 0.5 * c * square.scaled(1.0 / c).sup_abs ** (-params.delta2)
    inf_abs = square.inf_abs
    lower = 0.125 * c * inf_abs ** (-params.delta2) if inf_abs > 0 else math.inf
    return lower, upper


def build_square_cover(
    geom: SectorGeometry,
    spec: FunctionSpec,
    window: SquareRegion,
    params: ParameterSet,
    c: float,
    max_squares: Optional[int] = None,
) -> List[SquareRegion]:
    """
    Quadtree refinement of the window into squares with diam(S) <= (c / 2) sup_{(1/c) S}|z|^(-delta2), dropping
    every square that meets the band {dist(z, C \\ G) <= |z|^(-delta1) / 2}.

    :param geom: sector geometry, for delta and M
    :param spec: the function spec
    :param window: the square to cover
    :param params: exponents delta1 and delta2
    :param c: shrink constant in (0, 1)
    :param max_squares: cap on the size of the family
    :returns: the retained squares, pairwise disjoint
    :raises WindowTooSmall: if the whole window lies in the dropped band
    """
    if not 0.0 < c < 1.0:
        raise InvalidParams(f"c = {c} must lie in (0, 1)")
    if window.half_side <= 0:
        raise InvalidParams("the window must have positive size")
    max_squares = get_param("measure/max_squares", 200000) if max_squares is None else max_squares

    level = [window]
    kept: List[SquareRegion] = []
    dropped = 0
    while level:
        centers = np.array([s.center for s in level])
        h = level[0].half_side
        d = band_distance(geom, spec, centers)
        inf_abs = np.maximum(np.abs(centers) - SQRT2 * h, 0.0)
        width = band_width(params, inf_abs)
        sup_scaled = np.abs(centers) + SQRT2 * h / c
        small = 2.0 * SQRT2 * h <= 0.5 * c * sup_scaled ** (-params.delta2)
        clear = d - SQRT2 * h >= width
        inside = d + SQRT2 * h < width

        split: List[SquareRegion] = []
        for square, is_small, is_clear, is_inside in zip(level, small, clear, inside):
            if is_small and is_clear:
                kept.append(square)
            elif is_inside or is_small:
                # in the band, or already small enough while straddling its edge
                dropped += 1
            else:
                split.extend(square.children())
        if len(kept) + len(split) > max_squares:
            raise InvalidParams(
                f"square cover of {window} needs more than {max_squares} squares; shrink the window or raise c"
            )
        level = split
    if not kept:
        raise WindowTooSmall(f"{window} lies inside the band around the complement of G")
    loginfo(f"square cover: {len(kept)} square(s) kept, {dropped} dropped")
    logdebug(f"square cover diameters: {sorted({s.diam for s in kept})}")
    return kept


def cover_area(squares: Sequence[SquareRegion]) -> float:
    """Area of the union of the squares."""
    return unary_union([s.to_polygon() for s in squares]).area
