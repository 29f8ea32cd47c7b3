"""
Numerical checks of the distortion toolbox and of the three conditions of the positive-measure criterion.

Every check returns a CheckResult. A sample only counts as a violation when it misses its bound by more than the
recorded sampling or rasterisation slack.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
import shapely
from scipy.spatial.distance import pdist
from shapely.geometry import MultiPolygon, Polygon
from shapely.geometry.base import BaseGeometry

from lemmas.maps import EXP, HolomorphicMap, get_map
from measure.parameters import ParameterSet
from measure.squares import SquareRegion, band_distance
from model.function_model import FunctionModel
from model.geometry import in_G, nearest_asymptotic
from model.spec_io import ExpSumForm
from orbits.iteration import iterate_orbit
from util.errors import InvalidParams
from util.log import logdebug, loginfo, logwarn
from util.log_complex import LogComplex, lc_mul
from util.params import get_param

MAX_WITNESSES = 10
SQRT2 = math.sqrt(2.0)

MapLike = Union[str, HolomorphicMap, FunctionModel]


@dataclass(frozen=True)
class LemmaSettings:
    koebe_radius: float = 0.95
    equality_tol: float = 1e-12
    winding_radius_gap: float = 1e-5
    raster_resolution: int = 2048
    grid_n: int = 64
    n_boundary: int = 720
    n_pairs: int = 100000
    collision_tol: float = 1e-9
    residual_slope_max: float = 0.1
    delta_prime: float = 0.01
    residual_quad_tol: float = 1e-13
    residual_re_q_floor: float = -6.0
    condition_b_squares: int = 16
    condition_b_resolution: int = 64
    seed: int = 7
    # compare |f' / (f - s)| / (n|q|) instead of |f' / (f - s)| with |z|^delta in condition (a)
    condition_a_normalize: bool = False

    @classmethod
    def from_params(cls) -> LemmaSettings:
        return cls(
            koebe_radius=get_param("lemmas/koebe_radius", cls.koebe_radius),
            equality_tol=get_param("lemmas/equality_tol", cls.equality_tol),
            winding_radius_gap=get_param("lemmas/winding_radius_gap", cls.winding_radius_gap),
            raster_resolution=get_param("lemmas/raster_resolution", cls.raster_resolution),
            grid_n=get_param("lemmas/grid_n", cls.grid_n),
            n_boundary=get_param("lemmas/n_boundary", cls.n_boundary),
            n_pairs=get_param("lemmas/n_pairs", cls.n_pairs),
            collision_tol=get_param("lemmas/collision_tol", cls.collision_tol),
            residual_slope_max=get_param("lemmas/residual_slope_max", cls.residual_slope_max),
            delta_prime=get_param("lemmas/delta_prime", cls.delta_prime),
            residual_quad_tol=get_param("lemmas/residual_quad_tol", cls.residual_quad_tol),
            residual_re_q_floor=get_param("lemmas/residual_re_q_floor", cls.residual_re_q_floor),
            condition_b_squares=get_param("lemmas/condition_b_squares", cls.condition_b_squares),
            condition_b_resolution=get_param("lemmas/condition_b_resolution", cls.condition_b_resolution),
            seed=get_param("lemmas/seed", cls.seed),
            condition_a_normalize=get_param("lemmas/condition_a_normalize", cls.condition_a_normalize),
        )


@dataclass(frozen=True)
class Witness:
    input: Any
    observed: float
    bound: float


@dataclass(frozen=True)
class CheckResult:
    name: str
    n_samples: int
    n_violations: int
    # smallest distance to the bound over all samples, negative when some sample crosses it
    worst_margin: float
    witnesses: Tuple[Witness, ...]
    slack: float = 0.0
    skipped: int = 0
    seed: Optional[int] = None
    notes: Tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.n_violations == 0

    def describe(self) -> str:
        lines = [
            f"check: {self.name}",
            f"  samples: {self.n_samples}",
            f"  skipped: {self.skipped}",
            f"  violations: {self.n_violations}",
            f"  worst_margin: {self.worst_margin:.6g}",
            f"  slack: {self.slack:.6g}",
        ]
        if self.seed is not None:
            lines.append(f"  seed: {self.seed}")
        lines.extend(f"  note: {n}" for n in self.notes)
        for w in self.witnesses:
            lines.append(f"  witness: input={w.input} observed={w.observed:.12g} bound={w.bound:.12g}")
        return "\n".join(lines)


@dataclass(frozen=True)
class DistortionReport:
    square: SquareRegion
    c: float
    sup_inf_ratio: float


def _fmt(x: Any) -> str:
    if isinstance(x, (complex, np.complexfloating, float, np.floating)):
        return f"{x:.9g}"
    if isinstance(x, tuple):
        return "(" + ", ".join(_fmt(v) for v in x) + ")"
    return str(x)


class _Tally:
    """Running counts for one check."""

    def __init__(self, name: str):
        self.name = name
        self.n = 0
        self.violations = 0
        self.worst = math.inf
        self.witnesses: List[Witness] = []

    def add(self, inputs: Sequence, observed, bound, margin, violated, label: str = "") -> None:
        violated = np.asarray(violated, dtype=bool).ravel()
        observed = np.broadcast_to(np.asarray(observed, dtype=float), violated.shape)
        bound = np.broadcast_to(np.asarray(bound, dtype=float), violated.shape)
        self.n += violated.size
        if margin is not None and np.size(margin):
            self.worst = min(self.worst, float(np.min(margin)))
        bad = np.flatnonzero(violated)
        self.violations += bad.size
        for i in bad[: max(0, MAX_WITNESSES - len(self.witnesses))]:
            self.witnesses.append(Witness(label + _fmt(inputs[i]), float(observed[i]), float(bound[i])))

    def result(
        self, slack: float = 0.0, skipped: int = 0, seed: Optional[int] = None, notes=(), n: Optional[int] = None
    ) -> CheckResult:
        result = CheckResult(
            self.name,
            self.n if n is None else n,
            self.violations,
            self.worst,
            tuple(self.witnesses),
            slack,
            skipped,
            seed,
            tuple(notes),
        )
        if result.passed:
            loginfo(f"{self.name}: {result.n_samples} sample(s), no violations")
        else:
            logwarn(f"{self.name}: {self.violations} violation(s) in {result.n_samples} sample(s)")
        return result


def as_map(target: MapLike) -> HolomorphicMap:
    if isinstance(target, HolomorphicMap):
        return target
    if isinstance(target, FunctionModel):
        return HolomorphicMap.from_model(target)
    return get_map(target)


# ---------------------------------------------------------------------------------------------------------------
# geometry helpers


def _grid(geom: BaseGeometry, resolution: int) -> Tuple[np.ndarray, np.ndarray, float]:
    minx, miny, maxx, maxy = geom.bounds
    pixel = max(maxx - minx, maxy - miny) / resolution
    nx = max(1, int(math.ceil((maxx - minx) / pixel - 1e-9)))
    ny = max(1, int(math.ceil((maxy - miny) / pixel - 1e-9)))
    xs = minx + (np.arange(nx) + 0.5) * pixel
    ys = miny + (np.arange(ny) + 0.5) * pixel
    x, y = np.meshgrid(xs, ys)
    return x, y, pixel


def _mask(geom: BaseGeometry, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if geom.is_empty:
        return np.zeros(x.shape, dtype=bool)
    return shapely.contains_xy(geom, x, y)


@dataclass(frozen=True)
class RasterArea:
    area: float
    # pixels along the boundary may be miscounted: perimeter * pixel diagonal
    error: float


def raster_area(geom: BaseGeometry, resolution: int) -> RasterArea:
    if geom.is_empty:
        return RasterArea(0.0, 0.0)
    x, y, pixel = _grid(geom, resolution)
    return RasterArea(float(_mask(geom, x, y).sum()) * pixel**2, geom.length * pixel * SQRT2)


def diameter(geom: BaseGeometry) -> float:
    hull = geom.convex_hull
    coords = np.asarray(hull.exterior.coords if hull.geom_type == "Polygon" else hull.coords)
    return float(pdist(coords).max()) if len(coords) > 1 else 0.0


def map_geometry(m: HolomorphicMap, geom: BaseGeometry, max_segment: Optional[float] = None) -> BaseGeometry:
    """
    Image of a polygon under m, traced from its densified boundary. Only meaningful where m is injective.
    """
    if geom.is_empty:
        return geom
    geom = shapely.segmentize(geom, max_segment or geom.length / 4096)

    def ring(coords) -> np.ndarray:
        c = np.asarray(coords)
        w = m(c[:, 0] + 1j * c[:, 1])
        return np.column_stack([w.real, w.imag])

    def polygon(p: Polygon) -> Polygon:
        return Polygon(ring(p.exterior.coords), [ring(i.coords) for i in p.interiors])

    if isinstance(geom, MultiPolygon):
        return MultiPolygon([polygon(p) for p in geom.geoms])
    return polygon(geom)


def square_image(m: MapLike, square: SquareRegion, n_edge: int = 256) -> BaseGeometry:
    return map_geometry(as_map(m), square.to_polygon(), square.side / n_edge)


def _square_grid(square: SquareRegion, n: int) -> np.ndarray:
    h = square.half_side
    t = np.linspace(-h, h, n)
    return square.center + t[np.newaxis, :] + 1j * t[:, np.newaxis]


def _distortion(m: HolomorphicMap, points: np.ndarray) -> float:
    logs = m.log_abs_derivative(points)
    logs = logs[np.isfinite(logs)]
    if logs.size == 0:
        return math.inf
    return float(math.exp(np.max(logs) - np.min(logs)))


def measured_distortion(target: MapLike, region: Union[SquareRegion, BaseGeometry], grid_n: int = 64) -> float:
    """sup |f'| / inf |f'| over a grid covering the region."""
    m = as_map(target)
    if isinstance(region, SquareRegion):
        return _distortion(m, _square_grid(region, grid_n))
    x, y, _ = _grid(region, grid_n)
    inside = _mask(region, x, y)
    return _distortion(m, x[inside] + 1j * y[inside])


# ---------------------------------------------------------------------------------------------------------------
# toolbox lemmas


def _image_curve(m: HolomorphicMap, radius: float, n: int, max_rounds: int = 60, max_points: int = 400000):
    """
    m on the circle |z| = radius, refined until consecutive image points differ by at most 5% of their modulus.
    """
    theta = 2.0 * math.pi * np.arange(n) / n
    for _ in range(max_rounds):
        w = m(radius * np.exp(1j * theta))
        nxt = np.roll(w, -1)
        bad = np.abs(nxt - w) > 0.05 * np.minimum(np.abs(w), np.abs(nxt))
        if not bad.any() or theta.size > max_points:
            return w
        gaps = np.diff(np.append(theta, 2.0 * math.pi + theta[0]))
        theta = np.sort(np.concatenate([theta, theta[bad] + 0.5 * gaps[bad]]))
    return m(radius * np.exp(1j * theta))


def winding_numbers(curve: np.ndarray, targets: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Winding number of the closed polygon through curve around each target."""
    out = np.empty(targets.size)
    for start in range(0, targets.size, chunk):
        d = curve[np.newaxis, :] - targets[start : start + chunk, np.newaxis]
        out[start : start + chunk] = np.sum(np.angle(np.roll(d, -1, axis=1) / d), axis=1) / (2.0 * math.pi)
    return np.rint(out)


def check_koebe_bounds(
    map_id: MapLike, grid_n: Optional[int] = None, settings: Optional[LemmaSettings] = None
) -> CheckResult:
    """
    Growth, distortion and ratio bounds for a normalized conformal map of the unit disk on a polar grid of
    0 < |z| <= koebe_radius, plus the quarter theorem: every sample of B(0, 1/4 - 1e-6) has winding number one
    with respect to the image of |z| = 1 - winding_radius_gap.

    :param map_id: a normalized map from the suite
    :param grid_n: radial and quarter angular grid size
    :param settings: lemma settings
    :returns: the result; boundary equality within equality_tol (relative) is not a violation
    """
    settings = settings or LemmaSettings.from_params()
    grid_n = grid_n or settings.grid_n
    m = as_map(map_id)
    if not m.normalized:
        raise InvalidParams(f"{m.name} is not a normalized conformal map of the unit disk")
    tally = _Tally(f"koebe:{m.name}")

    r = settings.koebe_radius * np.arange(1, grid_n + 1) / grid_n
    theta = 2.0 * math.pi * np.arange(4 * grid_n) / (4 * grid_n)
    z = (r[:, np.newaxis] * np.exp(1j * theta)[np.newaxis, :]).ravel()
    a = np.abs(z)
    fz = m(z)
    dfz = m.derivative(z)
    inequalities = (
        ("growth", np.abs(fz), a / (1 + a) ** 2, a / (1 - a) ** 2),
        ("distortion", np.abs(dfz), (1 - a) / (1 + a) ** 3, (1 + a) / (1 - a) ** 3),
        ("ratio", np.abs(z * dfz / fz), (1 - a) / (1 + a), (1 + a) / (1 - a)),
    )
    for label, observed, lower, upper in inequalities:
        low_margin = (observed - lower) / lower
        high_margin = (upper - observed) / upper
        margin = np.minimum(low_margin, high_margin)
        bound = np.where(low_margin < high_margin, lower, upper)
        tally.add(z, observed, bound, margin, margin < -settings.equality_tol, label=f"{label} z=")

    quarter = 0.25 - 1e-6
    radii = quarter * np.arange(0, 9) / 8
    targets = np.concatenate([[0j], (radii[1:, np.newaxis] * np.exp(1j * theta)[np.newaxis, :]).ravel()])
    curve = _image_curve(m, 1.0 - settings.winding_radius_gap, settings.n_boundary)
    winding = winding_numbers(curve, targets)
    tally.add(targets, winding, 1.0, None, winding != 1, label="quarter w=")
    logdebug(f"{m.name}: image boundary traced with {curve.size} points")
    return tally.result(settings.equality_tol)


def check_ball_image_inclusion(
    target: MapLike,
    z0: complex,
    r: float,
    n_boundary: Optional[int] = None,
    settings: Optional[LemmaSettings] = None,
) -> CheckResult:
    """
    B(f(z0), inf |f'| r) lies in f(B(z0, r)): the image of the boundary circle stays at least inf |f'| r away
    from f(z0). The image boundary is f of the circle when f is injective on the disk.

    :param target: map or function model, evaluated in ordinary arithmetic
    :param z0: centre
    :param r: radius
    :param n_boundary: boundary samples
    :param settings: lemma settings
    :returns: the result with slack 2 * (boundary gap) * sup |f'|
    """
    settings = settings or LemmaSettings.from_params()
    n = n_boundary or settings.n_boundary
    m = as_map(target)
    z0 = complex(z0)
    if r <= 0:
        raise InvalidParams(f"radius {r} must be positive")
    tally = _Tally(f"ball-image:{m.name}")

    boundary = z0 + r * np.exp(2j * math.pi * np.arange(n) / n)
    distance = np.abs(m(boundary) - m(np.array([z0]))[0])
    k = settings.grid_n
    rings = z0 + r * np.arange(1, k + 1)[:, np.newaxis] / k * np.exp(2j * math.pi * np.arange(4 * k) / (4 * k))
    disk = np.concatenate([[z0], rings.ravel()])
    df = np.abs(m.derivative(disk))
    bound = float(np.min(df)) * r
    slack = 2.0 * (2.0 * math.pi * r / n) * float(np.max(df))
    margin = distance - bound
    tally.add(boundary, distance, bound, margin, margin < -slack, label="z=")
    return tally.result(slack)


def estimate_distortion(
    target: MapLike, square: SquareRegion, c_list: Sequence[float], grid_n: Optional[int] = None
) -> List[DistortionReport]:
    """
    Empirical distortion sup |f'| / inf |f'| over c S for each c, on a grid_n x grid_n grid including the edges.
    Model-backed maps use log-polar derivatives.
    """
    grid_n = grid_n or LemmaSettings.from_params().grid_n
    m = as_map(target)
    reports = []
    for c in c_list:
        if not 0.0 < c <= 1.0:
            raise InvalidParams(f"shrink factor c = {c} must lie in (0, 1]")
        reports.append(DistortionReport(square, c, _distortion(m, _square_grid(square.scaled(c), grid_n))))
    logdebug(f"{m.name}: distortion {[round(r.sup_inf_ratio, 6) for r in reports]} for c = {list(c_list)}")
    return reports


def check_distortion_trend(
    target: MapLike,
    square: SquareRegion,
    c_list: Sequence[float] = (1.0, 0.5, 0.1, 0.01),
    grid_n: Optional[int] = None,
) -> CheckResult:
    """The distortion over c S must not grow as c shrinks."""
    reports = estimate_distortion(target, square, sorted(c_list, reverse=True), grid_n)
    tally = _Tally(f"distortion:{as_map(target).name}")
    for big, small in zip(reports, reports[1:]):
        margin = big.sup_inf_ratio - small.sup_inf_ratio
        tally.add([f"c={small.c:g}"], small.sup_inf_ratio, big.sup_inf_ratio, margin, margin < -1e-12)
    notes = [f"c={r.c:g} ratio={r.sup_inf_ratio:.9g}" for r in reports]
    return tally.result(1e-12, notes=notes)


def collides(target: MapLike, z1: complex, z2: complex, tol: Optional[float] = None) -> bool:
    """|f(z1) - f(z2)| < tol |f(z1)| for two points more than tol apart."""
    tol = tol or LemmaSettings.from_params().collision_tol
    w = as_map(target)(np.array([z1, z2], dtype=complex))
    return abs(z1 - z2) > tol and abs(w[0] - w[1]) < tol * abs(w[0])


def _shifted_values(m: HolomorphicMap, z: np.ndarray, shift: float) -> np.ndarray:
    """f(z) exp(-shift), computed without forming f where it would overflow."""
    model = m.model
    if model is None:
        return m(z) * math.exp(-shift)
    spec = model.spec
    with np.errstate(all="ignore"):
        if isinstance(spec, ExpSumForm):
            first = spec.P.evaluate_array(z) * np.exp(spec.Q.evaluate_array(z) - shift)
            return first + spec.Ptilde.evaluate_array(z) * np.exp(spec.Qtilde.evaluate_array(z) - shift)
        if model.closed_form is not None:
            cf = model.closed_form
            return cf.R.evaluate_array(z) * np.exp(spec.Q.evaluate_array(z) - shift) + cf.C0 * math.exp(-shift)
        return model.evaluate_array(z) * math.exp(-shift)


def check_injectivity_radius(
    target: MapLike,
    z: complex,
    delta_prime: Optional[float] = None,
    n_pairs: Optional[int] = None,
    seed: Optional[int] = None,
    radius: Optional[float] = None,
    settings: Optional[LemmaSettings] = None,
) -> CheckResult:
    """
    Random pairs in B(z, (1 - delta') pi / |Q'(z)|) must have distinct images. A known collision of e^z, the pair
    (0, 2 pi i), is run alongside to show the test can see one.

    :param target: function model, or a map with an explicit radius
    :param z: centre of the ball
    :param delta_prime: shrink parameter
    :param n_pairs: number of random pairs
    :param seed: sampling seed
    :param radius: override of the ball radius
    :param settings: lemma settings
    :returns: the result; pairs whose values are not finite are skipped
    """
    settings = settings or LemmaSettings.from_params()
    delta_prime = settings.delta_prime if delta_prime is None else delta_prime
    n_pairs = n_pairs or settings.n_pairs
    seed = settings.seed if seed is None else seed
    tol = settings.collision_tol
    m = as_map(target)
    z = complex(z)
    shift = 0.0
    if m.model is not None:
        spec = m.model.spec
        shift = max(spec.Q(z).real, spec.Qtilde(z).real if isinstance(spec, ExpSumForm) else 0.0, 0.0)
        if radius is None:
            radius = (1.0 - delta_prime) * math.pi / abs(m.model.dQ(z))
    if radius is None:
        raise InvalidParams(f"{m.name} has no Q; pass the ball radius explicitly")
    tally = _Tally(f"injectivity:{m.name}")

    rng = np.random.default_rng(seed)
    u = rng.random((4, n_pairs))
    z1 = z + radius * np.sqrt(u[0]) * np.exp(2j * math.pi * u[1])
    z2 = z + radius * np.sqrt(u[2]) * np.exp(2j * math.pi * u[3])
    w1, w2 = _shifted_values(m, z1, shift), _shifted_values(m, z2, shift)
    finite = np.isfinite(w1) & np.isfinite(w2) & (w1 != 0)
    observed = np.abs(w1[finite] - w2[finite]) / np.abs(w1[finite])
    apart = np.abs(z1[finite] - z2[finite]) > tol
    pairs = list(zip(z1[finite], z2[finite]))
    tally.add(pairs, observed, tol, np.where(apart, observed - tol, np.inf), apart & (observed < tol))

    notes = [f"ball radius {radius:.6g}"]
    if collides(EXP, 0j, 2j * math.pi, tol):
        notes.append("known collision of e^z at (0, 2 pi i) detected")
    else:
        tally.add(["exp (0, 2 pi i)"], 1.0, tol, None, [True])
        notes.append("known collision of e^z at (0, 2 pi i) NOT detected")
    return tally.result(tol, skipped=int(np.count_nonzero(~finite)), seed=seed, notes=notes)


def check_quasisquare_bounds(
    k: float, shapes: Sequence[BaseGeometry], resolution: Optional[int] = None
) -> CheckResult:
    """
    meas(D) >= diam(D)^2 / (2 k^2) and meas(D within eps of its boundary) <= 4 eps k^2 diam(D) for
    eps = diam / 100 and diam / 20, with rasterised areas.

    :param k: distortion bound of the maps that produced the shapes
    :param shapes: images of squares
    :param resolution: raster size along the longer side of each bounding box
    :returns: the result with the largest pixel-counting error as slack
    """
    resolution = resolution or LemmaSettings.from_params().raster_resolution
    if k < 1:
        raise InvalidParams(f"distortion bound k = {k} must be at least 1")
    tally = _Tally(f"quasi-square:k={k:g}")
    worst_error = 0.0
    for index, shape in enumerate(shapes):
        x, y, pixel = _grid(shape, resolution)
        inside = _mask(shape, x, y)
        area = float(inside.sum()) * pixel**2
        error = shape.length * pixel * SQRT2
        worst_error = max(worst_error, error)
        diam = diameter(shape)
        lower = diam**2 / (2.0 * k**2)
        tally.add([f"shape {index} area"], area, lower, [area - lower], [area - lower < -error])
        for eps in (diam / 100.0, diam / 20.0):
            band = inside & ~_mask(shape.buffer(-eps), x, y)
            band_area = float(band.sum()) * pixel**2
            upper = 4.0 * eps * k**2 * diam
            margin = upper - band_area
            tally.add([f"shape {index} band eps={eps:.4g}"], band_area, upper, [margin], [margin < -error])
    return tally.result(worst_error)


def check_density_transfer(
    map_id: MapLike,
    M_set: BaseGeometry,
    D_set: BaseGeometry,
    resolution: Optional[int] = None,
    k: Optional[float] = None,
) -> CheckResult:
    """
    meas(M & D) / meas(D) <= K^2 meas(f(M) & f(D)) / meas(f(D)), with K the measured distortion of f over D.

    :param map_id: map injective on D
    :param M_set: the measured set
    :param D_set: the domain, of positive area
    :param resolution: raster size
    :param k: distortion bound, measured over D when omitted
    :returns: the result; the slack propagates the relative pixel errors of all four areas
    """
    resolution = resolution or LemmaSettings.from_params().raster_resolution
    m = as_map(map_id)
    if D_set.area <= 0:
        raise InvalidParams("D must have positive area")
    k = measured_distortion(m, D_set) if k is None else k
    md = M_set.intersection(D_set)
    areas = [raster_area(g, resolution) for g in (md, D_set, map_geometry(m, md), map_geometry(m, D_set))]
    a_md, a_d, a_fmd, a_fd = areas
    lhs = a_md.area / a_d.area
    rhs = k**2 * a_fmd.area / a_fd.area

    def relative(a: RasterArea) -> float:
        return a.error / a.area if a.area > 0 else 0.0

    slack = lhs * (relative(a_md) + relative(a_d)) + rhs * (relative(a_fmd) + relative(a_fd))
    tally = _Tally(f"density-transfer:{m.name}")
    tally.add(["density of M in D"], lhs, rhs, [rhs - lhs], [lhs - rhs > slack])
    return tally.result(slack, notes=[f"K = {k:.9g}"])


# ---------------------------------------------------------------------------------------------------------------
# conditions of the measure criterion


def _annulus_samples(rng: np.random.Generator, n: int, radius_range: Tuple[float, float]) -> np.ndarray:
    r0, r1 = radius_range
    if not 0 < r0 < r1:
        raise InvalidParams(f"radius range {radius_range} must satisfy 0 < r0 < r1")
    u, v = rng.random((2, n))
    return np.sqrt(r0**2 + (r1**2 - r0**2) * u) * np.exp(2j * math.pi * v)


def _ratio_note(normalize: bool, nq: float) -> str:
    if normalize:
        return f"ratio bound applied to |f' / (f - s)| / (n|q|), n|q| = {nq:.6g}"
    return "ratio bound applied to |f' / (f - s)| as is"

def check_condition_a(
    model: FunctionModel,
    params: ParameterSet,
    n: int,
    radius_range: Tuple[float, float],
    seed: Optional[int] = None,
    normalize: Optional[bool] = None,
) -> CheckResult:
    """
    On samples in G: either |f - s| <= exp(-|z|^eps) (side Re Q < 0) or |f| >= exp(|z|^eps) (side Re Q > 0), and
    delta1 log|z| <= log|f' / (f - s)| <= delta2 log|z|, all in log-polar arithmetic.

    :param model: the function model
    :param params: epsilon, delta1, delta2
    :param n: number of samples drawn from the annulus
    :param radius_range: (r0, r1)
    :param seed: sampling seed
    :param normalize: divide f' / (f - s) by n |q|, the leading coefficient of Q', before comparing with |z|^delta;
        off unless lemmas/condition_a_normalize says otherwise
    :returns: the result; samples outside G are skipped
    """
    settings = LemmaSettings.from_params()
    seed = settings.seed if seed is None else seed
    normalize = settings.condition_a_normalize if normalize is None else normalize
    geom = model.geometry()
    spec = model.spec
    scale = math.log(geom.deg_q * abs(geom.q)) if normalize else 0.0
    tally = _Tally(f"condition-a:{model.name}")
    skipped = 0
    for z in _annulus_samples(np.random.default_rng(seed), n, radius_range):
        z = complex(z)
        zl = LogComplex.from_complex(z)
        membership = in_G(geom, spec, zl)
        if not membership.inside:
            skipped += 1
            continue
        log_r = zl.log_mod
        growth = math.exp(params.epsilon * log_r)
        remainder = model.remainder_lc(z)
        if membership.re_q_sign > 0:
            tally.add([f"dichotomy z={z:.6g}"], remainder.log_mod, growth, None, [remainder.log_mod < growth])
        else:
            tally.add([f"dichotomy z={z:.6g}"], remainder.log_mod, -growth, None, [remainder.log_mod > -growth])
        ratio = model.derivative(zl).log_mod - remainder.log_mod - scale
        lower, upper = params.delta1 * log_r, params.delta2 * log_r
        margin = min(ratio - lower, upper - ratio)
        bound = lower if ratio - lower < upper - ratio else upper
        tally.add([f"ratio z={z:.6g}"], ratio, bound, [margin], [margin < 0])
    return tally.result(skipped=skipped, seed=seed, notes=[_ratio_note(normalize, geom.deg_q * abs(geom.q))])


def check_asymptotic_residual(
    model: FunctionModel,
    n: int,
    radius_range: Tuple[float, float],
    seed: Optional[int] = None,
    settings: Optional[LemmaSettings] = None,
) -> CheckResult:
    """
    The residual log|f - s - P e^Q / Q'| - (deg P - deg Q) log|z| - Re Q(z) stays bounded on samples with
    re_q_floor <= Re Q(z) <= -|z|^delta. Reports its maximum and its regression slope against log|z|, which must
    not exceed residual_slope_max. Residuals below the quadrature noise count as exact.

    :param model: integral-form model
    :param n: number of samples
    :param radius_range: (r0, r1)
    :param seed: sampling seed
    :param settings: lemma settings
    :returns: the result
    """
    settings = settings or LemmaSettings.from_params()
    seed = settings.seed if seed is None else seed
    spec = model.spec
    if isinstance(spec, ExpSumForm):
        raise InvalidParams("the expansion residual applies to the integral form only")
    geom = model.geometry()
    tol = settings.residual_quad_tol
    report = model.asymptotic_values(tol=tol)
    dQ = spec.Q.derivative()

    rng = np.random.default_rng(seed)
    accepted: List[complex] = []
    for _ in range(50):
        z = _annulus_samples(rng, 200 * n, radius_range)
        re_q = np.real(spec.Q.evaluate_array(z))
        keep = (re_q <= -np.abs(z) ** geom.delta) & (re_q >= settings.residual_re_q_floor)
        accepted.extend(z[keep][: n - len(accepted)].tolist())
        if len(accepted) >= n:
            break
    if len(accepted) < n:
        logwarn(f"{model.name}: only {len(accepted)} of {n} residual samples found")

    log_r, residual, exact = [], [], 0
    for z in accepted:
        k, _ = nearest_asymptotic(geom, LogComplex.from_complex(z))
        s = report.sectors[k].value
        f = model.evaluate(z, tol)
        diff = f - s - spec.P(z) * cmath.exp(spec.Q(z)) / dQ(z)
        if abs(diff) <= 100.0 * tol * max(1.0, abs(f), abs(s)):
            exact += 1
            continue
        log_r.append(math.log(abs(z)))
        residual.append(math.log(abs(diff)) - (spec.P.degree - spec.Q.degree) * log_r[-1] - spec.Q(z).real)

    tally = _Tally(f"asymptotic-residual:{model.name}")
    notes = [f"{exact} sample(s) exact within the quadrature tolerance"]
    if len(residual) >= 3 and max(log_r) > min(log_r):
        slope = float(np.polyfit(log_r, residual, 1)[0])
        fitted = max(residual)
        notes.append(f"fitted C = {fitted:.6g}, slope = {slope:.6g}")
        limit = settings.residual_slope_max
        tally.add(["slope"], slope, limit, [limit - slope], [slope > limit])
    else:
        notes.append("expansion exact on the sample")
    return tally.result(tol, skipped=exact, seed=seed, notes=notes, n=len(accepted))


def check_condition_b(
    model: FunctionModel,
    params: ParameterSet,
    window: SquareRegion,
    n_side: Optional[int] = None,
    resolution: Optional[int] = None,
) -> CheckResult:
    """
    meas(D) <= B diam(D) sup_D |z|^beta for D = S & {dist(z, C \\ G) <= 2|z|^(-delta1)}, S running over an
    n_side x n_side grid of squares over the window. Areas are pixel counts, diameters those of the bounding box
    of the pixels in D. Necessary, not sufficient, for the condition.
    """
    settings = LemmaSettings.from_params()
    n_side = n_side or settings.condition_b_squares
    resolution = resolution or settings.condition_b_resolution
    geom = model.geometry()
    spec = model.spec
    tally = _Tally(f"condition-b:{model.name}")
    h = window.half_side / n_side
    pixel = 2.0 * h / resolution
    offsets = -h + (np.arange(resolution) + 0.5) * pixel
    local = offsets[np.newaxis, :] + 1j * offsets[:, np.newaxis]
    skipped = 0
    for i in range(n_side):
        for j in range(n_side):
            centre = window.center - window.half_side + h + 2 * h * i + 1j * (-window.half_side + h + 2 * h * j)
            pts = centre + local
            r = np.abs(pts)
            with np.errstate(divide="ignore"):
                in_band = band_distance(geom, spec, pts) <= 2.0 * r ** (-params.delta1)
            if not in_band.any():
                skipped += 1
                continue
            d = pts[in_band]
            meas = float(in_band.sum()) * pixel**2
            width = np.ptp(d.real) + pixel
            height = np.ptp(d.imag) + pixel
            diam = math.hypot(width, height)
            bound = params.B * diam * float(np.max(np.abs(d) ** params.beta))
            slack = 2.0 * pixel * (width + height)
            tally.add([f"square {centre:.6g}"], meas, bound, [bound - meas], [meas - bound > slack])
    return tally.result(2.0 * pixel * 4.0 * h, skipped=skipped)


def check_condition_c(
    model: FunctionModel, params: ParameterSet, max_iter: Optional[int] = None, n_boundary: Optional[int] = None
) -> CheckResult:
    """
    For each asymptotic value s and each orbit point w = f^m(s) with |w| > M, the ball B(w, 2|w|^tau) lies in G,
    tested on n_boundary points of its boundary in log-polar form. Saturated points are skipped.
    """
    n_boundary = n_boundary or LemmaSettings.from_params().n_boundary
    geom = model.geometry()
    spec = model.spec
    log_m = math.log(geom.M)
    tally = _Tally(f"condition-c:{model.name}")
    skipped = 0
    theta = 2.0 * math.pi * np.arange(n_boundary) / n_boundary
    for value, _ in model.asymptotic_values().groups:
        record = iterate_orbit(model, value, max_iter)
        for index, w in enumerate(record.points):
            if w.is_zero or w.log_mod <= log_m:
                continue
            if w.saturated or not w.arg_valid:
                skipped += 1
                continue
            relative = 2.0 * math.exp((params.tau - 1.0) * w.log_mod)
            unit = np.exp(1j * theta)
            if w.log_mod <= 700.0:
                wc = w.to_complex()
                ring = [LogComplex.from_complex(wc + relative * abs(wc) * u) for u in unit]
            else:
                ring = [lc_mul(w, LogComplex.from_complex(1.0 + relative * u)) for u in unit]
            memberships = [in_G(geom, spec, p) for p in ring]
            margins = np.array([g.margin for g in memberships])
            outside = np.array([not g.inside for g in memberships])
            tally.add(theta, margins, 0.0, margins, outside, label=f"s={value:.6g} m={index} theta=")
    return tally.result(skipped=skipped)
