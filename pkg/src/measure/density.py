"""
Monte-Carlo density estimates of the escaping and trapped sets over squares and annuli.

Membership in the trapped set cannot be decided in finite time. A sample counts as a hit when its orbit is
certified to escape exponentially or saturates. Under EscapedOrShadowsA it also counts when it comes within
eps_shadow (relative) of a stored orbit of an escaping asymptotic value and then follows that orbit out. A sample
whose orbit ended in the error state is never a hit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from aenum import Enum, NoAlias
from scipy import stats

from measure.parameters import ParameterSet, density_bound
from measure.squares import SquareRegion
from model.function_model import FunctionModel
from orbits.iteration import OrbitSettings, iterate_orbit
from orbits.record import ExponentialEscape, OrbitRecord, StopReason
from util.errors import InvalidParams, TailNotDecaying
from util.log import loginfo, logwarn
from util.parallel import parallel_map
from util.params import get_param

MIN_SAMPLES = 100


class HitPredicate(Enum):
    _settings_ = NoAlias

    escaped_or_shadows_a = "EscapedOrShadowsA"
    escaped = "Escaped"
    non_escaping = "NonEscaping"


@dataclass(frozen=True)
class Annulus:
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not 0 <= self.r_inner <= self.r_outer:
            raise InvalidParams(f"annulus radii {self.r_inner}, {self.r_outer} must satisfy 0 <= r_in <= r_out")

    @property
    def area(self) -> float:
        return math.pi * (self.r_outer**2 - self.r_inner**2)

    @property
    def inf_abs(self) -> float:
        return self.r_inner

    def sample(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Area-uniform: r = sqrt(R^2 + (R_out^2 - R^2) u), angle 2 pi v."""
        r = np.sqrt(self.r_inner**2 + (self.r_outer**2 - self.r_inner**2) * u)
        return r * np.exp(2j * math.pi * v)

    def __str__(self) -> str:
        return f"annulus[{self.r_inner:g},{self.r_outer:g}]"


Region = Union[SquareRegion, Annulus]


def _describe(region: Region) -> str:
    if isinstance(region, SquareRegion):
        c = region.center
        return f"square[{c.real:g}{c.imag:+g}i,{region.half_side:g}]"
    return str(region)


@dataclass(frozen=True)
class DensityEstimate:
    region: Region
    n_samples: int
    n_hit: int
    n_error: int
    fraction: float
    ci_low: float
    ci_high: float
    hit_predicate: HitPredicate
    # 1 - exp(-eta M0^eps) with M0 = inf |z| over the region, when parameters were given
    theory_bound: Optional[float] = None

    def row(self) -> dict:
        return {
            "region": _describe(self.region),
            "n": self.n_samples,
            "hits": self.n_hit,
            "fraction": self.fraction,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "errors": self.n_error,
            "predicate": self.hit_predicate.value,
            "theory_bound": self.theory_bound if self.theory_bound is not None else math.nan,
        }


def wilson_interval(hits: int, n: int, confidence: Optional[float] = None) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    :param hits: number of successes
    :param n: number of trials
    :param confidence: two-sided confidence level
    :returns: (low, high), (0, 1) when n = 0
    """
    confidence = get_param("measure/wilson_confidence", 0.95) if confidence is None else confidence
    if n == 0:
        return 0.0, 1.0
    z = stats.norm.ppf(1.0 - (1.0 - confidence) / 2.0)
    phat = hits / n
    a = phat + z**2 / (2 * n)
    b = z * math.sqrt(phat * (1 - phat) / n + z**2 / (4 * n**2))
    c = 1 + z**2 / n
    return max(0.0, (a - b) / c), min(1.0, (a + b) / c)


def sample_points(region: Region, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """
    n points in the region. Point i depends only on (seed, stream, i), so any split of the index range between
    workers reproduces the same sample.
    """
    u = np.empty(n)
    v = np.empty(n)
    for i in range(n):
        u[i], v[i] = np.random.default_rng([seed, stream, i]).random(2)
    return region.sample(u, v)


@dataclass(frozen=True)
class DensitySettings:
    n_samples: int = 10000
    max_iter: int = 60
    seed: int = 20240601
    eps_shadow: float = 1e-3

    @classmethod
    def from_params(cls) -> DensitySettings:
        return cls(
            n_samples=get_param("measure/n_samples", cls.n_samples),
            max_iter=get_param("measure/max_iter", cls.max_iter),
            seed=get_param("measure/seed", cls.seed),
            eps_shadow=get_param("measure/eps_shadow", cls.eps_shadow),
        )


class ShadowSet:
    """
    Stored orbits of the escaping asymptotic values. Each stored point in the moderate regime keeps the number of
    further steps its orbit took to escape.
    """

    def __init__(self, orbits: Sequence[OrbitRecord], log_r: float, eps: float):
        self.eps = eps
        self.points: List[complex] = []
        self.steps_left: List[int] = []
        for record in orbits:
            if not escaped(record):
                continue
            last = len(record.points) - 1
            for i, p in enumerate(record.points):
                if p.is_zero or (p.arg_valid and p.log_mod <= log_r):
                    self.points.append(p.to_complex())
                    self.steps_left.append(last - i)

    @classmethod
    def for_model(cls, model: FunctionModel, max_iter: int, eps: float) -> ShadowSet:
        try:
            groups = model.asymptotic_values().groups
        except TailNotDecaying as e:
            logwarn(f"{model.name}: no shadow set, {e}")
            groups = ()
        return cls([iterate_orbit(model, value, max_iter) for value, _ in groups], model.log_r_switch, eps)

    def match(self, record: OrbitRecord) -> Optional[Tuple[int, int]]:
        """
        :returns: (j, steps_left) for the first iterate j of the record within eps (relative) of a stored point,
            steps_left being what the stored orbit still needed from there; None if nothing comes close
        """
        if not self.points:
            return None
        stored = np.array(self.points)
        scale = self.eps * np.maximum(1.0, np.abs(stored))
        for j, p in enumerate(record.points):
            if p.is_zero or (p.arg_valid and p.log_mod <= 700.0):
                near = np.flatnonzero(np.abs(stored - p.to_complex()) <= scale)
                if near.size:
                    return j, max(self.steps_left[k] for k in near)
        return None

    def shadows(self, record: OrbitRecord) -> bool:
        """
        A record shadows when it comes close to a stored point and then follows the stored orbit out: it ends
        Saturated or ExponentialEscape, or its budget ran out while its modulus was still growing at every step
        and before the stored orbit itself would have escaped.
        """
        found = self.match(record)
        if found is None:
            return False
        if escaped(record):
            return True
        if record.stop_reason is not StopReason.budget_exhausted:
            return False
        j, steps_left = found
        tail = [p.log_mod for p in record.points[j:]]
        return len(tail) - 1 < steps_left and all(b > a for a, b in zip(tail, tail[1:]))


def escaped(record: OrbitRecord) -> bool:
    return isinstance(record.classification, ExponentialEscape) or record.stop_reason is StopReason.saturated


def count_hits(records: Sequence[OrbitRecord], hit: Callable[[OrbitRecord], bool]) -> Tuple[int, int]:
    """
    :returns: (hits, errors); a record in the error state is never a hit, whatever the predicate says
    """
    hits = errors = 0
    for r in records:
        if r.stop_reason is StopReason.error_state:
            errors += 1
        elif hit(r):
            hits += 1
    return hits, errors


def _estimate(
    region: Region, records: Sequence[OrbitRecord], hit, predicate: HitPredicate, theory: Optional[float] = None
) -> DensityEstimate:
    n = len(records)
    hits, errors = count_hits(records, hit)
    lo, hi = wilson_interval(hits, n)
    return DensityEstimate(region, n, hits, errors, hits / n if n else 0.0, lo, hi, predicate, theory)


def _orbits(model: FunctionModel, points: np.ndarray, max_iter: int, threads: Optional[int]) -> List[OrbitRecord]:
    orbit_settings = OrbitSettings.from_params()
    return parallel_map(lambda z: iterate_orbit(model, complex(z), max_iter, orbit_settings), list(points), threads)


def estimate_escape_density(
    model: FunctionModel,
    region: SquareRegion,
    n: Optional[int] = None,
    max_iter: Optional[int] = None,
    seed: Optional[int] = None,
    eps_shadow: Optional[float] = None,
    params: Optional[ParameterSet] = None,
    threads: Optional[int] = None,
    predicate: HitPredicate = HitPredicate.escaped_or_shadows_a,
) -> DensityEstimate:
    """
    Fraction of the region whose orbits escape (or shadow an escaping asymptotic orbit), with a Wilson interval.

    :param model: the function model
    :param region: the square to sample
    :param n: number of samples, at least 100
    :param max_iter: orbit budget per sample
    :param seed: base seed
    :param eps_shadow: relative shadowing radius
    :param params: when given, the estimate carries the lower bound 1 - exp(-eta M0^eps)
    :param threads: worker count hint
    :param predicate: EscapedOrShadowsA or Escaped
    :returns: the estimate; evaluation failures are non-hits, counted in n_error
    """
    defaults = DensitySettings.from_params()
    n = defaults.n_samples if n is None else n
    max_iter = defaults.max_iter if max_iter is None else max_iter
    seed = defaults.seed if seed is None else seed
    eps_shadow = defaults.eps_shadow if eps_shadow is None else eps_shadow
    if n < MIN_SAMPLES:
        raise InvalidParams(f"n = {n} samples, need at least {MIN_SAMPLES}")

    shadow = None
    if predicate is HitPredicate.escaped_or_shadows_a:
        shadow = ShadowSet.for_model(model, max_iter, eps_shadow)
    records = _orbits(model, sample_points(region, n, seed), max_iter, threads)

    def hit(r: OrbitRecord) -> bool:
        return escaped(r) or (shadow is not None and shadow.shadows(r))

    theory = None
    if params is not None and region.inf_abs > 0:
        theory = density_bound(params, region.inf_abs)
    estimate = _estimate(region, records, hit, predicate, theory)
    loginfo(
        f"{model.name}: {_describe(region)} {estimate.n_hit}/{n} hits "
        f"[{estimate.ci_low:.4f}, {estimate.ci_high:.4f}], {estimate.n_error} error(s)"
    )
    return estimate


@dataclass(frozen=True)
class TailTable:
    estimates: Tuple[DensityEstimate, ...]

    @property
    def fractions(self) -> List[float]:
        return [e.fraction for e in self.estimates]

    @property
    def tail_terms(self) -> List[float]:
        """fraction * 2 pi (R + 0.5): the non-escaping area of each unit annulus."""
        return [e.fraction * 2.0 * math.pi * (e.region.r_inner + 0.5) for e in self.estimates]

    def to_frame(self) -> pd.DataFrame:
        rows = [e.row() for e in self.estimates]
        terms = self.tail_terms
        partial = np.cumsum(terms).tolist() if terms else []
        for row, e, t, s in zip(rows, self.estimates, terms, partial):
            row.update({"R": e.region.r_inner, "tail_term": t, "partial_sum": s})
        return pd.DataFrame(rows)


def estimate_nonescaping_tail(
    model: FunctionModel,
    radii: Sequence[float],
    n_per_annulus: Optional[int] = None,
    max_iter: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> TailTable:
    """
    Non-escaping fraction of each unit annulus R <= |z| <= R + 1.

    :param model: the function model
    :param radii: inner radii, ascending, at least two
    :param n_per_annulus: samples per annulus; 0 gives an empty table
    :param max_iter: orbit budget per sample
    :param seed: base seed, the annulus index selects the stream
    :param threads: worker count hint
    :returns: the table of estimates with predicate NonEscaping
    """
    defaults = DensitySettings.from_params()
    n = defaults.n_samples if n_per_annulus is None else n_per_annulus
    max_iter = defaults.max_iter if max_iter is None else max_iter
    seed = defaults.seed if seed is None else seed
    radii = list(radii)
    if len(radii) < 2 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidParams(f"radii {radii} must be strictly ascending with at least two entries")
    if n == 0:
        return TailTable(())

    estimates = []
    for k, R in enumerate(radii):
        annulus = Annulus(R, R + 1.0)
        records = _orbits(model, sample_points(annulus, n, seed, stream=k + 1), max_iter, threads)
        estimates.append(_estimate(annulus, records, lambda r: not escaped(r), HitPredicate.non_escaping))
        loginfo(f"{model.name}: {annulus} non-escaping fraction {estimates[-1].fraction:.4f}")
    return TailTable(tuple(estimates))
