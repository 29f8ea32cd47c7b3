"""
Orbit iteration across the evaluation regimes, escape certification and cycle detection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from model.function_model import FunctionModel
from orbits.record import (
    AttractedToCycle,
    CycleInfo,
    ExponentialEscape,
    OrbitClassification,
    OrbitRecord,
    Preperiodic,
    StopReason,
    Undecided,
)
from util.errors import (
    ArgInvalid,
    DirectionUndecidable,
    EvaluationOverflow,
    InsufficientTail,
    InvalidParams,
    InvalidValue,
    QuadratureError,
    TailNotDecaying,
)
from util.log import logdebug
from util.log_complex import LogComplex
from util.params import get_param

# failures that end an orbit in the error state instead of propagating
ORBIT_ERRORS = (
    ArgInvalid,
    DirectionUndecidable,
    EvaluationOverflow,
    InvalidValue,
    QuadratureError,
    TailNotDecaying,
)


@dataclass(frozen=True)
class OrbitSettings:
    max_iter: int = 200
    delta_min: float = 0.05
    min_tail: int = 3
    cycle_tol: float = 1e-9
    max_period: int = 64
    # escape radius M of the tail rule
    M: float = 10.0

    def __post_init__(self):
        if self.M <= 1.0:
            raise InvalidParams(f"escape radius M = {self.M} must exceed 1")

    @classmethod
    def from_params(cls) -> OrbitSettings:
        return cls(
            max_iter=get_param("orbit/max_iter", cls.max_iter),
            delta_min=get_param("orbit/delta_min", cls.delta_min),
            min_tail=get_param("orbit/min_tail", cls.min_tail),
            cycle_tol=get_param("orbit/cycle_tol", cls.cycle_tol),
            max_period=get_param("orbit/max_period", cls.max_period),
            M=get_param("function_model/M", cls.M),
        )


def _close(a: complex, b: complex, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def escape_exponents(log_mods: Sequence[float]) -> List[float]:
    """
    d_n = ln(log|z_{n+1}|) / log|z_n| for consecutive iterates, so that |z_{n+1}| = exp(|z_n|^{d_n}).
    A step into saturation has d_n = inf, a step back into the closed unit disc d_n = -inf.

    :raises InvalidParams: if some |z_n| before the last is at most 1, where d_n is undefined
    """
    out = []
    for cur, nxt in zip(log_mods, log_mods[1:]):
        if not cur > 0.0:
            raise InvalidParams(f"escape exponent undefined at log|z| = {cur}, need |z| > 1")
        if nxt == math.inf:
            out.append(math.inf)
        elif nxt <= 0.0:
            out.append(-math.inf)
        else:
            out.append(math.log(nxt) / cur)
    return out


def _log_mods(orbit: Union[OrbitRecord, Sequence[LogComplex], Sequence[float]]) -> List[float]:
    points = orbit.points if isinstance(orbit, OrbitRecord) else orbit
    return [p.log_mod if isinstance(p, LogComplex) else float(p) for p in points]


def _escaping_tail(log_mods: List[float], log_M: float) -> List[float]:
    start = len(log_mods)
    while start > 0 and log_mods[start - 1] > log_M:
        start -= 1
    return log_mods[start:]


def classify_escape(
    orbit: Union[OrbitRecord, Sequence[LogComplex], Sequence[float]],
    delta_min: Optional[float] = None,
    M: Optional[float] = None,
    min_tail: Optional[int] = None,
) -> Tuple[bool, Optional[float]]:
    """
    Decide exponential escape from the tail of an orbit: the longest run of final iterates with |z| > M must have
    at least min_tail points and every escape exponent d_n along it must be at least delta_min.

    :param orbit: an orbit record, or its points as LogComplex values or log-moduli
    :param delta_min: smallest accepted exponent
    :param M: escape radius
    :param min_tail: number of iterates needed beyond M
    :returns: (escapes, delta_hat) with delta_hat the smallest finite exponent of the tail, None if not escaping
    :raises InsufficientTail: if fewer than min_tail final iterates lie beyond M
    :raises InvalidParams: if M <= 1
    """
    defaults = OrbitSettings.from_params()
    delta_min = defaults.delta_min if delta_min is None else delta_min
    M = defaults.M if M is None else M
    min_tail = defaults.min_tail if min_tail is None else min_tail
    if M <= 1.0:
        raise InvalidParams(f"escape radius M = {M} must exceed 1")

    tail = _escaping_tail(_log_mods(orbit), math.log(M))
    if len(tail) < min_tail:
        raise InsufficientTail(f"only {len(tail)} final iterate(s) beyond |z| = {M}, need {min_tail}")
    exponents = escape_exponents(tail)
    if not all(d >= delta_min for d in exponents):
        return False, None
    finite = [d for d in exponents if math.isfinite(d)]
    return True, min(finite) if finite else math.inf


def _brent(xs: Sequence[complex], tol: float) -> Optional[Tuple[int, int]]:
    n = len(xs)
    if n < 2:
        return None
    power = lam = 1
    tortoise, hare = 0, 1
    while not _close(xs[tortoise], xs[hare], tol):
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare += 1
        lam += 1
        if hare >= n:
            return None
    # a numerically detected lam can be a multiple of the true period
    for p in range(1, lam + 1):
        if lam % p == 0 and _close(xs[tortoise], xs[tortoise + p], tol):
            lam = p
            break
    mu = 0
    while mu + lam < n and not _close(xs[mu], xs[mu + lam], tol):
        mu += 1
    if mu + lam >= n:
        return None
    return mu, lam


def nominal_complex(z: LogComplex) -> complex:
    """
    z as an ordinary complex number, or complex infinity when its modulus is beyond the double range.
    """
    try:
        return z.to_complex()
    except (EvaluationOverflow, ArgInvalid):
        return complex(math.inf, 0.0)


def _moderate_suffix(points: Sequence[LogComplex], log_r: float) -> Tuple[int, List[complex]]:
    start = len(points)
    while start > 0:
        p = points[start - 1]
        if not (p.is_zero or (p.arg_valid and p.log_mod <= log_r)):
            break
        start -= 1
    return start, [p.to_complex() for p in points[start:]]


def detect_cycle(
    orbit: Union[OrbitRecord, Sequence[complex]],
    tol: Optional[float] = None,
    max_period: Optional[int] = None,
    model: Optional[FunctionModel] = None,
) -> Optional[CycleInfo]:
    """
    Brent cycle detection on the moderate part of an orbit, with relative tolerance tol, followed by the cycle
    multiplier sum(log|f'|) over one period when a model is given.

    :param orbit: an orbit record (its final run of iterates with |z| <= r_switch is used) or a complex sequence
    :param tol: relative revisit tolerance
    :param max_period: longest period accepted
    :param model: the function model, needed for the multiplier
    :returns: the cycle, or None if the sequence shows none
    """
    defaults = OrbitSettings.from_params()
    tol = defaults.cycle_tol if tol is None else tol
    max_period = defaults.max_period if max_period is None else max_period

    offset = 0
    if isinstance(orbit, OrbitRecord):
        log_r = model.log_r_switch if model is not None else math.inf
        offset, xs = _moderate_suffix(orbit.points, log_r)
    else:
        xs = [complex(x) for x in orbit]
    found = _brent(xs, tol)
    if found is None or found[1] > max_period:
        return None
    mu, lam = found
    # the latest period is the best converged one
    cycle = xs[len(xs) - lam :]
    multiplier = math.nan
    if model is not None:
        multiplier = math.fsum(model.derivative(LogComplex.from_complex(z)).log_mod for z in cycle)
    representative = min(cycle, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    return CycleInfo(mu + offset, lam, multiplier, xs[mu] == xs[mu + lam], representative)


def _classify_cycle(cycle: CycleInfo) -> OrbitClassification:
    # an exact revisit or a non-attracting cycle can only be reached by landing on it
    if cycle.exact or not cycle.multiplier_log_mod < 0:
        return Preperiodic(cycle.preperiod, cycle.period)
    return AttractedToCycle(cycle.period, cycle.multiplier_log_mod, cycle.representative)


def iterate_orbit(
    model: FunctionModel,
    z0: Union[complex, LogComplex],
    max_iter: Optional[int] = None,
    settings: Optional[OrbitSettings] = None,
) -> OrbitRecord:
    """
    Iterate f from z0, evaluating in ordinary arithmetic below r_switch and by the asymptotic expansion above it.
    Stops at saturation, at a detected cycle or when the budget runs out. Evaluation failures end the orbit in the
    error state; they are recorded, not raised.

    :param model: the function model
    :param z0: the starting point, in log-polar form when it may lie beyond the double range
    :param max_iter: number of applications of f, at least 1
    :param settings: orbit settings, read from the config when omitted
    :returns: the classified orbit
    """
    settings = settings or OrbitSettings.from_params()
    max_iter = settings.max_iter if max_iter is None else max_iter
    if max_iter < 1:
        raise InvalidParams(f"max_iter = {max_iter} must be at least 1")
    log_r = model.log_r_switch

    z = z0 if isinstance(z0, LogComplex) else LogComplex.from_complex(z0)
    start = nominal_complex(z)
    points, regimes = [z], ["start"]
    recent: List[complex] = [start] if z.is_zero or (z.arg_valid and z.log_mod <= log_r) else []
    stop = StopReason.budget_exhausted
    cycle: Optional[CycleInfo] = None
    error, error_index = None, None
    for n in range(1, max_iter + 1):
        if z.saturated:
            stop = StopReason.saturated
            break
        try:
            z, regime = model.value_lc(z)
        except ORBIT_ERRORS as e:
            error, error_index = f"{type(e).__name__}: {e}", n
            stop = StopReason.error_state
            logdebug(f"orbit of {start}: {error} at step {n}")
            break
        points.append(z)
        regimes.append(regime)
        if z.saturated:
            stop = StopReason.saturated
            break
        if not (z.is_zero or (z.arg_valid and z.log_mod <= log_r)):
            recent.clear()
            continue
        w = z.to_complex()
        if any(_close(w, v, settings.cycle_tol) for v in recent[-settings.max_period :]):
            partial = OrbitRecord(start, tuple(points), tuple(regimes), Undecided(z.log_mod), stop)
            cycle = detect_cycle(partial, settings.cycle_tol, settings.max_period, model)
            if cycle is not None:
                stop = StopReason.cycle_found
                break
        recent.append(w)

    classification = _final_classification(points, stop, cycle, settings)
    return OrbitRecord(start, tuple(points), tuple(regimes), classification, stop, cycle, error, error_index)


def _final_classification(
    points: List[LogComplex], stop: StopReason, cycle: Optional[CycleInfo], settings: OrbitSettings
) -> OrbitClassification:
    if cycle is not None:
        return _classify_cycle(cycle)
    try:
        escaping, delta_hat = classify_escape(points, settings.delta_min, settings.M, settings.min_tail)
    except InsufficientTail:
        escaping, delta_hat = False, None
    if escaping and delta_hat is not None:
        return ExponentialEscape(delta_hat)
    if stop is StopReason.saturated:
        # saturation certifies escape; the exponent comes from whatever tail there is
        tail = _escaping_tail([p.log_mod for p in points], math.log(settings.M))
        finite = [d for d in escape_exponents(tail) if math.isfinite(d)]
        return ExponentialEscape(min(finite) if finite else math.inf)
    return Undecided(points[-1].log_mod)
