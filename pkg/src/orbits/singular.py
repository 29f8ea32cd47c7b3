"""
Orbits of the singular values (asymptotic and critical values) and the recurrence verdict drawn from them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import math

import pandas as pd
from aenum import Enum, NoAlias

from model.function_model import FunctionModel, group_values
from model.spec_io import IntegralForm
from orbits.iteration import ORBIT_ERRORS, OrbitSettings, iterate_orbit, nominal_complex
from orbits.record import AttractedToCycle, ExponentialEscape, OrbitRecord, Preperiodic
from util.log import loginfo, logwarn
from util.log_complex import LogComplex


class Role(Enum):
    _settings_ = NoAlias

    asymptotic = "asymptotic"
    critical = "critical"


class Verdict(Enum):
    _settings_ = NoAlias

    not_recurrent = "NotRecurrent"
    recurrent_ergodic = "RecurrentErgodic"
    inconclusive = "Inconclusive"


@dataclass(frozen=True)
class SingularOrbit:
    role: Role
    # None when the critical value itself could not be evaluated; infinite when beyond the double range
    value: Optional[complex]
    multiplicity: int
    record: OrbitRecord
    # the critical point whose value this is
    source: Optional[complex] = None
    # True when the critical point itself lies on a cycle
    source_periodic: bool = False

    @property
    def log_mod(self) -> float:
        if self.value is None:
            return math.nan
        return self.record.points[0].log_mod


@dataclass(frozen=True)
class SingularReport:
    name: str
    integral_form: bool
    orbits: Tuple[SingularOrbit, ...]

    @property
    def asymptotic(self) -> List[SingularOrbit]:
        return [o for o in self.orbits if o.role is Role.asymptotic]

    @property
    def critical(self) -> List[SingularOrbit]:
        return [o for o in self.orbits if o.role is Role.critical]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "role": o.role.value,
                    "re": o.value.real if o.value is not None else math.nan,
                    "im": o.value.imag if o.value is not None else math.nan,
                    "log_mod": o.log_mod,
                    "multiplicity": o.multiplicity,
                    "classification": o.record.classification.label,
                    "delta_hat": o.record.delta_hat,
                    "stop_reason": o.record.stop_reason.value,
                    "iterates": len(o.record.points) - 1,
                    "source_periodic": o.source_periodic,
                }
                for o in self.orbits
            ]
        )


@dataclass(frozen=True)
class RecurrenceVerdict:
    verdict: Verdict
    justification: str
    reasons: Tuple[str, ...] = field(default_factory=tuple)
    # preperiodicity and escape are certified numerically, not proved
    numerical_evidence: bool = True

    def describe(self) -> str:
        lines = [f"verdict: {self.verdict.value}", f"justification: {self.justification}"]
        lines.extend(f"  - {r}" for r in self.reasons)
        if self.numerical_evidence:
            lines.append("note: based on numerical orbit evidence (tolerances from the config)")
        return "\n".join(lines)


def singular_orbit_report(
    model: FunctionModel, max_iter: Optional[int] = None, settings: Optional[OrbitSettings] = None
) -> SingularReport:
    """
    One orbit per distinct asymptotic value and per distinct critical value, with multiplicities.

    :param model: the function model
    :param max_iter: iteration budget per orbit
    :param settings: orbit settings
    :returns: the report
    :raises Unsupported: from critical_points for exponential sums without the Qt = -Q symmetry
    """
    settings = settings or OrbitSettings.from_params()
    orbits = []
    for value, count in model.asymptotic_values().groups:
        orbits.append(SingularOrbit(Role.asymptotic, value, count, iterate_orbit(model, value, max_iter, settings)))

    tol = model.settings.multiplicity_tol
    for point, count in group_values(list(model.critical_points()), tol):
        # the critical point is periodic when its own orbit returns to it
        own = iterate_orbit(model, point, max_iter, settings)
        periodic = own.cycle is not None and own.cycle.preperiod == 0
        try:
            value, _ = model.value_lc(LogComplex.from_complex(point))
        except ORBIT_ERRORS as e:
            # own ended in the error state at its first step for the same reason
            logwarn(f"{model.name}: critical value at {point:.9g} failed: {type(e).__name__}: {e}")
            orbits.append(SingularOrbit(Role.critical, None, count, own, point, periodic))
            continue
        record = iterate_orbit(model, value, max_iter, settings)
        orbits.append(SingularOrbit(Role.critical, nominal_complex(value), count, record, point, periodic))

    loginfo(f"{model.name}: {len(orbits)} singular orbit(s) computed")
    return SingularReport(model.name, isinstance(model.spec, IntegralForm), tuple(orbits))


def _value_text(o: SingularOrbit, digits: int = 9) -> str:
    if o.value is None:
        return f"f({o.source:.{digits}g}) (not evaluated)"
    if math.isinf(o.value.real):
        p = o.record.points[0]
        arg = f" arg {p.arg:.6g}" if p.arg_valid else ""
        return f"of modulus exp({p.log_mod:.6g}){arg}"
    return f"{o.value:.{digits}g}"


def _reason(o: SingularOrbit) -> str:
    what = "asymptotic value" if o.role is Role.asymptotic else "critical value"
    text = f"{what} {_value_text(o)} (x{o.multiplicity}): {o.record.describe()}"
    if o.source_periodic:
        text += f"; critical point {o.source:.9g} lies on a cycle"
    return text


def recurrence_verdict(report: SingularReport) -> RecurrenceVerdict:
    """
    f is not recurrent exactly when all asymptotic values escape exponentially. It is recurrent and ergodic when
    every singular orbit is preperiodic and no critical point is periodic. Anything else is inconclusive.

    :param report: the singular orbit report
    :returns: the verdict with one reason line per singular orbit
    """
    reasons = tuple(_reason(o) for o in report.orbits)
    asymptotic = report.asymptotic
    if report.integral_form and asymptotic and all(
        isinstance(o.record.classification, ExponentialEscape) for o in asymptotic
    ):
        justification = "all asymptotic values escape exponentially"
        if any(isinstance(o.record.classification, AttractedToCycle) for o in report.critical):
            justification += " (mixed: attracted critical values)"
        return RecurrenceVerdict(Verdict.not_recurrent, justification, reasons)

    all_preperiodic = bool(report.orbits) and all(
        isinstance(o.record.classification, Preperiodic) for o in report.orbits
    )
    if all_preperiodic and not any(o.source_periodic for o in report.critical):
        return RecurrenceVerdict(
            Verdict.recurrent_ergodic, "all singular values are preperiodic and no critical point is periodic", reasons
        )

    problems = []
    for o in report.orbits:
        c = o.record.classification
        if isinstance(c, (ExponentialEscape, Preperiodic)) and not o.source_periodic:
            continue
        problem = f"{o.role.value} value {_value_text(o, 6)} is {c.label}"
        if o.record.error is not None:
            problem += f" after {o.record.error}"
        problems.append(problem)
    if not report.integral_form:
        problems.append("the escape criterion for asymptotic values applies to the integral form only")
    if not asymptotic and report.integral_form:
        problems.append("no asymptotic values found")
    if not problems:
        problems.append("mixed: some singular values escape while others are preperiodic")
    return RecurrenceVerdict(Verdict.inconclusive, "; ".join(problems), reasons)
