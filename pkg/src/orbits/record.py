from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import pandas as pd
from aenum import Enum, NoAlias

from util.log_complex import LogComplex


class StopReason(Enum):
    _settings_ = NoAlias

    saturated = "Saturated"
    cycle_found = "CycleFound"
    budget_exhausted = "BudgetExhausted"
    error_state = "ErrorState"


@dataclass(frozen=True)
class ExponentialEscape:
    delta_hat: float

    @property
    def label(self) -> str:
        return "ExponentialEscape"


@dataclass(frozen=True)
class Preperiodic:
    preperiod: int
    period: int

    @property
    def label(self) -> str:
        return "Preperiodic"


@dataclass(frozen=True)
class AttractedToCycle:
    period: int
    multiplier_log_mod: float
    # a point of the limit cycle, used to tell basins apart
    representative: complex = 0j

    @property
    def label(self) -> str:
        return "AttractedToCycle"


@dataclass(frozen=True)
class Undecided:
    last_log_mod: float

    @property
    def label(self) -> str:
        return "Undecided"


OrbitClassification = Union[ExponentialEscape, Preperiodic, AttractedToCycle, Undecided]


@dataclass(frozen=True)
class CycleInfo:
    """
    A cycle found in an orbit: points[preperiod] == points[preperiod + period] within the tolerance.
    """

    preperiod: int
    period: int
    multiplier_log_mod: float
    # True when the revisit is exact in double precision
    exact: bool
    representative: complex


@dataclass(frozen=True)
class OrbitRecord:
    """
    A computed orbit z0, f(z0), f^2(z0), ... with the regime used for every step and its classification.
    """

    z0: complex
    points: Tuple[LogComplex, ...]
    regimes: Tuple[str, ...]
    classification: OrbitClassification
    stop_reason: StopReason
    cycle: Optional[CycleInfo] = None
    error: Optional[str] = None
    error_index: Optional[int] = None

    @property
    def delta_hat(self) -> Optional[float]:
        if isinstance(self.classification, ExponentialEscape):
            return self.classification.delta_hat
        return None

    @property
    def last(self) -> LogComplex:
        return self.points[-1]

    def first_escape_index(self, log_radius: float) -> Optional[int]:
        """
        :param log_radius: log of the escape radius
        :returns: the first n with log|f^n(z0)| > log_radius, None if the orbit never got there
        """
        return next((n for n, p in enumerate(self.points) if p.log_mod > log_radius), None)

    def to_frame(self) -> pd.DataFrame:
        """
        One row per iterate: index, log_mod, arg (NaN when not meaningful) and the evaluation regime.
        """
        return pd.DataFrame(
            {
                "index": range(len(self.points)),
                "log_mod": [p.log_mod for p in self.points],
                "arg": [p.arg if p.arg_valid else math.nan for p in self.points],
                "regime": list(self.regimes),
            }
        )

    def describe(self) -> str:
        c = self.classification
        if isinstance(c, ExponentialEscape):
            detail = f"delta_hat={c.delta_hat:.6g}"
        elif isinstance(c, Preperiodic):
            detail = f"preperiod={c.preperiod} period={c.period}"
        elif isinstance(c, AttractedToCycle):
            detail = f"period={c.period} multiplier_log_mod={c.multiplier_log_mod:.6g}"
        else:
            detail = f"last_log_mod={c.last_log_mod:.6g}"
        text = f"{c.label}({detail}) stop={self.stop_reason.value} iterates={len(self.points) - 1}"
        if self.error is not None:
            text += f" error@{self.error_index}: {self.error}"
        return text
