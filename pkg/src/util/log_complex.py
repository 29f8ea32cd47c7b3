from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Tuple

from util.errors import ArgInvalid, DirectionUndecidable, EvaluationOverflow, InvalidValue
from util.np_utils import normalize_angle
from util.params import cached_params, get_param


@dataclass(frozen=True)
class NumericSettings:
    l_sat: float = 1.0e6
    dominance_nats: float = 40.0
    exp_direct_limit: float = 700.0
    tie_tol: float = 1.0e-12
    arg_precision_limit: float = 1.0e15
    root_tol: float = 1.0e-14
    root_max_iter: int = 200
    root_rotation: float = 0.4
    quad_tol: float = 1.0e-10
    quad_max_panels: int = 4000
    quad_probe_points: int = 65

    @classmethod
    def from_params(cls) -> NumericSettings:
        return cls(
            l_sat=get_param("numeric/l_sat", cls.l_sat),
            dominance_nats=get_param("numeric/dominance_nats", cls.dominance_nats),
            exp_direct_limit=get_param("numeric/exp_direct_limit", cls.exp_direct_limit),
            tie_tol=get_param("numeric/tie_tol", cls.tie_tol),
            arg_precision_limit=get_param("numeric/arg_precision_limit", cls.arg_precision_limit),
            root_tol=get_param("numeric/root_tol", cls.root_tol),
            root_max_iter=get_param("numeric/root_max_iter", cls.root_max_iter),
            root_rotation=get_param("numeric/root_rotation", cls.root_rotation),
            quad_tol=get_param("numeric/quad_tol", cls.quad_tol),
            quad_max_panels=get_param("numeric/quad_max_panels", cls.quad_max_panels),
            quad_probe_points=get_param("numeric/quad_probe_points", cls.quad_probe_points),
        )


# the numeric/* parameters in effect, including run overrides
numeric_settings = cached_params(NumericSettings.from_params)

# Cody-Waite split of ln 2; LN2_HI has enough trailing zero bits that k * LN2_HI is exact for |k| < 2**20
LN2_HI = 6.93147180369123816490e-01
LN2_LO = 1.90821492927058770002e-10
LN2 = math.log(2.0)
HALF_PI = 0.5 * math.pi


def _two_sum(a: float, b: float) -> Tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _unit(arg: float) -> complex:
    # exact values on the axes so that 1 + (-1) cancels to zero
    if arg == 0.0:
        return 1 + 0j
    if arg == math.pi or arg == -math.pi:
        return -1 + 0j
    if arg == HALF_PI:
        return 1j
    if arg == -HALF_PI:
        return -1j
    return cmath.rect(1.0, arg)


@dataclass(frozen=True)
class LogComplex:
    """
    A complex number stored as log-modulus and argument, so that moduli like exp(exp(1e4)) stay representable.

    log_mod = -inf encodes zero. A saturated value has log_mod >= l_sat (possibly +inf) and no meaningful
    argument. log_mod_lo carries the rounding error of log_mod so that conversions back to ordinary complex
    numbers keep full double precision.
    """

    log_mod: float
    arg: float = 0.0
    arg_valid: bool = True
    saturated: bool = False
    log_mod_lo: float = field(default=0.0, repr=False, compare=False)

    def __post_init__(self):
        if math.isnan(self.log_mod) or math.isnan(self.arg):
            raise InvalidValue(f"NaN in LogComplex(log_mod={self.log_mod}, arg={self.arg})")

    @classmethod
    def zero(cls) -> LogComplex:
        return cls(-math.inf, 0.0, False, False)

    @classmethod
    def one(cls) -> LogComplex:
        return cls(0.0, 0.0, True, False)

    @classmethod
    def saturation(cls, log_mod: float = math.inf) -> LogComplex:
        return cls(max(log_mod, numeric_settings().l_sat), 0.0, False, True)

    @classmethod
    def from_polar(cls, log_mod: float, arg: float, log_mod_lo: float = 0.0) -> LogComplex:
        """
        Build a value from its log-modulus and an unnormalized argument.

        :param log_mod: natural log of the modulus
        :param arg: argument in radians, any range
        :param log_mod_lo: low-order correction to log_mod
        :returns: the created LogComplex, saturated if log_mod >= l_sat
        """
        if log_mod == -math.inf:
            return cls.zero()
        settings = numeric_settings()
        if log_mod >= settings.l_sat:
            return cls.saturation(log_mod)
        valid = abs(arg) <= settings.arg_precision_limit
        return cls(log_mod, normalize_angle(arg) if valid else 0.0, valid, False, log_mod_lo)

    @classmethod
    def from_complex(cls, w: complex) -> LogComplex:
        """
        Convert an ordinary complex number.

        :param w: the number to convert
        :returns: the log-polar representation
        :raises InvalidValue: if w has a NaN component
        """
        w = complex(w)
        if cmath.isnan(w):
            raise InvalidValue(f"cannot convert {w} to LogComplex")
        if cmath.isinf(w):
            return cls.saturation()
        if w == 0:
            return cls.zero()
        m, e = math.frexp(abs(w))
        hi, lo = _two_sum(e * LN2_HI, e * LN2_LO + math.log(m))
        return cls(hi, normalize_angle(cmath.phase(w)), True, False, lo)

    @property
    def is_zero(self) -> bool:
        return self.log_mod == -math.inf

    @property
    def is_finite(self) -> bool:
        return not self.saturated and not self.is_zero

    def to_complex(self) -> complex:
        """
        Convert back to an ordinary complex number.

        :returns: the value as a Python complex
        :raises EvaluationOverflow: if the modulus exceeds the double range
        """
        if self.is_zero:
            return 0j
        if self.saturated or self.log_mod > 710.0:
            raise EvaluationOverflow(f"modulus exp({self.log_mod}) is out of range")
        if not self.arg_valid:
            raise ArgInvalid("argument is not meaningful")
        k = round(self.log_mod / LN2)
        r = (self.log_mod - k * LN2_HI) - k * LN2_LO + self.log_mod_lo
        try:
            modulus = math.ldexp(math.exp(r), k)
        except OverflowError as e:
            raise EvaluationOverflow(f"modulus exp({self.log_mod}) is out of range") from e
        return modulus * _unit(self.arg)

    def __mul__(self, other: LogComplex) -> LogComplex:
        return lc_mul(self, other)

    def __add__(self, other: LogComplex) -> LogComplex:
        return lc_add(self, other)

    def __neg__(self) -> LogComplex:
        if not self.arg_valid:
            return self
        return replace(self, arg=normalize_angle(self.arg + math.pi))

    def __sub__(self, other: LogComplex) -> LogComplex:
        return lc_add(self, -other)

    def __truediv__(self, other: LogComplex) -> LogComplex:
        return lc_mul(self, other.reciprocal())

    def reciprocal(self) -> LogComplex:
        if self.is_zero:
            raise ZeroDivisionError("reciprocal of zero")
        if self.saturated:
            return LogComplex.zero()
        return LogComplex(-self.log_mod, normalize_angle(-self.arg), self.arg_valid, False, -self.log_mod_lo)

    def power(self, n: int) -> LogComplex:
        """
        Integer power.

        :param n: exponent, n >= 0
        :returns: self ** n
        """
        if n == 0:
            return LogComplex.one()
        if self.is_zero:
            return self
        hi, lo = _two_sum(n * self.log_mod, n * self.log_mod_lo)
        if not self.arg_valid:
            return LogComplex.saturation(hi) if self.saturated else LogComplex(hi, 0.0, False, False, lo)
        return LogComplex.from_polar(hi, n * self.arg, lo)

    def scale(self, c: complex) -> LogComplex:
        return lc_mul(self, LogComplex.from_complex(c))

    def is_approx(self, other: LogComplex, tolerance=1e-8) -> bool:
        """
        Check if two values are approximately equal: log-moduli within the tolerance and, when both arguments
        are valid, arguments within the tolerance on the circle.

        :param other: another LogComplex
        :param tolerance: absolute tolerance on log_mod and arg
        :returns: True if the two values are approximately equal
        """
        if self.is_zero or other.is_zero:
            return self.is_zero and other.is_zero
        if self.log_mod == math.inf or other.log_mod == math.inf:
            return self.log_mod == other.log_mod
        if abs(self.log_mod - other.log_mod) > tolerance:
            return False
        if self.arg_valid and other.arg_valid:
            return abs(normalize_angle(self.arg - other.arg)) <= tolerance
        return self.arg_valid == other.arg_valid


def lc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    """
    Product in log-polar form. Zero absorbs everything, saturation propagates.
    """
    if a.is_zero or b.is_zero:
        return LogComplex.zero()
    hi, lo = _two_sum(a.log_mod, b.log_mod)
    lo += a.log_mod_lo + b.log_mod_lo
    if a.saturated or b.saturated:
        return LogComplex.saturation(hi)
    if not (a.arg_valid and b.arg_valid):
        return LogComplex(hi, 0.0, False, False, lo)
    return LogComplex.from_polar(hi, a.arg + b.arg, lo)


def lc_add(a: LogComplex, b: LogComplex) -> LogComplex:
    """
    Sum in log-polar form: both operands are rescaled by the larger modulus and added as ordinary complex numbers.
    An operand smaller by more than dominance_nats is dropped.
    """
    if b.is_zero:
        return a
    if a.is_zero:
        return b
    big, small = (a, b) if a.log_mod >= b.log_mod else (b, a)
    if big.log_mod == math.inf or big.log_mod - small.log_mod > numeric_settings().dominance_nats:
        return big
    if not (big.arg_valid and small.arg_valid):
        return LogComplex.saturation(big.log_mod) if big.saturated or small.saturated else big
    d = (small.log_mod - big.log_mod) + (small.log_mod_lo - big.log_mod_lo)
    s = _unit(big.arg) + math.exp(d) * _unit(small.arg)
    if s == 0:
        return LogComplex.zero()
    rel = LogComplex.from_complex(s)
    hi, lo = _two_sum(big.log_mod, rel.log_mod)
    return LogComplex.from_polar(hi, rel.arg, lo + big.log_mod_lo + rel.log_mod_lo)


def lc_exp(w: LogComplex) -> LogComplex:
    """
    Exponential of a log-polar number.

    For moderate w the result is exact: log_mod = Re w, arg = Im w. Beyond exp_direct_limit nats only the sign of
    Re w matters, read off cos(arg w): positive saturates, negative underflows to zero.

    :param w: exponent
    :returns: exp(w)
    :raises DirectionUndecidable: if the sign of Re w cannot be decided
    """
    if w.is_zero:
        return LogComplex.one()
    if not w.arg_valid:
        raise DirectionUndecidable("exponent has no meaningful argument")
    settings = numeric_settings()
    if w.log_mod <= settings.exp_direct_limit:
        v = w.to_complex()
        return LogComplex.from_polar(v.real, v.imag)
    c = math.cos(w.arg)
    if abs(c) < settings.tie_tol:
        raise DirectionUndecidable(
            f"cos(arg w) = {c:.3e} is within {settings.tie_tol} of zero at log|w| = {w.log_mod:.6g}"
        )
    if c > 0:
        return LogComplex.saturation()
    return LogComplex.zero()
