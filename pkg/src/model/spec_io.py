"""
Function specs: the two function families, their JSON encoding and the named presets.
"""
from __future__ import annotations

import cmath
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import jsonschema
import mpmath

from util.errors import InvalidSpec
from util.polynomial import Polynomial

MAX_DEGREE = 16
ODD_MULTIPLE_TOL = 1e-9

_COEFF = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_COEFFS = {"type": "array", "items": _COEFF, "minItems": 1, "maxItems": MAX_DEGREE + 1}

SPEC_SCHEMA: Dict[str, Any] = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "form": {"const": "integral"},
                "name": {"type": "string"},
                "P": _COEFFS,
                "Q": _COEFFS,
                "c": _COEFF,
            },
            "required": ["form", "P", "Q"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "form": {"const": "expsum"},
                "name": {"type": "string"},
                "P": _COEFFS,
                "Q": _COEFFS,
                "Pt": _COEFFS,
                "Qt": _COEFFS,
            },
            "required": ["form", "P", "Q", "Pt", "Qt"],
            "additionalProperties": False,
        },
    ]
}


def _check_degree(name: str, p: Polynomial) -> None:
    if p.degree > MAX_DEGREE:
        raise InvalidSpec(f"{name} has degree {p.degree} > {MAX_DEGREE}")


@dataclass(frozen=True)
class IntegralForm:
    """
    f(z) = int_0^z P(t) exp(Q(t)) dt + c with P not zero and Q not constant.
    """

    P: Polynomial
    Q: Polynomial
    c: complex = 0j
    name: str = "integral"

    def __post_init__(self):
        if self.P.is_zero:
            raise InvalidSpec("P must not be the zero polynomial")
        if self.Q.degree < 1:
            raise InvalidSpec("Q must not be constant")
        _check_degree("P", self.P)
        _check_degree("Q", self.Q)
        object.__setattr__(self, "c", complex(self.c))


@dataclass(frozen=True)
class ExpSumForm:
    """
    f(z) = P(z) exp(Q(z)) + Pt(z) exp(Qt(z)) with deg Q = deg Qt = n whose leading coefficients differ in
    argument by an odd multiple of pi / n.
    """

    P: Polynomial
    Q: Polynomial
    Ptilde: Polynomial
    Qtilde: Polynomial
    name: str = "expsum"

    def __post_init__(self):
        n = self.Q.degree
        if n < 1 or self.Qtilde.degree != n:
            raise InvalidSpec(f"deg Q = {n} and deg Qt = {self.Qtilde.degree} must be equal and >= 1")
        if self.P.is_zero or self.Ptilde.is_zero:
            raise InvalidSpec("P and Pt must not be zero")
        for name, p in (("P", self.P), ("Q", self.Q), ("Pt", self.Ptilde), ("Qt", self.Qtilde)):
            _check_degree(name, p)
        ratio = (cmath.phase(self.Qtilde.leading) - cmath.phase(self.Q.leading)) / (math.pi / n)
        odd = 2 * math.floor(ratio / 2) + 1
        if abs(ratio - odd) > ODD_MULTIPLE_TOL:
            raise InvalidSpec(
                f"arg(qt) - arg(q) must be an odd multiple of pi/{n}, got {ratio:.12g} * pi/{n}"
            )

    @property
    def is_antisymmetric(self) -> bool:
        """True when Qt = -Q, the case where f' has a polynomial factor."""
        return self.Qtilde.is_approx(-self.Q, tolerance=1e-12)


FunctionSpec = Union[IntegralForm, ExpSumForm]


def _coeff(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def _poly(values) -> Polynomial:
    return Polynomial.from_coeffs(_coeff(v) for v in values)


def _encode_poly(p: Polynomial):
    return [[c.real, c.imag] for c in p.coeffs]


def spec_from_dict(data: Dict[str, Any]) -> FunctionSpec:
    """
    Build a spec from its decoded JSON form.

    :param data: the decoded document
    :returns: the validated spec
    :raises InvalidSpec: on schema or invariant violations
    """
    try:
        jsonschema.validate(data, SPEC_SCHEMA)
    except jsonschema.ValidationError as e:
        raise InvalidSpec(f"spec does not match schema: {e.message}") from e
    if data["form"] == "integral":
        return IntegralForm(
            _poly(data["P"]), _poly(data["Q"]), _coeff(data.get("c", 0.0)), data.get("name", "integral")
        )
    return ExpSumForm(
        _poly(data["P"]), _poly(data["Q"]), _poly(data["Pt"]), _poly(data["Qt"]), data.get("name", "expsum")
    )


def spec_to_dict(spec: FunctionSpec) -> Dict[str, Any]:
    if isinstance(spec, IntegralForm):
        return {
            "form": "integral",
            "name": spec.name,
            "P": _encode_poly(spec.P),
            "Q": _encode_poly(spec.Q),
            "c": [spec.c.real, spec.c.imag],
        }
    return {
        "form": "expsum",
        "name": spec.name,
        "P": _encode_poly(spec.P),
        "Q": _encode_poly(spec.Q),
        "Pt": _encode_poly(spec.Ptilde),
        "Qt": _encode_poly(spec.Qtilde),
    }


def load_spec(path: Path) -> FunctionSpec:
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidSpec(f"{path}: {e}") from e
    return spec_from_dict(data)


def save_spec(spec: FunctionSpec, path: Path) -> None:
    with open(path, "w") as f:
        json.dump(spec_to_dict(spec), f, indent=2)


def hemke_constants(dps: int = 30) -> Tuple[float, float]:
    """
    a = (27 pi^2 / 16)^(1/3) and b = log(sqrt(a / 3)), computed in extended precision. With these values both
    critical points +-i sqrt(a/3) of exp(z^3 + a z + b) are fixed.

    :param dps: decimal digits of working precision
    :returns: (a, b) rounded to doubles
    """
    with mpmath.workdps(dps):
        a = mpmath.cbrt(27 * mpmath.pi**2 / 16)
        b = mpmath.log(mpmath.sqrt(a / 3))
        return float(a), float(b)


def rees_exp(lam: complex = 1.0) -> IntegralForm:
    """lam * exp(z), written as int_0^z lam exp(t) dt + lam."""
    lam = complex(lam)
    return IntegralForm(Polynomial((lam,)), Polynomial((0j, 1.0)), lam, "rees-exp")


def hemke_cubic() -> IntegralForm:
    """exp(z^3 + a z + b), written with P = Q' and c = exp(Q(0))."""
    a, b = hemke_constants()
    return IntegralForm(Polynomial((a, 0.0, 3.0)), Polynomial((b, a, 0.0, 1.0)), math.exp(b), "hemke-cubic")


def sinh_cubic() -> ExpSumForm:
    """exp(z^3) - exp(-z^3)."""
    cube = Polynomial((0j, 0j, 0j, 1.0))
    return ExpSumForm(Polynomial((1.0,)), cube, Polynomial((-1.0,)), -cube, "sinh-cubic")


PRESETS = {
    "rees-exp": rees_exp,
    "hemke-cubic": hemke_cubic,
    "sinh-cubic": sinh_cubic,
}


def preset(name: str, lam: Optional[complex] = None) -> FunctionSpec:
    """
    Look up a named preset.

    :param name: one of PRESETS
    :param lam: multiplier, only meaningful for rees-exp
    :returns: the function spec
    :raises InvalidSpec: for unknown names or a multiplier on a preset that takes none
    """
    if name not in PRESETS:
        raise InvalidSpec(f"unknown preset '{name}', expected one of {', '.join(PRESETS)}")
    if lam is not None:
        if name != "rees-exp":
            raise InvalidSpec(f"preset '{name}' takes no multiplier")
        return rees_exp(lam)
    return PRESETS[name]()


_LAMBDA = re.compile(
    r"^(?P<sign>[+-])?(?P<num>(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)?\*?(?P<pi>pi)?\*?(?P<imag>_?[ij])?$"
)


def parse_lambda(text: str) -> complex:
    """
    Parse a multiplier such as "2pi_i", "2*pi*i", "-1.5", "pi" or a Python complex literal like "0.5+1j".

    :param text: the multiplier
    :returns: its value
    :raises InvalidSpec: if the text cannot be parsed
    """
    s = text.strip().replace(" ", "")
    m = _LAMBDA.match(s)
    if m and (m.group("num") or m.group("pi") or m.group("imag")):
        value = complex(float(m.group("num") or 1.0))
        if m.group("sign") == "-":
            value = -value
        if m.group("pi"):
            value *= math.pi
        if m.group("imag"):
            value *= 1j
        return value
    try:
        return complex(s.replace("i", "j"))
    except ValueError as e:
        raise InvalidSpec(f"cannot parse multiplier '{text}'; try forms like 2pi_i, -1.5 or 0.5+1j") from e
