"""
The default lemma suite run by verify-lemmas: toolbox checks on the closed-form maps, condition checks on the
function under study.
"""
from __future__ import annotations

import cmath
import math
from typing import Callable, Dict, List, Optional, Sequence

from shapely.geometry import box

from lemmas.checks import (
    CheckResult,
    check_asymptotic_residual,
    check_ball_image_inclusion,
    check_condition_a,
    check_condition_b,
    check_condition_c,
    check_density_transfer,
    check_distortion_trend,
    check_injectivity_radius,
    check_koebe_bounds,
    check_quasisquare_bounds,
    measured_distortion,
    square_image,
)
from lemmas.maps import EXP, KOEBE
from measure.parameters import ParameterSet
from measure.squares import SquareRegion
from model.function_model import FunctionModel
from model.spec_io import IntegralForm
from util.errors import InvalidParams
from util.params import get_param

BALL_CENTRE = 0.5 + 0.5j
BALL_RADIUS = 0.25


def _quasi_square() -> CheckResult:
    square = SquareRegion(0.2 + 0.3j, 0.05)
    k = measured_distortion(EXP, square)
    return check_quasisquare_bounds(k, [square.to_polygon(), square_image(EXP, square)])


def _density_transfer() -> CheckResult:
    return check_density_transfer(EXP, box(-0.1, -0.1, 0.0, 0.1), box(-0.1, -0.1, 0.1, 0.1))


def _escaping_direction(model: FunctionModel) -> complex:
    """Unit vector along which Re Q grows fastest."""
    q = model.spec.Q
    return cmath.exp(-1j * cmath.phase(q.leading) / q.degree)


def _channel_direction(model: FunctionModel) -> complex:
    q = model.spec.Q
    return cmath.exp(1j * (0.5 * math.pi - cmath.phase(q.leading)) / q.degree)


def suite(model: FunctionModel, params: ParameterSet) -> Dict[str, Callable[[], CheckResult]]:
    """
    Named checks for one model, each deferred until called. Checks that only apply to the integral form are left
    out for the exponential sum.
    """
    M = model.settings.M
    n_a = get_param("lemmas/condition_a_samples", 10000)
    n_residual = get_param("lemmas/residual_samples", 200)
    checks: Dict[str, Callable[[], CheckResult]] = {
        "koebe": lambda: check_koebe_bounds(KOEBE),
        "ball-image": lambda: check_ball_image_inclusion(model, BALL_CENTRE, BALL_RADIUS),
        "distortion": lambda: check_distortion_trend(model, SquareRegion(BALL_CENTRE, 0.1)),
        "injectivity": lambda: check_injectivity_radius(model, 1.5 * M * _escaping_direction(model)),
        "quasi-square": _quasi_square,
        "density-transfer": _density_transfer,
        "condition-b": lambda: check_condition_b(model, params, SquareRegion(3.0 * M * _channel_direction(model), 1.0)),
        "condition-c": lambda: check_condition_c(model, params),
    }
    if isinstance(model.spec, IntegralForm):
        checks["condition-a"] = lambda: check_condition_a(model, params, n_a, (2.0 * M, 20.0 * M))
        checks["asymptotic-residual"] = lambda: check_asymptotic_residual(model, n_residual, (5.0, 12.0))
    return checks


def run_suite(
    model: FunctionModel, params: ParameterSet, only: Optional[Sequence[str]] = None
) -> List[CheckResult]:
    """
    :param model: the function model
    :param params: the criterion parameters
    :param only: names to run, all when omitted
    :returns: the results in suite order
    :raises InvalidParams: for an unknown check name
    """
    checks = suite(model, params)
    names = list(checks) if not only else list(only)
    unknown = [n for n in names if n not in checks]
    if unknown:
        raise InvalidParams(f"unknown check(s) {unknown}, expected some of {sorted(checks)}")
    return [checks[n]() for n in names]
