"""
Channel geometry: the thin strips around the zero set of Re Q, where f is neither huge nor close to an asymptotic
value.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy import optimize

from model.geometry import SectorGeometry
from model.spec_io import FunctionSpec
from util.errors import InvalidParams
from util.log import logdebug


@dataclass(frozen=True)
class ChannelGeometry:
    R: float
    channel_width_lb: float
    gap_width_ub: float
    # arc of |z| = R around a zero of Re Q on which |Re Q| <= pi
    empirical_width: float
    # arc of |z| = R around the same zero on which |Re Q| < R^delta, i.e. outside G
    g_complement_width: float


def _re_q(spec: FunctionSpec, R: float, theta: float) -> float:
    return spec.Q(R * cmath.exp(1j * theta)).real


def _arc_where_below(spec: FunctionSpec, R: float, centre: float, half_span: float, level: float) -> float:
    """Arc length around the zero at centre on which |Re Q| <= level, both ends found by bisection."""
    ends = []
    for side in (-1.0, 1.0):
        far = centre + side * half_span

        def excess(theta: float) -> float:
            return abs(_re_q(spec, R, theta)) - level

        if excess(far) <= 0:
            ends.append(far)
            continue
        ends.append(optimize.brentq(excess, centre, far, xtol=1e-15))
    return R * abs(ends[1] - ends[0])


def channel_gap_geometry(geom: SectorGeometry, spec: FunctionSpec, R: float, delta_prime: float) -> ChannelGeometry:
    """
    Closed-form bounds ((1 - 3 delta') / n) 2 pi |q|^-1 R^(1-n) on the channel width and
    (2 - (1 - 3 delta') / n) pi |q|^-1 R^(1-n) on the gap width, with the channel width measured on the circle
    |z| = R next to the first zero of Re Q.

    :param geom: sector geometry
    :param spec: the function spec
    :param R: radius, > M
    :param delta_prime: the shrink parameter delta'
    :returns: bounds and measurements
    """
    if R <= geom.M:
        raise InvalidParams(f"R = {R} must exceed M = {geom.M}")
    n, q = geom.deg_q, abs(geom.q)
    scale = math.pi / q * R ** (1 - n)
    shrink = (1 - 3 * delta_prime) / n
    channel_lb = 2 * shrink * scale
    gap_ub = (2 - shrink) * scale

    # Re Q ~ |q| R^n cos(n theta + arg q) changes sign across theta0
    theta0 = (0.5 * math.pi - cmath.phase(geom.q)) / n
    quarter = 0.5 * math.pi / n
    centre = optimize.brentq(lambda t: _re_q(spec, R, t), theta0 - quarter, theta0 + quarter, xtol=1e-15)
    empirical = _arc_where_below(spec, R, centre, quarter, math.pi)
    g_width = _arc_where_below(spec, R, centre, quarter, R**geom.delta)
    logdebug(f"channels at R = {R}: bound {channel_lb:.4g}, measured {empirical:.4g}, outside G {g_width:.4g}")
    return ChannelGeometry(R, channel_lb, gap_ub, empirical, g_width)
