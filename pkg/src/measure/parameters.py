"""
The constants of the positive-measure criterion: the exponents of its three conditions, eta, the radius schedule
M_k and the Fatou-measure bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import pandas as pd
from scipy import optimize, special

from model.spec_io import FunctionSpec
from util.errors import InvalidParams
from util.log import logwarn
from util.params import get_param

# M_k beyond this is reported as infinite
SCHEDULE_CAP = 1e300


@dataclass(frozen=True)
class ParameterSet:
    """
    epsilon: exponent of the dichotomy |f - s| <= exp(-|z|^eps) or |f| >= exp(|z|^eps)
    delta1, delta2: bounds |z|^delta1 <= |f' / (f - s)| <= |z|^delta2
    beta, B: meas(D) <= B diam(D) sup|z|^beta for sets near the complement of G
    tau: radius exponent of the balls B(f^m(s), 2|f^m(s)|^tau) that must stay in G
    M: inner radius
    """

    epsilon: float = 0.2
    delta1: float = 1.9
    delta2: float = 2.1
    beta: float = 0.0
    tau: float = 0.5
    B: float = 10.0
    M: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise InvalidParams(f"epsilon = {self.epsilon} must lie in (0, 1)")
        if self.delta1 > self.delta2:
            raise InvalidParams(f"delta1 = {self.delta1} must not exceed delta2 = {self.delta2}")
        if self.beta >= 1.0 or self.tau >= 1.0:
            raise InvalidParams(f"beta = {self.beta} and tau = {self.tau} must be below 1")
        if self.B <= 0 or self.M <= 0:
            raise InvalidParams("B and M must be positive")

    @classmethod
    def from_params(cls) -> ParameterSet:
        return cls(
            epsilon=get_param("measure/epsilon", cls.epsilon),
            delta1=get_param("measure/delta1", cls.delta1),
            delta2=get_param("measure/delta2", cls.delta2),
            beta=get_param("measure/beta", cls.beta),
            tau=get_param("measure/tau", cls.tau),
            B=get_param("measure/B", cls.B),
            M=get_param("measure/M", cls.M),
        )

    @property
    def consistent(self) -> bool:
        """-delta1 < beta < tau < 1, which the three conditions imply together."""
        return -self.delta1 < self.beta < self.tau < 1.0

    @property
    def eta(self) -> float:
        return eta(self)


def eta(params: ParameterSet) -> float:
    """
    eta = (tau - beta) / max(1, 2 - 2 tau).

    :raises InvalidParams: if tau <= beta
    """
    if params.tau <= params.beta:
        raise InvalidParams(f"eta needs tau > beta, got tau = {params.tau}, beta = {params.beta}")
    return (params.tau - params.beta) / max(1.0, 2.0 - 2.0 * params.tau)


@dataclass(frozen=True)
class Schedule:
    M: Tuple[float, ...]
    # partial products of (1 - M_k^(beta - tau) / 4) for k >= 1
    partial_products: Tuple[float, ...]
    bound: float
    product_check: bool

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "k": range(len(self.M)),
                "M_k": list(self.M),
                "partial_product": [math.nan] + list(self.partial_products),
            }
        )


def mk_schedule(M0: float, epsilon: float, tau: float, k_max: int, beta: float = 0.0) -> Schedule:
    """
    M_{k+1} = exp(min(1, 1 / (2 - 2 tau)) M_k^epsilon), and the check
    prod_{k >= 1} (1 - M_k^(beta - tau) / 4) >= 1 - M_1^(beta - tau).

    :param M0: starting radius, > 1
    :param epsilon: exponent in (0, 1)
    :param tau: ball exponent, < 1
    :param k_max: number of steps
    :param beta: exponent of the area condition
    :returns: the schedule; product_check is False whenever tau <= beta
    """
    if M0 <= 1.0 or not 0.0 < epsilon < 1.0 or tau >= 1.0:
        raise InvalidParams(f"need M0 > 1, epsilon in (0, 1) and tau < 1; got {M0}, {epsilon}, {tau}")
    factor = min(1.0, 1.0 / (2.0 - 2.0 * tau))
    radii = [float(M0)]
    for _ in range(k_max):
        prev = radii[-1]
        exponent = factor * prev**epsilon if math.isfinite(prev) else math.inf
        nxt = math.exp(exponent) if exponent < math.log(SCHEDULE_CAP) else math.inf
        radii.append(nxt)

    products, running = [], 1.0
    for m in radii[1:]:
        running *= 1.0 - (m ** (beta - tau) if math.isfinite(m) else 0.0) / 4.0
        products.append(running)
    if len(radii) > 1:
        bound = 1.0 - radii[1] ** (beta - tau) if math.isfinite(radii[1]) else 1.0
    else:
        bound = 1.0
    ok = bool(products) and all(p >= bound for p in products)
    if tau <= beta:
        logwarn(f"tau = {tau} <= beta = {beta}: the product condition does not apply")
        ok = False
    return Schedule(tuple(radii), tuple(products), bound, ok)


def density_bound(params: ParameterSet, M0: float) -> float:
    """Lower bound 1 - exp(-eta M0^epsilon) on the density of the trapped set beyond M0."""
    return 1.0 - math.exp(-eta(params) * M0**params.epsilon)


def _annulus_mass(r: float, params: ParameterSet, e: float) -> float:
    return 2.0 * math.pi * (r + 1.0) * math.exp(-e * r**params.epsilon)


def fatou_measure_bound(
    spec: FunctionSpec, params: ParameterSet, M: Optional[float] = None, delta: Optional[float] = None
) -> float:
    """
    Upper bound on the measure of the non-escaping part of the plane:
    pi M^2 + (4 / |q|) M^(2 - n + delta) / (n - 2 - delta) + sum_k 2 pi (R_k + 1) exp(-eta R_k^eps), R_k = M + k.

    The middle term is the area of the 2n channels {|Re Q| < |z|^delta} beyond M. The sum is bounded by its largest
    term plus the integral of the summand, written with incomplete gamma functions.

    :returns: the bound, inf when deg Q <= 2 + delta
    """
    M = params.M if M is None else M
    delta = get_param("function_model/delta", 0.25) if delta is None else delta
    n = spec.Q.degree
    if n <= 2 + delta:
        return math.inf
    q = abs(spec.Q.leading)
    e = eta(params)
    eps = params.epsilon
    disk = math.pi * M**2
    channels = 4.0 / q * M ** (2.0 - n + delta) / (n - 2.0 - delta)

    # int_M^inf (r + 1) exp(-e r^eps) dr with u = e r^eps
    x = e * M**eps
    integral = (
        special.gammaincc(2.0 / eps, x) * special.gamma(2.0 / eps) * e ** (-2.0 / eps)
        + special.gammaincc(1.0 / eps, x) * special.gamma(1.0 / eps) * e ** (-1.0 / eps)
    ) / eps
    integral *= 2.0 * math.pi

    # beyond (1 - eps) / eps the summand rises while (r + 1) e eps r^(eps - 1) < 1 and decays after that
    def slope(r: float) -> float:
        return 1.0 - (r + 1.0) * e * eps * r ** (eps - 1.0)

    largest = _annulus_mass(M, params, e)
    start = max(M, (1.0 - eps) / eps)
    if slope(start) > 0:
        hi = 2.0 * start
        while slope(hi) > 0:
            hi *= 2.0
        largest = max(largest, _annulus_mass(optimize.brentq(slope, start, hi), params, e))
    return disk + channels + largest + integral
