from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from model.spec_io import ExpSumForm, FunctionSpec
from util.errors import ArgInvalid, InvalidParams
from util.log_complex import LogComplex
from util.np_utils import angular_distance, wrap_2pi
from util.polynomial import Polynomial, poly_eval_lc

TIE_TOL = 1e-12


@dataclass(frozen=True)
class SectorGeometry:
    """
    Critical directions phi_k of Q, the asymptotic value s_k reached along each of them (None where f escapes
    along the ray), and the region G = {|Re Q(z)| >= |z|^delta, |z| > M}.
    """

    deg_q: int
    q: complex
    phi: Tuple[float, ...]
    s: Tuple[Optional[complex], ...]
    delta: float = 0.25
    M: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise InvalidParams(f"G exponent delta = {self.delta} must lie in (0, 1)")
        if self.M <= 0:
            raise InvalidParams(f"G radius M = {self.M} must be positive")
        if len(self.phi) != self.deg_q or len(self.s) != self.deg_q:
            raise InvalidParams("need exactly one direction and one asymptotic value per degree of Q")


def q_angles(Q: Polynomial) -> List[float]:
    """
    phi_k = ((2k + 1) pi - arg q) / deg Q for k = 1..deg Q, mapped to [0, 2pi) and sorted. Along these rays
    Re Q(z) tends to -infinity fastest.
    """
    n = Q.degree
    arg_q = cmath.phase(Q.leading)
    return sorted(wrap_2pi(((2 * k + 1) * math.pi - arg_q) / n) for k in range(1, n + 1))


def sector_angles(spec: FunctionSpec) -> List[float]:
    """
    Critical directions of a spec. For the exponential-sum form these are the directions of both exponents,
    interleaved.

    :param spec: the function spec
    :returns: the angles, sorted ascending in [0, 2pi)
    """
    if isinstance(spec, ExpSumForm):
        return sorted(q_angles(spec.Q) + q_angles(spec.Qtilde))
    return q_angles(spec.Q)


def nearest_asymptotic(geom: SectorGeometry, z: LogComplex) -> Tuple[int, Optional[complex]]:
    """
    The sector whose direction is closest to arg z. Exact ties go to the smaller index.

    :param geom: sector geometry
    :param z: the point
    :returns: (k, s_k)
    :raises ArgInvalid: if z has no meaningful argument
    """
    if not z.arg_valid:
        raise ArgInvalid("nearest_asymptotic needs a point with a valid argument")
    distances = [angular_distance(z.arg, phi) for phi in geom.phi]
    best = min(distances)
    k = next(i for i, d in enumerate(distances) if d <= best + TIE_TOL)
    return k, geom.s[k]


@dataclass(frozen=True)
class GMembership:
    inside: bool
    # log|Re Q(z)| - delta log|z|, non-negative exactly when the growth condition holds
    margin: float
    # sign of Re Q(z): +1 on the escaping side, -1 near an asymptotic value
    re_q_sign: int


def in_G(geom: SectorGeometry, spec: FunctionSpec, z: LogComplex) -> GMembership:
    """
    Membership of z in G together with its log margin.

    :param geom: sector geometry with delta and M
    :param spec: the function spec
    :param z: the point, finite
    :returns: the membership record
    """
    qz = poly_eval_lc(spec.Q, z)
    if qz.is_zero or not qz.arg_valid:
        return GMembership(False, -math.inf, 0)
    c = math.cos(qz.arg)
    log_re = qz.log_mod + math.log(abs(c)) if c != 0 else -math.inf
    margin = log_re - geom.delta * z.log_mod
    sign = 1 if c > 0 else (-1 if c < 0 else 0)
    return GMembership(margin >= 0 and z.log_mod > math.log(geom.M), margin, sign)


def in_G_array(geom: SectorGeometry, spec: FunctionSpec, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorised membership for moderate points.

    :returns: (inside, Re Q(z)) arrays
    """
    re_q = np.real(spec.Q.evaluate_array(z))
    r = np.abs(z)
    with np.errstate(divide="ignore"):
        inside = (np.abs(re_q) >= r**geom.delta) & (r > geom.M)
    return inside, re_q
