"""
Evaluation of f, f', asymptotic values and critical points for both function families.

Three evaluation regimes cover the plane:
  * evaluate: ordinary complex arithmetic, quadrature along [0, z], |z| <= r_switch
  * evaluate_scaled: the same quadrature scaled by exp(-max Re Q), for moderate z whose value overflows
  * evaluate_lc: the asymptotic expansion f = s(z) + P e^Q / Q' in log-polar arithmetic, |z| >= r_switch
"""
from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from model.geometry import SectorGeometry, nearest_asymptotic, q_angles, sector_angles
from model.spec_io import ExpSumForm, FunctionSpec, IntegralForm
from util.errors import EvaluationOverflow, TailNotDecaying, Unsupported
from util.log import logdebug, loginfo
from util.log_complex import LogComplex, lc_add, lc_exp, lc_mul
from util.params import get_param
from util.polynomial import Polynomial, poly_eval_lc
from util.quadrature import QuadratureResult, composite_nodes, integrate_segment

# above this real part exp() leaves the double range
EXP_OVERFLOW = 709.0
ARRAY_CHUNK = 4096


@dataclass(frozen=True)
class ModelSettings:
    r_switch: float = 50.0
    delta: float = 0.25
    M: float = 10.0
    use_closed_form: bool = True
    closed_form_tol: float = 1e-12
    quad_tol: float = 1e-10
    asymptotic_tol: float = 1e-10
    asymptotic_r_start: float = 2.0
    asymptotic_r_max: float = 1e3
    multiplicity_tol: float = 1e-6
    near_asymptotic_nats: float = 40.0
    array_panels: int = 8
    root_tol: float = 1e-14

    @classmethod
    def from_params(cls) -> ModelSettings:
        return cls(
            r_switch=get_param("function_model/r_switch", cls.r_switch),
            delta=get_param("function_model/delta", cls.delta),
            M=get_param("function_model/M", cls.M),
            use_closed_form=get_param("function_model/use_closed_form", cls.use_closed_form),
            closed_form_tol=get_param("function_model/closed_form_tol", cls.closed_form_tol),
            quad_tol=get_param("numeric/quad_tol", cls.quad_tol),
            asymptotic_tol=get_param("function_model/asymptotic_tol", cls.asymptotic_tol),
            asymptotic_r_start=get_param("function_model/asymptotic_r_start", cls.asymptotic_r_start),
            asymptotic_r_max=get_param("function_model/asymptotic_r_max", cls.asymptotic_r_max),
            multiplicity_tol=get_param("function_model/multiplicity_tol", cls.multiplicity_tol),
            near_asymptotic_nats=get_param("function_model/near_asymptotic_nats", cls.near_asymptotic_nats),
            array_panels=get_param("function_model/array_panels", cls.array_panels),
            root_tol=get_param("numeric/root_tol", cls.root_tol),
        )


@dataclass(frozen=True)
class ClosedForm:
    """
    int_0^z P e^Q = R(z) e^Q(z) - R(0) e^Q(0), so f = R e^Q + C0.
    """

    R: Polynomial
    C0: complex


def find_closed_form(spec: IntegralForm, tol: float = 1e-12) -> Optional[ClosedForm]:
    """
    Look for a polynomial R with P = R' + R Q'. R is solved top coefficient first against the leading
    coefficient n q of Q', then the full identity is checked.

    :param spec: integral-form spec
    :param tol: residual tolerance relative to the largest coefficient of P
    :returns: the closed form, or None if no polynomial antiderivative factor exists
    """
    P, Q = spec.P, spec.Q
    n = Q.degree
    m = P.degree - n + 1
    if m < 0:
        return None
    dQ = Q.derivative()
    lead = n * Q.leading
    p = list(P.coeffs)
    r = [0j] * (m + 1)
    for j in range(m, -1, -1):
        partial = Polynomial(tuple(r))
        image = partial.derivative() + partial * dQ
        coeff = image.coeffs[j + n - 1] if j + n - 1 < len(image.coeffs) else 0j
        r[j] = (p[j + n - 1] - coeff) / lead
    R = Polynomial(tuple(r))
    residual = P - (R.derivative() + R * dQ)
    scale = max(abs(c) for c in p)
    if any(abs(c) > tol * scale for c in residual.coeffs):
        return None
    return ClosedForm(R, spec.c - R(0j) * cmath.exp(Q(0j)))


@dataclass(frozen=True)
class SectorValue:
    k: int
    phi: float
    # None where f tends to infinity along the ray
    value: Optional[complex]
    quadrature_error: float
    tail_bound: float
    radius: float

    @property
    def escaping(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class AsymptoticValueReport:
    sectors: Tuple[SectorValue, ...]
    # distinct values with their multiplicities
    groups: Tuple[Tuple[complex, int], ...]
    tol: float

    @property
    def values(self) -> List[complex]:
        return [s.value for s in self.sectors if s.value is not None]

    @property
    def multiplicity(self) -> int:
        return sum(count for _, count in self.groups)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for s in self.sectors:
            group = next(
                (i for i, (v, _) in enumerate(self.groups) if s.value is not None and abs(v - s.value) <= self.tol),
                -1,
            )
            rows.append(
                {
                    "k": s.k,
                    "phi": s.phi,
                    "re": s.value.real if s.value is not None else math.nan,
                    "im": s.value.imag if s.value is not None else math.nan,
                    "quadrature_error": s.quadrature_error,
                    "tail_bound": s.tail_bound,
                    "radius": s.radius,
                    "group": group,
                    "escaping": s.escaping,
                }
            )
        return pd.DataFrame(rows)


def group_values(values: List[Optional[complex]], tol: float) -> Tuple[Tuple[complex, int], ...]:
    groups: List[List] = []
    for v in values:
        if v is None:
            continue
        for g in groups:
            if abs(g[0] - v) <= tol:
                g[1] += 1
                break
        else:
            groups.append([v, 1])
    return tuple((g[0], g[1]) for g in groups)


@dataclass(frozen=True)
class Expansion:
    value: LogComplex
    sector: Optional[int]
    # True when f(z) is within exp(-near_asymptotic_nats) of the sector's asymptotic value
    near_asymptotic: bool
    correction_log_mod: float


class FunctionModel:
    """
    Evaluation front end for one function spec. Instances are safe to share between threads; the asymptotic
    values are computed once on first use.
    """

    spec: FunctionSpec
    settings: ModelSettings
    closed_form: Optional[ClosedForm]

    def __init__(self, spec: FunctionSpec, settings: Optional[ModelSettings] = None):
        self.spec = spec
        self.settings = settings or ModelSettings.from_params()
        self.dQ = spec.Q.derivative()
        self.closed_form = None
        if isinstance(spec, IntegralForm) and self.settings.use_closed_form:
            self.closed_form = find_closed_form(spec, self.settings.closed_form_tol)
            if self.closed_form is not None:
                logdebug(f"{spec.name}: closed form R = {self.closed_form.R.coeffs}, C0 = {self.closed_form.C0}")
        if isinstance(spec, ExpSumForm):
            self.dA = spec.P.derivative() + spec.P * spec.Q.derivative()
            self.dB = spec.Ptilde.derivative() + spec.Ptilde * spec.Qtilde.derivative()
        self._lock = threading.Lock()
        self._asymptotic: Optional[AsymptoticValueReport] = None
        self._geometry: Optional[SectorGeometry] = None

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def log_r_switch(self) -> float:
        return math.log(self.settings.r_switch)

    def _integrand(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.spec.P.evaluate_array(t), self.spec.Q.evaluate_array(t)

    def integrate(self, a: complex, b: complex, tol: Optional[float] = None) -> QuadratureResult:
        return integrate_segment(self._integrand, a, b, tol or self.settings.quad_tol)

    def evaluate(self, z: complex, tol: Optional[float] = None) -> complex:
        """
        f(z) in ordinary complex arithmetic.

        :param z: the point, normally |z| <= r_switch
        :param tol: quadrature tolerance
        :returns: f(z)
        :raises EvaluationOverflow: if f(z) is beyond the double range
        """
        z = complex(z)
        spec = self.spec
        if isinstance(spec, ExpSumForm):
            e1, e2 = spec.Q(z), spec.Qtilde(z)
            if max(e1.real, e2.real) > EXP_OVERFLOW:
                return self.evaluate_scaled(z).to_complex()
            return spec.P(z) * cmath.exp(e1) + spec.Ptilde(z) * cmath.exp(e2)
        if self.closed_form is not None:
            e = spec.Q(z)
            if e.real > EXP_OVERFLOW:
                raise EvaluationOverflow(f"Re Q({z}) = {e.real:.6g}")
            return self.closed_form.R(z) * cmath.exp(e) + self.closed_form.C0
        res = self.integrate(0j, z, tol)
        if res.shift > EXP_OVERFLOW:
            return lc_add(res.as_log_complex(), LogComplex.from_complex(spec.c)).to_complex()
        value = res.value + spec.c
        if not cmath.isfinite(value):
            raise EvaluationOverflow(f"f({z}) overflows")
        return value

    def evaluate_scaled(self, z: complex, tol: Optional[float] = None) -> LogComplex:
        """
        f(z) in log-polar form for moderate z, valid even when |f(z)| is beyond the double range.
        """
        z = complex(z)
        spec = self.spec
        zl = LogComplex.from_complex(z)
        if isinstance(spec, ExpSumForm):
            return self._expsum_lc(zl)
        if self.closed_form is not None:
            term = lc_mul(LogComplex.from_complex(self.closed_form.R(z)), lc_exp(LogComplex.from_complex(spec.Q(z))))
            return lc_add(term, LogComplex.from_complex(self.closed_form.C0))
        res = self.integrate(0j, z, tol)
        return lc_add(res.as_log_complex(), LogComplex.from_complex(spec.c))

    def _expsum_lc(self, z: LogComplex) -> LogComplex:
        spec = self.spec
        t1 = lc_mul(poly_eval_lc(spec.P, z), lc_exp(poly_eval_lc(spec.Q, z)))
        t2 = lc_mul(poly_eval_lc(spec.Ptilde, z), lc_exp(poly_eval_lc(spec.Qtilde, z)))
        return lc_add(t1, t2)

    def expansion_term(self, z: LogComplex) -> LogComplex:
        """
        The leading term f(z) - s(z): R e^Q when a closed form exists, otherwise P e^Q / Q'.
        """
        e = lc_exp(poly_eval_lc(self.spec.Q, z))
        if self.closed_form is not None:
            return lc_mul(poly_eval_lc(self.closed_form.R, z), e)
        return lc_mul(lc_mul(poly_eval_lc(self.spec.P, z), e), poly_eval_lc(self.dQ, z).reciprocal())

    def evaluate_lc(self, z: LogComplex) -> Expansion:
        """
        f(z) for large z by the asymptotic expansion s(z) + P(z) e^Q(z) / Q'(z).

        :param z: the point, normally |z| >= r_switch
        :returns: the value with the sector used and the near-asymptotic flag
        :raises DirectionUndecidable: propagated from the exponential
        """
        if isinstance(self.spec, ExpSumForm):
            return Expansion(self._expsum_lc(z), None, False, -math.inf)
        term = self.expansion_term(z)
        if self.closed_form is not None:
            sector, s = None, self.closed_form.C0
        else:
            sector, s = nearest_asymptotic(self.geometry(), z)
        s_lc = LogComplex.from_complex(s if s is not None else 0j)
        nats = self.settings.near_asymptotic_nats
        if term.log_mod < max(s_lc.log_mod, 0.0) - nats:
            return Expansion(s_lc, sector, True, term.log_mod)
        return Expansion(lc_add(s_lc, term), sector, False, term.log_mod)

    def value_lc(self, z: LogComplex) -> Tuple[LogComplex, str]:
        """
        f(z) in whichever regime fits |z|.

        :returns: (value, regime) with regime one of "moderate", "scaled", "asymptotic"
        """
        if z.is_zero or z.log_mod <= self.log_r_switch:
            zc = z.to_complex()
            try:
                return LogComplex.from_complex(self.evaluate(zc)), "moderate"
            except EvaluationOverflow:
                return self.evaluate_scaled(zc), "scaled"
        return self.evaluate_lc(z).value, "asymptotic"

    def derivative(self, z: LogComplex) -> LogComplex:
        """
        f'(z) = P(z) e^Q(z), or (P' + P Q') e^Q + (Pt' + Pt Qt') e^Qt for the exponential sum.
        """
        spec = self.spec
        if isinstance(spec, ExpSumForm):
            t1 = lc_mul(poly_eval_lc(self.dA, z), lc_exp(poly_eval_lc(spec.Q, z)))
            t2 = lc_mul(poly_eval_lc(self.dB, z), lc_exp(poly_eval_lc(spec.Qtilde, z)))
            return lc_add(t1, t2)
        return lc_mul(poly_eval_lc(spec.P, z), lc_exp(poly_eval_lc(spec.Q, z)))

    def derivative_complex(self, z: complex) -> complex:
        return self.derivative(LogComplex.from_complex(z)).to_complex()

    def remainder_lc(self, z: complex) -> LogComplex:
        """
        f(z) - s(z), where s(z) is the asymptotic value of the sector of z on the side Re Q < 0 and 0 on the
        side Re Q > 0.
        """
        z = complex(z)
        spec = self.spec
        zl = LogComplex.from_complex(z)
        if isinstance(spec, ExpSumForm):
            return self.evaluate_scaled(z) if abs(z) <= self.settings.r_switch else self._expsum_lc(zl)
        if spec.Q(z).real >= 0:
            return self.evaluate_scaled(z) if abs(z) <= self.settings.r_switch else self.evaluate_lc(zl).value
        if self.closed_form is not None:
            return self.expansion_term(zl)
        k, _ = nearest_asymptotic(self.geometry(), zl)
        phi = self.geometry().phi[k]
        res, _, _ = self._ray_integral(z, phi, self.settings.asymptotic_tol, self.settings.asymptotic_r_max)
        return -res.as_log_complex()

    def _tail_radius(self, start: complex, phi: float, tol: float, r_max: float) -> Tuple[float, float]:
        """
        Smallest length L = r_start * 2^j along the ray start + t e^{i phi} at which the tail
        |P| e^{Re Q} * 2 / |d Re Q / dt| drops below tol / 2.
        """
        direction = cmath.exp(1j * phi)
        length = self.settings.asymptotic_r_start
        while length <= r_max:
            w = start + length * direction
            re_q = self.spec.Q(w).real
            slope = (self.dQ(w) * direction).real
            if re_q < 0 and slope < 0:
                bound = abs(self.spec.P(w)) * math.exp(re_q) * 2.0 / abs(slope)
                if bound <= tol / 2:
                    return length, bound
            length *= 2.0
        raise TailNotDecaying(
            f"{self.name}: Re Q does not decay fast enough along arg = {phi:.6f} from {start} "
            f"up to r_max = {r_max}"
        )

    def _ray_integral(
        self, start: complex, phi: float, tol: float, r_max: float
    ) -> Tuple[QuadratureResult, float, float]:
        length, bound = self._tail_radius(start, phi, tol, r_max)
        res = self.integrate(start, start + length * cmath.exp(1j * phi), tol / 2)
        return res, bound, length

    def asymptotic_values(
        self, r_max: Optional[float] = None, tol: Optional[float] = None
    ) -> AsymptoticValueReport:
        """
        The limits s_k of f along the rays arg z = phi_k, with error and tail bounds.

        For the exponential sum a direction only carries an asymptotic value (zero) when both exponents decay
        along it; otherwise f escapes along the ray and the sector is reported as escaping.

        :param r_max: largest ray length tried, defaults to the configured value
        :param tol: target accuracy, split evenly between tail and quadrature
        :returns: the report
        :raises TailNotDecaying: if the integrand does not decay along some phi_k
        """
        default = r_max is None and tol is None
        if default and self._asymptotic is not None:
            return self._asymptotic
        report = self._compute_asymptotic_values(
            tol or self.settings.asymptotic_tol, r_max or self.settings.asymptotic_r_max
        )
        if default:
            with self._lock:
                self._asymptotic = report
        return report

    def _compute_asymptotic_values(self, tol: float, r_max: float) -> AsymptoticValueReport:
        spec = self.spec
        sectors = []
        if isinstance(spec, ExpSumForm):
            for k, phi in enumerate(sector_angles(spec)):
                direction = cmath.exp(1j * spec.Q.degree * phi)
                decays = (spec.Q.leading * direction).real < 0 and (spec.Qtilde.leading * direction).real < 0
                sectors.append(SectorValue(k, phi, 0j if decays else None, 0.0, 0.0, math.inf))
        else:
            for k, phi in enumerate(q_angles(spec.Q)):
                if self.closed_form is not None:
                    length, bound = self._tail_radius(0j, phi, tol, r_max)
                    sectors.append(SectorValue(k, phi, self.closed_form.C0, 0.0, bound, length))
                    continue
                res, bound, length = self._ray_integral(0j, phi, tol, r_max)
                sectors.append(SectorValue(k, phi, res.value + spec.c, res.absolute_error, bound, length))
        groups = group_values([s.value for s in sectors], self.settings.multiplicity_tol)
        report = AsymptoticValueReport(tuple(sectors), groups, self.settings.multiplicity_tol)
        loginfo(
            f"{spec.name}: {len(report.values)} asymptotic value(s) in {len(groups)} group(s), "
            f"{sum(s.escaping for s in sectors)} escaping direction(s)"
        )
        return report

    def geometry(self) -> SectorGeometry:
        if self._geometry is None:
            report = self.asymptotic_values()
            phis = q_angles(self.spec.Q)
            values = []
            for phi in phis:
                match = min(report.sectors, key=lambda s: abs(s.phi - phi))
                values.append(match.value)
            geom = SectorGeometry(
                self.spec.Q.degree,
                self.spec.Q.leading,
                tuple(phis),
                tuple(values),
                self.settings.delta,
                self.settings.M,
            )
            with self._lock:
                self._geometry = geom
        return self._geometry

    def critical_points(self, tol: Optional[float] = None) -> List[complex]:
        """
        Zeros of f', with multiplicity.

        For the integral form these are the roots of P. For the exponential sum with Qt = -Q they are the common
        roots of P' + P Q' and Pt' + Pt Qt'; the zeros of the remaining transcendental factor are not included.

        :raises Unsupported: for an exponential sum without the Qt = -Q symmetry
        """
        tol = tol or self.settings.root_tol
        spec = self.spec
        if isinstance(spec, IntegralForm):
            if spec.P.degree < 1:
                return []
            return _merge_clusters(spec.P.roots(tol), _cluster_radius(tol, spec.P.degree))
        if not spec.is_antisymmetric:
            raise Unsupported(f"{spec.name}: critical points need Qt = -Q")
        if self.dA.is_zero:
            raise Unsupported(f"{spec.name}: P' + P Q' vanishes identically")
        if self.dA.degree < 1:
            return []
        roots = _merge_clusters(self.dA.roots(tol), _cluster_radius(tol, self.dA.degree))
        common = []
        for r in roots:
            if abs(self.dB(r)) <= 1e-8 * self.dB.coefficient_scale(r):
                common.append(r)
        return common

    def evaluate_array(self, z: np.ndarray) -> np.ndarray:
        """
        Vectorised f over an array of moderate points. Entries whose exponent has real part above the double
        range come back as complex infinity.
        """
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        flat_in, flat_out = z.ravel(), out.ravel()
        for start in range(0, flat_in.size, ARRAY_CHUNK):
            flat_out[start : start + ARRAY_CHUNK] = self._evaluate_chunk(flat_in[start : start + ARRAY_CHUNK])
        return flat_out.reshape(z.shape)

    def _evaluate_chunk(self, z: np.ndarray) -> np.ndarray:
        spec = self.spec
        with np.errstate(all="ignore"):
            if isinstance(spec, ExpSumForm):
                e1, e2 = spec.Q.evaluate_array(z), spec.Qtilde.evaluate_array(z)
                big = (np.real(e1) > EXP_OVERFLOW) | (np.real(e2) > EXP_OVERFLOW) | ~np.isfinite(z)
                value = spec.P.evaluate_array(z) * _safe_exp(e1, big)
                value = value + spec.Ptilde.evaluate_array(z) * _safe_exp(e2, big)
            elif self.closed_form is not None:
                e = spec.Q.evaluate_array(z)
                big = (np.real(e) > EXP_OVERFLOW) | ~np.isfinite(z)
                value = self.closed_form.R.evaluate_array(z) * _safe_exp(e, big) + self.closed_form.C0
            else:
                nodes, weights = composite_nodes(self.settings.array_panels)
                t = z[:, np.newaxis] * nodes[np.newaxis, :]
                e = spec.Q.evaluate_array(t)
                big = np.any(np.real(e) > EXP_OVERFLOW, axis=1) | ~np.isfinite(z)
                terms = spec.P.evaluate_array(t) * np.exp(np.where(big[:, np.newaxis], 0.0, e))
                value = z * (terms @ weights) + spec.c
        return np.where(big, complex(np.inf, 0.0), value)

    def derivative_array(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        spec = self.spec
        with np.errstate(all="ignore"):
            if isinstance(spec, ExpSumForm):
                e1, e2 = spec.Q.evaluate_array(z), spec.Qtilde.evaluate_array(z)
                big = (np.real(e1) > EXP_OVERFLOW) | (np.real(e2) > EXP_OVERFLOW)
                value = self.dA.evaluate_array(z) * _safe_exp(e1, big)
                value = value + self.dB.evaluate_array(z) * _safe_exp(e2, big)
            else:
                e = spec.Q.evaluate_array(z)
                big = np.real(e) > EXP_OVERFLOW
                value = spec.P.evaluate_array(z) * _safe_exp(e, big)
        return np.where(big, complex(np.inf, 0.0), value)


def _safe_exp(e: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.exp(np.where(mask, 0.0, e))


def _cluster_radius(tol: float, degree: int) -> float:
    # a root of multiplicity m is only resolved to about tol ** (1 / m)
    return max(1e-6, 2.0 * tol ** (1.0 / max(degree, 1)))


def _merge_clusters(roots: List[complex], radius: float = 1e-6) -> List[complex]:
    """
    Replace each cluster of numerically coincident roots (a multiple root) by its centroid, keeping multiplicity.
    """
    merged: List[complex] = []
    used = [False] * len(roots)
    for i, r in enumerate(roots):
        if used[i]:
            continue
        members = [j for j in range(i, len(roots)) if not used[j] and abs(roots[j] - r) <= radius * max(1.0, abs(r))]
        for j in members:
            used[j] = True
        centre = sum(roots[j] for j in members) / len(members)
        merged.extend([centre] * len(members))
    return merged
