"""
Adaptive Gauss-Kronrod (7/15 point) quadrature of P(t) exp(E(t)) along straight complex segments.

The integrand is supplied as a pair (prefactor, exponent) of vectorised callables so that it can be scaled by
exp(-S), S the largest real part of the exponent seen on the segment. Integrals whose true value would overflow
a double come back as a scaled value plus the shift and convert losslessly to LogComplex.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from util.errors import QuadratureError
from util.log import logdebug
from util.log_complex import LogComplex, lc_mul, numeric_settings

# Kronrod abscissae on [-1, 1] (positive half, descending); the odd entries are the 7 point Gauss nodes
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

# full 15 point rule on [-1, 1], ascending
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[:3][::-1]

Integrand = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class QuadratureResult:
    """
    The integral equals exp(shift) * scaled. error is the absolute error estimate of scaled.
    """

    scaled: complex
    error: float
    shift: float
    panels: int

    @property
    def value(self) -> complex:
        return self.as_log_complex().to_complex() if self.shift > 700 else self.scaled * math.exp(self.shift)

    @property
    def absolute_error(self) -> float:
        return self.error * math.exp(self.shift) if self.shift < 700 else math.inf

    def as_log_complex(self) -> LogComplex:
        return lc_mul(LogComplex.from_complex(self.scaled), LogComplex.from_polar(self.shift, 0.0))


def gk15_panel(integrand: Integrand, a: complex, b: complex, shift: float) -> Tuple[complex, float]:
    """
    One Gauss-Kronrod panel on the segment [a, b].

    :returns: (Kronrod estimate, |Kronrod - Gauss|) of the integral scaled by exp(-shift)
    """
    half = 0.5 * (b - a)
    t = 0.5 * (a + b) + half * NODES
    pre, expo = integrand(t)
    values = pre * np.exp(expo - shift)
    kronrod = complex(half * np.dot(KRONROD_WEIGHTS, values))
    gauss = complex(half * np.dot(GAUSS_WEIGHTS, values))
    return kronrod, abs(kronrod - gauss)


def segment_shift(integrand: Integrand, a: complex, b: complex, probes: Optional[int] = None) -> float:
    """
    Largest real part of the exponent over evenly spaced probes on [a, b], numeric/quad_probe_points of them by
    default.
    """
    probes = numeric_settings().quad_probe_points if probes is None else probes
    t = a + (b - a) * np.linspace(0.0, 1.0, probes)
    _, expo = integrand(t)
    return float(np.max(np.real(expo)))


def integrate_segment(
    integrand: Integrand,
    a: complex,
    b: complex,
    tol: Optional[float] = None,
    max_panels: Optional[int] = None,
    shift: Optional[float] = None,
) -> QuadratureResult:
    """
    Globally adaptive quadrature: the panel with the largest error estimate is bisected until the summed error
    estimate is at most tol * (min(1, exp(-shift)) + |scaled result|). In unscaled terms that is
    tol * (min(exp(shift), 1) + |result|): the absolute part never exceeds the size of the integrand.

    :param integrand: maps points to (prefactor, exponent) arrays
    :param a: start of the segment
    :param b: end of the segment
    :param tol: mixed absolute/relative tolerance, numeric/quad_tol when omitted
    :param max_panels: panel cap, numeric/quad_max_panels when omitted
    :param shift: exponent shift, computed from probes when omitted
    :returns: the scaled result
    :raises QuadratureError: if the panel cap is reached first
    """
    settings = numeric_settings()
    tol = settings.quad_tol if tol is None else tol
    max_panels = settings.quad_max_panels if max_panels is None else max_panels
    a, b = complex(a), complex(b)
    if a == b:
        return QuadratureResult(0j, 0.0, 0.0, 0)
    if shift is None:
        shift = segment_shift(integrand, a, b)
    floor = math.exp(-max(shift, 0.0)) if shift < 700 else 0.0

    value, err = gk15_panel(integrand, a, b, shift)
    heap: List[Tuple[float, int, complex, complex, complex]] = [(-err, 0, a, b, value)]
    total, total_err, counter = value, err, 1
    while total_err > tol * (floor + abs(total)):
        if len(heap) >= max_panels:
            raise QuadratureError(
                f"panel cap {max_panels} reached on [{a}, {b}]: error {total_err:.3e}, scaled value {total:.6g}"
            )
        neg_err, _, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = gk15_panel(integrand, lo, mid, shift)
        v2, e2 = gk15_panel(integrand, mid, hi, shift)
        heapq.heappush(heap, (-e1, counter, lo, mid, v1))
        heapq.heappush(heap, (-e2, counter + 1, mid, hi, v2))
        counter += 2
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
        if not math.isfinite(abs(total)):
            raise QuadratureError(f"non-finite integrand on [{a}, {b}]")

    # final sum in segment order so the result does not depend on the refinement history
    panels = sorted(heap, key=lambda p: abs(p[2] - a))
    re = math.fsum(p[4].real for p in panels)
    im = math.fsum(p[4].imag for p in panels)
    err = math.fsum(-p[0] for p in panels)
    logdebug(f"quadrature on [{a:.6g}, {b:.6g}]: {len(panels)} panels, error {err:.3e}")
    return QuadratureResult(complex(re, im), err, shift, len(panels))


def composite_nodes(panels: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Kronrod nodes and weights of a fixed composite rule on [0, 1] with equal panels.

    :returns: (nodes, weights), each of length 15 * panels
    """
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mids[:, np.newaxis] + half[:, np.newaxis] * NODES[np.newaxis, :]).ravel()
    weights = (half[:, np.newaxis] * KRONROD_WEIGHTS[np.newaxis, :]).ravel()
    return nodes, weights
