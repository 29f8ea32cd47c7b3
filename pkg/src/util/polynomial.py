from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from util.errors import InvalidValue, NonConvergence
from util.log_complex import LogComplex, lc_add, lc_mul, numeric_settings


@dataclass(frozen=True)
class Polynomial:
    """
    A polynomial with complex coefficients in ascending order: coeffs[k] multiplies t**k.

    Trailing zero coefficients are stripped on construction, so the zero polynomial has no coefficients and
    degree -1.
    """

    coeffs: Tuple[complex, ...] = ()

    def __post_init__(self):
        cs = [complex(c) for c in self.coeffs]
        if any(math.isnan(c.real) or math.isnan(c.imag) for c in cs):
            raise InvalidValue(f"NaN coefficient in {cs}")
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable) -> Polynomial:
        return cls(tuple(complex(c) for c in coeffs))

    @classmethod
    def monomial(cls, degree: int, coefficient: complex = 1.0) -> Polynomial:
        return cls(tuple([0j] * degree + [complex(coefficient)]))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], leading: complex = 1.0) -> Polynomial:
        # np.poly gives descending coefficients
        return cls(tuple(complex(leading) * c for c in np.poly(np.asarray(roots, dtype=complex))[::-1]))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> complex:
        return self.coeffs[-1] if self.coeffs else 0j

    def __call__(self, z):
        if isinstance(z, np.ndarray):
            return self.evaluate_array(z)
        return poly_eval(self, z)

    def evaluate_array(self, z: np.ndarray) -> np.ndarray:
        if self.is_zero:
            return np.zeros_like(z, dtype=complex)
        return np.polyval(np.asarray(self.coeffs[::-1], dtype=complex), z)

    def derivative(self) -> Polynomial:
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def __add__(self, other: Polynomial) -> Polynomial:
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0j] * (n - len(other.coeffs))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    def __neg__(self) -> Polynomial:
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other) -> Polynomial:
        if not isinstance(other, Polynomial):
            return Polynomial(tuple(complex(other) * c for c in self.coeffs))
        if self.is_zero or other.is_zero:
            return Polynomial()
        return Polynomial(tuple(np.convolve(np.asarray(self.coeffs), np.asarray(other.coeffs))))

    __rmul__ = __mul__

    def coefficient_scale(self, z: complex) -> float:
        """
        sum_k |c_k| max(1, |z|)**k, the natural size of the terms summed when evaluating at z
        """
        r = max(1.0, abs(z))
        return math.fsum(abs(c) * r**k for k, c in enumerate(self.coeffs))

    def dominance_threshold(self) -> float:
        """
        log|z| above which the leading term exceeds every other term by numeric/dominance_nats.
        """
        if self.degree < 1:
            return -math.inf
        lead = abs(self.leading)
        worst = max(
            (math.log(abs(c) / lead) / (self.degree - k) for k, c in enumerate(self.coeffs[:-1]) if c != 0),
            default=-math.inf,
        )
        return numeric_settings().dominance_nats + max(worst, 0.0)

    def roots(self, tol: Optional[float] = None) -> List[complex]:
        return poly_roots(self, tol)

    def is_approx(self, other: Polynomial, tolerance=1e-8) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.asarray(list(self.coeffs) + [0j] * (n - len(self.coeffs)))
        b = np.asarray(list(other.coeffs) + [0j] * (n - len(other.coeffs)))
        return bool(np.allclose(a, b, atol=tolerance, rtol=0.0))


def poly_eval(p: Polynomial, z: complex) -> complex:
    """
    Horner evaluation.

    :param p: the polynomial
    :param z: evaluation point
    :returns: p(z)
    """
    z = complex(z)
    if math.isnan(z.real) or math.isnan(z.imag):
        raise InvalidValue("cannot evaluate a polynomial at NaN")
    acc = 0j
    for c in reversed(p.coeffs):
        acc = acc * z + c
    return acc


def poly_eval_lc(p: Polynomial, z: LogComplex) -> LogComplex:
    """
    Evaluate at a log-polar point. Far beyond the dominance threshold only the leading term is kept, in the
    ordinary range Horner is used, and in between Horner runs in log-polar arithmetic.

    :param p: the polynomial
    :param z: evaluation point
    :returns: p(z) as a LogComplex
    """
    if p.is_zero:
        return LogComplex.zero()
    if p.degree == 0 or z.is_zero:
        return LogComplex.from_complex(p.coeffs[0])
    lead = LogComplex.from_complex(p.leading)
    if z.log_mod > p.dominance_threshold() or not z.arg_valid:
        return lc_mul(z.power(p.degree), lead)
    if z.log_mod <= 600.0:
        value = poly_eval(p, z.to_complex())
        if math.isfinite(value.real) and math.isfinite(value.imag):
            return LogComplex.from_complex(value)
    acc = LogComplex.zero()
    for c in reversed(p.coeffs):
        acc = lc_add(lc_mul(acc, z), LogComplex.from_complex(c))
    return acc


def poly_roots(p: Polynomial, tol: Optional[float] = None, max_iter: Optional[int] = None) -> List[complex]:
    """
    All roots by Aberth-Ehrlich simultaneous iteration.

    Initial guesses sit on a circle of radius 1 + max|c_k / c_deg| rotated by numeric/root_rotation, so the result is
    deterministic. A root r is accepted once |p(r)| <= tol * sum_k |c_k| max(1, |r|)**k. Multiple roots come
    back as a cluster of radius about tol**(1/multiplicity).

    :param p: polynomial of degree >= 1
    :param tol: relative residual tolerance, numeric/root_tol when omitted
    :param max_iter: iteration cap, numeric/root_max_iter when omitted
    :returns: the degree roots, sorted by (real, imag)
    :raises NonConvergence: if the cap is hit
    """
    n = p.degree
    if n < 1:
        raise InvalidValue("poly_roots needs degree >= 1")
    settings = numeric_settings()
    tol = settings.root_tol if tol is None else tol
    max_iter = settings.root_max_iter if max_iter is None else max_iter
    c = np.asarray(p.coeffs, dtype=complex)
    desc = c[::-1]
    ddesc = np.asarray(p.derivative().coeffs[::-1], dtype=complex)
    if n == 1:
        return [complex(-c[0] / c[1])]
    radius = 1.0 + float(np.max(np.abs(c[:-1] / c[-1])))
    z = radius * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + settings.root_rotation))
    powers = np.arange(n + 1)

    def residual_ok(zs: np.ndarray) -> np.ndarray:
        scale = np.sum(np.abs(c)[np.newaxis, :] * np.maximum(1.0, np.abs(zs))[:, np.newaxis] ** powers, axis=1)
        return np.abs(np.polyval(desc, zs)) <= tol * scale

    def aberth_step(zs: np.ndarray, active: np.ndarray) -> np.ndarray:
        pz = np.polyval(desc, zs)
        dpz = np.polyval(ddesc, zs)
        diff = zs[:, np.newaxis] - zs[np.newaxis, :]
        np.fill_diagonal(diff, 1.0)
        inv = np.where(diff == 0, 0.0, 1.0 / np.where(diff == 0, 1.0, diff))
        np.fill_diagonal(inv, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dpz != 0, pz / dpz, pz)
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
        w = np.where(np.isfinite(w), w, 0.0)
        return np.where(active, zs - w, zs)

    for _ in range(max_iter):
        ok = residual_ok(z)
        if ok.all():
            # one polishing sweep, kept only where it does not worsen the residual
            polished = aberth_step(z, np.ones(n, dtype=bool))
            better = np.abs(np.polyval(desc, polished)) <= np.abs(np.polyval(desc, z))
            z = np.where(better & residual_ok(polished), polished, z)
            return sorted((complex(r) for r in z), key=lambda r: (r.real, r.imag))
        z = aberth_step(z, ~ok)
    raise NonConvergence(f"Aberth iteration did not converge in {max_iter} steps for coefficients {p.coeffs}")
