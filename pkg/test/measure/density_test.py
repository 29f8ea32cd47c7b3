#!/usr/bin/env python3

import cmath
import math
import unittest
from typing import Tuple

import numpy as np

from measure.density import (
    Annulus,
    HitPredicate,
    ShadowSet,
    count_hits,
    escaped,
    estimate_escape_density,
    estimate_nonescaping_tail,
    sample_points,
    wilson_interval,
)
from measure.parameters import ParameterSet
from measure.squares import SquareRegion, build_square_cover, cover_area, size_bounds
from model.function_model import FunctionModel
from model.geometry import SectorGeometry, q_angles
from model.spec_io import IntegralForm, preset
from orbits.record import AttractedToCycle, ExponentialEscape, OrbitRecord, StopReason, Undecided
from util.errors import InvalidParams, QuadratureError, WindowTooSmall
from util.log_complex import LogComplex
from util.params import apply_overrides, clear_overrides
from util.polynomial import Polynomial

CUBE = IntegralForm(Polynomial((1.0,)), Polynomial.monomial(3))
GEOMETRY = SectorGeometry(3, 1.0, tuple(q_angles(CUBE.Q)), (0j, 0j, 0j), 0.25, 10.0)


class TestSquareCover(unittest.TestCase):
    def test_diameter_bounds(self):
        params = ParameterSet()
        window = SquareRegion(30.0, 0.002)
        squares = build_square_cover(GEOMETRY, CUBE, window, params, 0.5)
        self.assertGreater(len(squares), 4)
        for s in squares:
            lower, upper = size_bounds(s, params, 0.5)
            self.assertLessEqual(s.diam, upper * (1 + 1e-12))
            self.assertGreaterEqual(s.diam, lower)

    def test_tiles_the_window(self):
        window = SquareRegion(30.0, 0.002)
        squares = build_square_cover(GEOMETRY, CUBE, window, ParameterSet(), 0.5)
        self.assertAlmostEqual(cover_area(squares) / window.area, 1.0, places=9)
        self.assertAlmostEqual(sum(s.area for s in squares) / window.area, 1.0, places=9)

    def test_channel_centerline(self):
        window = SquareRegion(30.0 * cmath.exp(1j * math.pi / 6), 1e-4)
        with self.assertRaises(WindowTooSmall):
            build_square_cover(GEOMETRY, CUBE, window, ParameterSet(), 0.5)

    def test_invalid(self):
        with self.assertRaises(InvalidParams):
            build_square_cover(GEOMETRY, CUBE, SquareRegion(30.0, 1.0), ParameterSet(), 1.5)
        with self.assertRaises(InvalidParams):
            SquareRegion(0j, -1.0)

    def test_square_geometry(self):
        s = SquareRegion(3 + 4j, 1.0)
        self.assertAlmostEqual(s.diam, 2 * math.sqrt(2))
        self.assertAlmostEqual(s.sup_abs, 5 + math.sqrt(2))
        self.assertEqual(len(s.children()), 4)
        self.assertAlmostEqual(sum(c.area for c in s.children()), s.area)


class TestWilson(unittest.TestCase):
    def test_empty(self):
        self.assertEqual(wilson_interval(0, 0), (0.0, 1.0))

    def test_half(self):
        lo, hi = wilson_interval(50, 100, 0.95)
        self.assertAlmostEqual(lo, 0.4038, places=3)
        self.assertAlmostEqual(hi, 0.5962, places=3)

    def test_all_hits(self):
        lo, hi = wilson_interval(100, 100, 0.95)
        self.assertEqual(hi, 1.0)
        self.assertAlmostEqual(lo, 0.9630, places=3)


class TestSampling(unittest.TestCase):
    def test_deterministic(self):
        region = SquareRegion(1 + 1j, 0.5)
        a = sample_points(region, 50, 7)
        self.assertTrue(np.array_equal(a, sample_points(region, 50, 7)))
        self.assertTrue(np.array_equal(a[:10], sample_points(region, 10, 7)))
        self.assertFalse(np.array_equal(a, sample_points(region, 50, 8)))

    def test_inside_region(self):
        z = sample_points(SquareRegion(1 + 1j, 0.5), 200, 3)
        self.assertTrue(np.all(np.abs(z.real - 1) <= 0.5))
        self.assertTrue(np.all(np.abs(z.imag - 1) <= 0.5))
        r = np.abs(sample_points(Annulus(2.0, 3.0), 200, 3))
        self.assertTrue(np.all((r >= 2.0) & (r <= 3.0)))


class TestDensity(unittest.TestCase):
    def test_far_square_escapes(self):
        model = FunctionModel(preset("hemke-cubic"))
        params = ParameterSet(epsilon=0.5)
        est = estimate_escape_density(model, SquareRegion(30.0, 1.0), n=100, max_iter=10, seed=1, params=params)
        self.assertEqual(est.n_samples, 100)
        self.assertGreaterEqual(est.fraction, 0.95)
        self.assertLessEqual(est.ci_low, est.fraction)
        self.assertIsNotNone(est.theory_bound)

    def test_superattracted_square(self):
        model = FunctionModel(preset("sinh-cubic"))
        est = estimate_escape_density(
            model, SquareRegion(0j, 0.05), n=100, max_iter=20, seed=1, predicate=HitPredicate.escaped
        )
        self.assertEqual(est.n_hit, 0)
        self.assertEqual(est.fraction, 0.0)
        self.assertEqual(est.row()["predicate"], "Escaped")

    def test_too_few_samples(self):
        with self.assertRaises(InvalidParams):
            estimate_escape_density(FunctionModel(preset("hemke-cubic")), SquareRegion(30.0, 1.0), n=10)


class TestTail(unittest.TestCase):
    def test_empty(self):
        table = estimate_nonescaping_tail(FunctionModel(preset("hemke-cubic")), [20.0, 21.0], n_per_annulus=0)
        self.assertEqual(table.estimates, ())
        self.assertTrue(table.to_frame().empty)

    def test_bad_radii(self):
        with self.assertRaises(InvalidParams):
            estimate_nonescaping_tail(FunctionModel(preset("hemke-cubic")), [20.0], n_per_annulus=0)
        with self.assertRaises(InvalidParams):
            estimate_nonescaping_tail(FunctionModel(preset("hemke-cubic")), [21.0, 20.0], n_per_annulus=0)

    def test_table(self):
        model = FunctionModel(preset("hemke-cubic"))
        table = estimate_nonescaping_tail(model, [20.0, 21.0], n_per_annulus=100, max_iter=8, seed=2)
        frame = table.to_frame()
        self.assertEqual(len(frame), 2)
        for column in ("R", "fraction", "tail_term", "partial_sum", "ci_low", "ci_high"):
            self.assertIn(column, frame.columns)
        for f in table.fractions:
            self.assertTrue(0.0 <= f <= 1.0)
        self.assertAlmostEqual(frame["partial_sum"].iloc[-1], sum(table.tail_terms))

def record(log_mods, classification, stop_reason, error=None):
    points = tuple(LogComplex.zero() if m == -math.inf else LogComplex.from_polar(m, 0.0) for m in log_mods)
    return OrbitRecord(
        points[0].to_complex(),
        points,
        ("start",) + ("moderate",) * (len(points) - 1),
        classification,
        stop_reason,
        error=error,
        error_index=len(points) if error else None,
    )


FAILED = record([0.0], Undecided(0.0), StopReason.error_state, "quadrature did not converge")
SATURATED = record([0.0, 3.0, 9782.0], ExponentialEscape(3.0), StopReason.saturated)


class NoConvergence(FunctionModel):
    def value_lc(self, z: LogComplex) -> Tuple[LogComplex, str]:
        raise QuadratureError("segment did not converge")


class TestCounting(unittest.TestCase):
    def test_error_is_never_a_hit(self):
        records = [FAILED, FAILED, FAILED, SATURATED]
        self.assertEqual(count_hits(records, lambda r: not escaped(r)), (0, 3))
        self.assertEqual(count_hits(records, escaped), (1, 3))
        self.assertEqual(count_hits(records, lambda r: True), (1, 3))

    def test_failed_orbits_in_estimates(self):
        model = NoConvergence(preset("hemke-cubic"))
        est = estimate_escape_density(
            model, SquareRegion(30.0, 1.0), n=100, max_iter=5, seed=1, predicate=HitPredicate.escaped
        )
        self.assertEqual((est.n_hit, est.n_error, est.fraction), (0, 100, 0.0))
        self.assertEqual(est.row()["errors"], 100)
        table = estimate_nonescaping_tail(model, [20.0, 21.0], n_per_annulus=100, max_iter=5, seed=2)
        for e in table.estimates:
            self.assertEqual((e.n_hit, e.n_error), (0, 100))


class TestShadow(unittest.TestCase):
    def setUp(self):
        # stored escaping orbit 0 -> 1 -> e^3 -> saturated
        stored = record([-math.inf, 0.0, 3.0, 9782.0], ExponentialEscape(3.0), StopReason.saturated)
        self.shadow = ShadowSet([stored], math.log(50.0), 1e-3)

    def test_only_escaping_orbits_are_stored(self):
        stuck = record([0.0, 0.5], Undecided(0.5), StopReason.budget_exhausted)
        self.assertEqual(ShadowSet([stuck], math.log(50.0), 1e-3).points, [])
        self.assertEqual(self.shadow.steps_left, [3, 2, 1])

    def test_close_then_falls_back(self):
        sample = record([1.0, 1e-5, 0.4, 0.3, 0.3], Undecided(0.3), StopReason.budget_exhausted)
        self.assertEqual(self.shadow.match(sample), (1, 2))
        self.assertFalse(self.shadow.shadows(sample))

    def test_close_then_cycle(self):
        sample = record([1.0, 1e-5, 0.2, 0.2], AttractedToCycle(1, -2.0), StopReason.cycle_found)
        self.assertFalse(self.shadow.shadows(sample))

    def test_close_then_escapes(self):
        sample = record([1.0, 1e-5, 3.0, 9000.0], ExponentialEscape(3.0), StopReason.saturated)
        self.assertTrue(self.shadow.shadows(sample))

    def test_budget_ends_while_following(self):
        sample = record([1.0, 1e-5, 2.99], Undecided(2.99), StopReason.budget_exhausted)
        self.assertTrue(self.shadow.shadows(sample))

    def test_never_close(self):
        sample = record([1.0, 0.5, 4.0, 9000.0], ExponentialEscape(3.0), StopReason.saturated)
        self.assertIsNone(self.shadow.match(sample))
        self.assertFalse(self.shadow.shadows(sample))


class TestCoverOverrides(unittest.TestCase):
    def tearDown(self):
        clear_overrides()

    def test_square_cap(self):
        apply_overrides({"measure": {"max_squares": 4}})
        with self.assertRaises(InvalidParams):
            build_square_cover(GEOMETRY, CUBE, SquareRegion(30.0, 0.002), ParameterSet(), 0.5)
        clear_overrides()
        self.assertGreater(len(build_square_cover(GEOMETRY, CUBE, SquareRegion(30.0, 0.002), ParameterSet(), 0.5)), 4)


class TestTrends(unittest.TestCase):
    """The density trends at reduced sample counts."""

    def test_escape_fraction_grows_with_radius(self):
        model = FunctionModel(preset("hemke-cubic"))
        estimates = [
            estimate_escape_density(model, SquareRegion(m0, 0.5), n=100, max_iter=10, seed=11)
            for m0 in (10.0, 20.0, 40.0)
        ]
        for e in estimates:
            self.assertGreaterEqual(e.fraction, 0.95)
        for a, b in zip(estimates, estimates[1:]):
            self.assertGreaterEqual(b.ci_high, a.ci_low)

    def test_nonescaping_fraction_shrinks(self):
        model = FunctionModel(preset("sinh-cubic"))
        table = estimate_nonescaping_tail(model, [2.0, 4.0, 8.0], n_per_annulus=4000, max_iter=30, seed=5)
        f = table.fractions
        self.assertGreater(f[0], f[1])
        self.assertGreater(f[1], f[2])
        self.assertGreaterEqual(1.0 - f[2], 0.9)

    def test_degenerate_square(self):
        model = FunctionModel(preset("hemke-cubic"))
        est = estimate_escape_density(model, SquareRegion(30.0, 0.0), n=100, max_iter=10, seed=1)
        self.assertIn(est.fraction, (0.0, 1.0))
        self.assertEqual(est.fraction, 1.0)


if __name__ == "__main__":
    unittest.main()
