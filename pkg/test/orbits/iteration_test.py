#!/usr/bin/env python3

import math
import unittest

from model.function_model import FunctionModel
from model.spec_io import hemke_constants, preset
from orbits.iteration import OrbitSettings, classify_escape, detect_cycle, escape_exponents, iterate_orbit
from orbits.record import AttractedToCycle, ExponentialEscape, Preperiodic, StopReason, Undecided
from util.errors import InsufficientTail, InvalidParams
from util.log_complex import LogComplex
from util.params import apply_overrides, clear_overrides
from util.polynomial import poly_eval

A, B = hemke_constants()
FIXED = math.sqrt(A / 3)


class TestIterateOrbit(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.hemke = FunctionModel(preset("hemke-cubic"))
        cls.sinh = FunctionModel(preset("sinh-cubic"))

    def test_hemke_orbit_of_zero(self):
        record = iterate_orbit(self.hemke, 0j, 20)
        self.assertEqual(record.stop_reason, StopReason.saturated)
        log_mods = [p.log_mod for p in record.points]
        self.assertEqual(log_mods[0], -math.inf)
        self.assertAlmostEqual(log_mods[1], math.log(FIXED), places=12)
        self.assertAlmostEqual(log_mods[2], math.pi + B, places=10)
        z2 = math.exp(math.pi + B)
        self.assertAlmostEqual(log_mods[3] / poly_eval(self.hemke.spec.Q, z2).real, 1.0, places=10)
        self.assertTrue(record.last.saturated)
        self.assertEqual(record.regimes[:4], ("start", "moderate", "moderate", "scaled"))

    def test_hemke_orbit_escapes_with_degree_exponent(self):
        record = iterate_orbit(self.hemke, 0j, 20)
        self.assertIsInstance(record.classification, ExponentialEscape)
        self.assertAlmostEqual(record.delta_hat, 3.0, delta=0.01)

    def test_sinh_cubic_fixed_zero(self):
        record = iterate_orbit(self.sinh, 0j, 20)
        self.assertEqual(record.stop_reason, StopReason.cycle_found)
        self.assertEqual(record.classification, Preperiodic(0, 1))

    def test_superattracting_fixed_point(self):
        record = iterate_orbit(self.hemke, 1j * FIXED, 50)
        self.assertIsInstance(record.classification, AttractedToCycle)
        self.assertEqual(record.classification.period, 1)
        self.assertLess(record.classification.multiplier_log_mod, -20.0)

    def test_converges_to_fixed_point(self):
        record = iterate_orbit(self.hemke, 1j * FIXED + 1e-3, 50)
        c = record.classification
        self.assertIsInstance(c, AttractedToCycle)
        self.assertLess(c.multiplier_log_mod, 0.0)
        self.assertLessEqual(abs(c.representative - 1j * FIXED), 1e-8)

    def test_repelling_cycle_is_preperiodic(self):
        record = iterate_orbit(FunctionModel(preset("rees-exp", 2j * math.pi)), 0j, 20)
        self.assertEqual(record.classification, Preperiodic(1, 1))

    def test_budget(self):
        record = iterate_orbit(self.hemke, 1j * FIXED + 0.3, 1)
        self.assertEqual(len(record.points), 2)
        self.assertEqual(record.stop_reason, StopReason.budget_exhausted)
        with self.assertRaises(InvalidParams):
            iterate_orbit(self.hemke, 0j, 0)

    def test_frame(self):
        frame = iterate_orbit(self.hemke, 0j, 20).to_frame()
        self.assertEqual(list(frame.columns), ["index", "log_mod", "arg", "regime"])
        self.assertTrue(math.isnan(frame["arg"].iloc[-1]))

    def test_start_beyond_double_range(self):
        record = iterate_orbit(self.hemke, LogComplex.from_polar(1000.0, 0.0), 5)
        self.assertTrue(math.isinf(record.z0.real))
        self.assertEqual(record.points[0].log_mod, 1000.0)
        self.assertEqual(record.stop_reason, StopReason.saturated)
        self.assertIsInstance(record.classification, ExponentialEscape)

    def test_saturation_override(self):
        apply_overrides({"numeric": {"l_sat": 100.0}})
        try:
            record = iterate_orbit(self.hemke, 0j, 20)
        finally:
            clear_overrides()
        self.assertEqual(len(record.points), 4)
        self.assertTrue(record.last.saturated)
        self.assertFalse(iterate_orbit(self.hemke, 0j, 20).points[3].saturated)
        self.assertEqual(record.stop_reason, StopReason.saturated)


class TestClassifyEscape(unittest.TestCase):
    def test_exp_orbit(self):
        record = iterate_orbit(FunctionModel(preset("rees-exp")), 0j, 20)
        escaping, delta_hat = classify_escape(record)
        self.assertTrue(escaping)
        self.assertAlmostEqual(delta_hat, 1.0, places=6)

    def test_polynomial_growth(self):
        # |z| growing like exp(100 + n) has exponents below delta_min
        log_mods = [100.0 + k for k in range(40)]
        escaping, delta_hat = classify_escape(log_mods, delta_min=0.05, M=10.0, min_tail=3)
        self.assertFalse(escaping)
        self.assertIsNone(delta_hat)

    def test_short_tail(self):
        with self.assertRaises(InsufficientTail):
            classify_escape([0.0, 1.0, 5.0], delta_min=0.05, M=10.0, min_tail=3)

    def test_exponents(self):
        d = escape_exponents([2.0, math.exp(6.0), math.inf])
        self.assertAlmostEqual(d[0], 3.0)
        self.assertEqual(d[1], math.inf)

    def test_exponents_after_underflow(self):
        self.assertEqual(escape_exponents([2.0, 0.0]), [-math.inf])
        self.assertEqual(escape_exponents([2.0, -1.0]), [-math.inf])

    def test_radius_must_exceed_one(self):
        with self.assertRaises(InvalidParams):
            escape_exponents([0.0, 1.0])
        with self.assertRaises(InvalidParams):
            classify_escape([3.0, 9.0, 27.0, 81.0], M=1.0)
        with self.assertRaises(InvalidParams):
            classify_escape([3.0, 9.0, 27.0, 81.0], M=0.5)
        with self.assertRaises(InvalidParams):
            OrbitSettings(M=1.0)


class TestDetectCycle(unittest.TestCase):
    def test_constant(self):
        cycle = detect_cycle([0.5 + 0.5j] * 6, 1e-9, 16)
        self.assertEqual((cycle.preperiod, cycle.period), (0, 1))
        self.assertTrue(cycle.exact)

    def test_two_cycle(self):
        cycle = detect_cycle([3.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0], 1e-9, 16)
        self.assertEqual((cycle.preperiod, cycle.period), (1, 2))

    def test_no_cycle(self):
        self.assertIsNone(detect_cycle([float(k) for k in range(20)], 1e-9, 16))

    def test_period_cap(self):
        seq = [float(k % 5) for k in range(30)]
        self.assertEqual(detect_cycle(seq, 1e-9, 16).period, 5)
        self.assertIsNone(detect_cycle(seq, 1e-9, 4))

    def test_short_orbit_is_undecided(self):
        record = iterate_orbit(FunctionModel(preset("hemke-cubic")), 0.3 + 1.2j, 1)
        self.assertIsInstance(record.classification, Undecided)


if __name__ == "__main__":
    unittest.main()
