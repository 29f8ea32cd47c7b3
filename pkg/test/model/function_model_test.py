#!/usr/bin/env python3

import cmath
import math
import unittest

import mpmath
import numpy as np
from scipy import special

from model.function_model import FunctionModel, ModelSettings, find_closed_form, group_values
from model.spec_io import IntegralForm, hemke_constants, preset
from util.log_complex import LogComplex
from util.polynomial import Polynomial, poly_eval

A, B = hemke_constants()
FIXED = math.sqrt(A / 3)


def cube_model() -> FunctionModel:
    """int_0^z exp(t^3) dt, which has no closed form."""
    return FunctionModel(IntegralForm(Polynomial((1.0,)), Polynomial.monomial(3), 0j, "exp-cube-integral"))


class TestClosedForm(unittest.TestCase):
    def test_hemke_cubic(self):
        cf = find_closed_form(preset("hemke-cubic"))
        self.assertIsNotNone(cf)
        self.assertTrue(cf.R.is_approx(Polynomial((1.0,)), 1e-14))
        self.assertLessEqual(abs(cf.C0), 1e-15)

    def test_exp(self):
        cf = find_closed_form(preset("rees-exp", 2.0))
        self.assertTrue(cf.R.is_approx(Polynomial((2.0,)), 1e-14))

    def test_none_for_low_degree_p(self):
        self.assertIsNone(find_closed_form(cube_model().spec))

    def test_higher_degree(self):
        # P = R' + R Q' with R = z and Q = z^2 gives P = 1 + 2 z^2
        spec = IntegralForm(Polynomial((1.0, 0.0, 2.0)), Polynomial.monomial(2))
        cf = find_closed_form(spec)
        self.assertTrue(cf.R.is_approx(Polynomial((0.0, 1.0)), 1e-13))


class TestEvaluate(unittest.TestCase):
    def test_hemke_at_zero(self):
        model = FunctionModel(preset("hemke-cubic"))
        self.assertAlmostEqual(model.evaluate(0j).real, FIXED, places=12)
        self.assertAlmostEqual(model.evaluate(0j).real, 0.922615, delta=1e-4)

    def test_hemke_step_two(self):
        model = FunctionModel(preset("hemke-cubic"))
        value = model.evaluate(FIXED)
        self.assertAlmostEqual(value.real, math.exp(math.pi + B), places=10)
        self.assertAlmostEqual(value.real, 21.347, delta=0.01)

    def test_sinh_cubic_at_zero(self):
        self.assertEqual(FunctionModel(preset("sinh-cubic")).evaluate(0j), 0j)

    def test_quadrature_against_mpmath(self):
        model = cube_model()
        for z in (1.0, 0.5 + 1j, -1.5j):
            oracle = complex(mpmath.quad(lambda t: mpmath.exp(t**3), [0, z]))
            self.assertLessEqual(abs(model.evaluate(z) - oracle), 1e-9 * max(1.0, abs(oracle)))

    def test_array_agrees(self):
        for model in (cube_model(), FunctionModel(preset("hemke-cubic")), FunctionModel(preset("sinh-cubic"))):
            z = np.array([0.5, 1 + 1j, -1.5j, 0.2 - 0.7j])
            expected = np.array([model.evaluate(w) for w in z])
            self.assertTrue(np.allclose(model.evaluate_array(z), expected, rtol=1e-9, atol=1e-12))

    def test_array_overflow_is_infinite(self):
        model = FunctionModel(preset("hemke-cubic"))
        out = model.evaluate_array(np.array([10.0, 0.0]))
        self.assertTrue(np.isinf(out[0]))
        self.assertTrue(np.isfinite(out[1]))

    def test_scaled_beyond_double_range(self):
        model = FunctionModel(preset("hemke-cubic"))
        v = model.evaluate_scaled(10.0)
        self.assertAlmostEqual(v.log_mod, poly_eval(model.spec.Q, 10.0).real, places=9)

    def test_expansion_at_step_three(self):
        model = FunctionModel(preset("hemke-cubic"))
        z = math.exp(math.pi + B)
        v = model.evaluate_lc(LogComplex.from_complex(z)).value
        self.assertAlmostEqual(v.log_mod / poly_eval(model.spec.Q, z).real, 1.0, places=12)
        self.assertAlmostEqual(v.log_mod, 9782.0, delta=10.0)

    def test_exp_expansion_exact(self):
        v = FunctionModel(preset("rees-exp")).evaluate_lc(LogComplex.from_complex(100.0)).value
        self.assertAlmostEqual(v.log_mod, 100.0, places=12)
        self.assertEqual(v.arg, 0.0)

    def test_expansion_near_asymptotic(self):
        model = cube_model()
        z = LogComplex.from_polar(math.log(1e6), math.pi)
        e = model.evaluate_lc(z)
        self.assertTrue(e.near_asymptotic)
        s = model.asymptotic_values().sectors[e.sector].value
        self.assertTrue(e.value.is_approx(LogComplex.from_complex(s), 1e-12))

    def test_value_lc_regimes(self):
        model = FunctionModel(preset("hemke-cubic"))
        self.assertEqual(model.value_lc(LogComplex.from_complex(0.5))[1], "moderate")
        self.assertEqual(model.value_lc(LogComplex.from_complex(10.0))[1], "scaled")
        self.assertEqual(model.value_lc(LogComplex.from_complex(100.0))[1], "asymptotic")


class TestDerivative(unittest.TestCase):
    def test_exp_at_zero(self):
        self.assertAlmostEqual(FunctionModel(preset("rees-exp")).derivative_complex(0j), 1.0)

    def test_hemke_critical_point(self):
        model = FunctionModel(preset("hemke-cubic"))
        self.assertLessEqual(abs(model.derivative_complex(1j * FIXED)), 1e-12)

    def test_hemke_real_fixed_value(self):
        model = FunctionModel(preset("hemke-cubic"))
        d = abs(model.derivative_complex(FIXED))
        self.assertAlmostEqual(d / (2 * A * math.exp(math.pi + B)), 1.0, places=12)
        self.assertAlmostEqual(d, 109.2, delta=0.5)

    def test_matches_central_difference(self):
        model = cube_model()
        z, h = 1 + 0.5j, 1e-3
        d = model.derivative_complex(z)
        self.assertLessEqual(abs(d - cmath.exp(z**3)), 1e-12 * abs(d))
        central = (model.evaluate(z + h) - model.evaluate(z - h)) / (2 * h)
        self.assertLessEqual(abs(central - d), 1e-4 * abs(d))

    def test_array_agrees(self):
        model = FunctionModel(preset("sinh-cubic"))
        z = np.array([0.3, 0.5 + 0.5j])
        self.assertTrue(np.allclose(model.derivative_array(z), [model.derivative_complex(w) for w in z]))


class TestAsymptoticValues(unittest.TestCase):
    def test_exp(self):
        report = FunctionModel(preset("rees-exp")).asymptotic_values()
        self.assertEqual(len(report.sectors), 1)
        self.assertAlmostEqual(report.sectors[0].phi, math.pi)
        self.assertLessEqual(abs(report.values[0]), 1e-10)

    def test_hemke_cubic(self):
        report = FunctionModel(preset("hemke-cubic")).asymptotic_values()
        self.assertEqual(len(report.values), 3)
        for v in report.values:
            self.assertLessEqual(abs(v), 1e-10)
        self.assertEqual(len(report.groups), 1)
        self.assertEqual(report.groups[0][1], 3)

    def test_hemke_cubic_by_quadrature(self):
        model = FunctionModel(preset("hemke-cubic"), ModelSettings(use_closed_form=False))
        self.assertIsNone(model.closed_form)
        report = model.asymptotic_values()
        self.assertEqual(len(report.values), 3)
        for s in report.sectors:
            self.assertLessEqual(abs(s.value), 1e-8)
            self.assertGreater(s.quadrature_error, 0.0)
            self.assertGreater(s.radius, 0.0)
        self.assertEqual(report.groups[0][1], 3)
        self.assertAlmostEqual(model.evaluate(FIXED).real, math.exp(math.pi + B), places=6)

    def test_cube_integral(self):
        report = cube_model().asymptotic_values()
        for s in report.sectors:
            expected = special.gamma(4.0 / 3.0) * cmath.exp(1j * s.phi)
            self.assertLessEqual(abs(s.value - expected), 1e-8)
            self.assertLessEqual(s.tail_bound, 1e-10)
        self.assertEqual(len(report.groups), 3)

    def test_sinh_cubic_escapes_along_every_direction(self):
        report = FunctionModel(preset("sinh-cubic")).asymptotic_values()
        self.assertEqual(len(report.sectors), 6)
        self.assertTrue(all(s.escaping for s in report.sectors))
        self.assertEqual(report.values, [])

    def test_frame_columns(self):
        frame = cube_model().asymptotic_values().to_frame()
        for column in ("k", "phi", "re", "im", "quadrature_error", "tail_bound", "group", "escaping"):
            self.assertIn(column, frame.columns)
        self.assertEqual(len(frame), 3)

    def test_group_values(self):
        groups = group_values([1.0, 1.0 + 1e-9, None, 2.0], 1e-6)
        self.assertEqual([count for _, count in groups], [2, 1])


class TestCriticalPoints(unittest.TestCase):
    def test_hemke_cubic(self):
        points = sorted(FunctionModel(preset("hemke-cubic")).critical_points(), key=lambda z: z.imag)
        self.assertTrue(np.allclose(points, [-1j * FIXED, 1j * FIXED]))

    def test_exp_has_none(self):
        self.assertEqual(FunctionModel(preset("rees-exp")).critical_points(), [])

    def test_sinh_cubic_double_zero(self):
        points = FunctionModel(preset("sinh-cubic")).critical_points()
        self.assertEqual(len(points), 2)
        self.assertTrue(np.allclose(points, [0j, 0j], atol=1e-6))


class TestRemainder(unittest.TestCase):
    def test_decaying_side(self):
        # f - s = -int_z^inf exp(t^3) dt ~ exp(z^3) / (3 z^2) on the negative real axis
        r = cube_model().remainder_lc(-3.0)
        self.assertAlmostEqual(r.log_mod, -27.0 - math.log(27.0), delta=0.05)

    def test_escaping_side(self):
        model = FunctionModel(preset("hemke-cubic"))
        r = model.remainder_lc(2.0)
        self.assertAlmostEqual(r.log_mod, math.log(abs(model.evaluate(2.0))), places=9)


if __name__ == "__main__":
    unittest.main()
