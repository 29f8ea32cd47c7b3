#!/usr/bin/env python3

import math
import tempfile
import unittest
from pathlib import Path

from model.spec_io import (
    ExpSumForm,
    IntegralForm,
    hemke_constants,
    load_spec,
    parse_lambda,
    preset,
    save_spec,
    spec_from_dict,
)
from util.errors import InvalidSpec
from util.polynomial import Polynomial


class TestSpecValidation(unittest.TestCase):
    def test_integral_form_needs_nonzero_p(self):
        with self.assertRaises(InvalidSpec):
            IntegralForm(Polynomial(), Polynomial((0.0, 1.0)))

    def test_integral_form_needs_nonconstant_q(self):
        with self.assertRaises(InvalidSpec):
            IntegralForm(Polynomial((1.0,)), Polynomial((3.0,)))

    def test_expsum_degree_mismatch(self):
        with self.assertRaises(InvalidSpec):
            ExpSumForm(Polynomial((1.0,)), Polynomial.monomial(3), Polynomial((1.0,)), Polynomial.monomial(2, -1.0))

    def test_expsum_leading_arguments(self):
        # arguments differing by an even multiple of pi / n are rejected
        with self.assertRaises(InvalidSpec):
            ExpSumForm(Polynomial((1.0,)), Polynomial.monomial(2), Polynomial((1.0,)), Polynomial.monomial(2, -1.0))
        # i z^2 against z^2 differs by pi / 2, an odd multiple of pi / 2
        s = ExpSumForm(Polynomial((1.0,)), Polynomial.monomial(2), Polynomial((1.0,)), Polynomial.monomial(2, 1j))
        self.assertFalse(s.is_antisymmetric)

    def test_schema(self):
        with self.assertRaises(InvalidSpec):
            spec_from_dict({"form": "integral", "P": [1.0]})
        with self.assertRaises(InvalidSpec):
            spec_from_dict({"form": "integral", "P": [1.0], "Q": [0.0, 1.0], "extra": 1})
        with self.assertRaises(InvalidSpec):
            spec_from_dict({"form": "expsum", "P": [1.0], "Q": [0.0, 1.0]})

    def test_complex_coefficients(self):
        spec = spec_from_dict({"form": "integral", "P": [[0.0, 2.0]], "Q": [0.0, 1.0], "c": [1.0, -1.0]})
        self.assertEqual(spec.P.coeffs, (2j,))
        self.assertEqual(spec.c, 1 - 1j)

    def test_file_round_trip(self):
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "sinh.json"
            save_spec(preset("sinh-cubic"), path)
            spec = load_spec(path)
        self.assertIsInstance(spec, ExpSumForm)
        self.assertTrue(spec.is_antisymmetric)
        self.assertEqual(spec.name, "sinh-cubic")

    def test_bad_file(self):
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "bad.json"
            path.write_text("{not json")
            with self.assertRaises(InvalidSpec):
                load_spec(path)
            with self.assertRaises(InvalidSpec):
                load_spec(Path(d) / "missing.json")


class TestPresets(unittest.TestCase):
    def test_hemke_constants(self):
        a, b = hemke_constants()
        self.assertAlmostEqual(a**3, 27 * math.pi**2 / 16, places=12)
        self.assertAlmostEqual(b, math.log(math.sqrt(a / 3)), places=15)
        self.assertAlmostEqual(a, 2.55366, delta=2e-4)
        self.assertAlmostEqual(b, -0.080546, delta=1e-4)

    def test_hemke_cubic(self):
        spec = preset("hemke-cubic")
        a, b = hemke_constants()
        self.assertIsInstance(spec, IntegralForm)
        self.assertTrue(spec.P.is_approx(spec.Q.derivative(), 1e-15))
        self.assertAlmostEqual(spec.c.real, math.exp(b), places=15)
        self.assertEqual(spec.Q.coeffs[1], a)

    def test_rees_exp_multiplier(self):
        spec = preset("rees-exp", 2j * math.pi)
        self.assertEqual(spec.c, 2j * math.pi)
        self.assertEqual(spec.P.coeffs, (2j * math.pi,))

    def test_unknown_preset(self):
        with self.assertRaises(InvalidSpec):
            preset("mandelbrot")
        with self.assertRaises(InvalidSpec):
            preset("hemke-cubic", 2.0)


class TestParseLambda(unittest.TestCase):
    def test_forms(self):
        self.assertEqual(parse_lambda("2pi_i"), 2j * math.pi)
        self.assertEqual(parse_lambda("2*pi*i"), 2j * math.pi)
        self.assertEqual(parse_lambda("-1.5"), -1.5)
        self.assertEqual(parse_lambda("pi"), math.pi)
        self.assertEqual(parse_lambda("0.5+1j"), 0.5 + 1j)
        self.assertEqual(parse_lambda("i"), 1j)

    def test_garbage(self):
        with self.assertRaises(InvalidSpec):
            parse_lambda("two pi")


if __name__ == "__main__":
    unittest.main()
