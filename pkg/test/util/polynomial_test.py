#!/usr/bin/env python3

import math
import unittest

import numpy as np

from model.spec_io import hemke_constants
from util.errors import InvalidValue
from util.log_complex import LogComplex
from util.polynomial import Polynomial, poly_eval, poly_eval_lc, poly_roots

A, B = hemke_constants()


class TestPolynomial(unittest.TestCase):
    def test_trailing_zeros_stripped(self):
        p = Polynomial((1.0, 2.0, 0.0, 0.0))
        self.assertEqual(p.degree, 1)
        self.assertTrue(Polynomial((0.0,)).is_zero)
        self.assertEqual(Polynomial().degree, -1)

    def test_arithmetic(self):
        p = Polynomial((1.0, 1.0))
        q = Polynomial((-1.0, 1.0))
        self.assertTrue((p * q).is_approx(Polynomial((-1.0, 0.0, 1.0))))
        self.assertTrue((p - p).is_zero)
        self.assertTrue(Polynomial((5.0, 0.0, 3.0)).derivative().is_approx(Polynomial((0.0, 6.0))))
        self.assertTrue((2.0 * p).is_approx(Polynomial((2.0, 2.0))))

    def test_eval_constant_term(self):
        q = Polynomial((B, A, 0.0, 1.0))
        self.assertEqual(poly_eval(q, 0j), B)

    def test_eval_at_fixed_point(self):
        q = Polynomial((-0.080546, 2.55366, 0.0, 1.0))
        self.assertAlmostEqual(poly_eval(q, 0.922615).real, 3.06091, delta=1e-3)
        # with the exact constants Q(sqrt(a/3)) = pi + b
        exact = Polynomial((B, A, 0.0, 1.0))
        self.assertAlmostEqual(poly_eval(exact, math.sqrt(A / 3)).real, math.pi + B, places=12)

    def test_eval_zero_polynomial(self):
        self.assertEqual(poly_eval(Polynomial(), 3 + 4j), 0j)
        self.assertTrue(poly_eval_lc(Polynomial(), LogComplex.from_complex(3 + 4j)).is_zero)

    def test_eval_nan(self):
        with self.assertRaises(InvalidValue):
            poly_eval(Polynomial((1.0,)), complex(math.nan, 0.0))

    def test_eval_array(self):
        p = Polynomial((1.0, -2.0, 0.5j))
        z = np.array([0.0, 1.0 + 1j, -3.0])
        self.assertTrue(np.allclose(p(z), [poly_eval(p, w) for w in z]))


class TestPolynomialLogComplex(unittest.TestCase):
    def test_monomial_far_out(self):
        cube = Polynomial.monomial(3)
        z = LogComplex.from_polar(9782.0, 0.1)
        v = poly_eval_lc(cube, z)
        self.assertAlmostEqual(v.log_mod, 29346.0, places=8)
        self.assertAlmostEqual(v.arg, 0.3, places=12)

    def test_dominance(self):
        z = LogComplex.from_polar(9782.0, 0.1)
        full = poly_eval_lc(Polynomial((B, A, 0.0, 1.0)), z)
        mono = poly_eval_lc(Polynomial.monomial(3), z)
        self.assertTrue(full.is_approx(mono, 1e-12))

    def test_moderate_matches_horner(self):
        q = Polynomial((B, A, 0.0, 1.0))
        z = 21.347
        v = poly_eval_lc(q, LogComplex.from_complex(z)).to_complex()
        self.assertLessEqual(abs(v - poly_eval(q, z)), 1e-12 * abs(poly_eval(q, z)))

    def test_intermediate_range(self):
        # between the double range and the dominance threshold Horner runs in log-polar arithmetic
        q = Polynomial((1.0, 1e300, 1.0))
        z = LogComplex.from_polar(700.0, 0.0)
        v = poly_eval_lc(q, z)
        self.assertAlmostEqual(v.log_mod, 1400.0 + math.log1p(math.exp(math.log(1e300) - 700.0)), places=9)


class TestRoots(unittest.TestCase):
    def test_imaginary_pair(self):
        roots = poly_roots(Polynomial((1.0, 0.0, 1.0)))
        self.assertTrue(np.allclose(sorted(roots, key=lambda r: r.imag), [-1j, 1j], atol=1e-13))

    def test_critical_points_of_cubic(self):
        roots = poly_roots(Polynomial((A, 0.0, 3.0)))
        expected = math.sqrt(A / 3)
        self.assertTrue(np.allclose(sorted(roots, key=lambda r: r.imag), [-1j * expected, 1j * expected]))
        self.assertAlmostEqual(expected, 0.922615, delta=1e-4)

    def test_multiple_root_cluster(self):
        tol = 1e-14
        roots = poly_roots(Polynomial.monomial(3), tol)
        self.assertEqual(len(roots), 3)
        for r in roots:
            self.assertLessEqual(abs(r), 10 * tol ** (1 / 3))

    def test_from_roots(self):
        p = Polynomial.from_roots([1.0, 2.0, -3j])
        self.assertTrue(np.allclose(sorted(poly_roots(p), key=lambda r: (r.real, r.imag)), [-3j, 1.0, 2.0]))

    def test_degree_zero_rejected(self):
        with self.assertRaises(InvalidValue):
            poly_roots(Polynomial((2.0,)))


if __name__ == "__main__":
    unittest.main()
