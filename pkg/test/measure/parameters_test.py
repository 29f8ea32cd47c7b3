#!/usr/bin/env python3

import math
import unittest

from measure.channels import channel_gap_geometry
from measure.parameters import ParameterSet, density_bound, eta, fatou_measure_bound, mk_schedule
from model.geometry import SectorGeometry, q_angles
from model.spec_io import IntegralForm, preset
from util.errors import InvalidParams
from util.polynomial import Polynomial

CUBE = IntegralForm(Polynomial((1.0,)), Polynomial.monomial(3))


class TestEta(unittest.TestCase):
    def test_values(self):
        self.assertAlmostEqual(eta(ParameterSet(tau=0.5, beta=0.0)), 0.5)
        self.assertAlmostEqual(eta(ParameterSet(tau=0.8, beta=0.0)), 0.8)
        self.assertAlmostEqual(ParameterSet(tau=0.75, beta=0.25).eta, 0.5)

    def test_tau_not_above_beta(self):
        with self.assertRaises(InvalidParams):
            eta(ParameterSet(tau=0.3, beta=0.5))

    def test_validation(self):
        with self.assertRaises(InvalidParams):
            ParameterSet(epsilon=1.5)
        with self.assertRaises(InvalidParams):
            ParameterSet(delta1=3.0, delta2=2.0)
        self.assertTrue(ParameterSet().consistent)
        self.assertFalse(ParameterSet(tau=0.3, beta=0.5).consistent)


class TestSchedule(unittest.TestCase):
    def test_first_radius(self):
        for tau in (0.5, 0.75):
            s = mk_schedule(100.0, 0.5, tau, 3)
            self.assertAlmostEqual(s.M[1] / math.exp(10.0), 1.0, places=9)

    def test_product_check(self):
        s = mk_schedule(100.0, 0.5, 0.5, 20, beta=0.0)
        self.assertTrue(s.product_check)
        self.assertAlmostEqual(s.bound, 1.0 - math.exp(-5.0))
        self.assertEqual(len(s.M), 21)
        self.assertEqual(s.M[-1], math.inf)

    def test_product_check_needs_tau_above_beta(self):
        self.assertFalse(mk_schedule(100.0, 0.5, 0.2, 5, beta=0.5).product_check)

    def test_frame(self):
        frame = mk_schedule(100.0, 0.5, 0.5, 4).to_frame()
        self.assertEqual(list(frame.columns), ["k", "M_k", "partial_product"])
        self.assertTrue(math.isnan(frame["partial_product"].iloc[0]))

    def test_invalid(self):
        with self.assertRaises(InvalidParams):
            mk_schedule(1.0, 0.5, 0.5, 3)
        with self.assertRaises(InvalidParams):
            mk_schedule(100.0, 0.5, 1.0, 3)


class TestBounds(unittest.TestCase):
    def test_density_bound(self):
        params = ParameterSet(epsilon=0.5, tau=0.5, beta=0.0)
        self.assertAlmostEqual(density_bound(params, 100.0), 1.0 - math.exp(-5.0))

    def test_fatou_measure_bound(self):
        params = ParameterSet()
        bound = fatou_measure_bound(CUBE, params, M=10.0, delta=0.25)
        self.assertTrue(math.isfinite(bound))
        self.assertGreater(bound, math.pi * 100.0)
        self.assertGreater(fatou_measure_bound(CUBE, params, M=20.0, delta=0.25), math.pi * 400.0)

    def test_fatou_measure_bound_low_degree(self):
        self.assertEqual(fatou_measure_bound(preset("rees-exp"), ParameterSet(), delta=0.25), math.inf)


class TestChannels(unittest.TestCase):
    def geometry(self) -> SectorGeometry:
        return SectorGeometry(3, 1.0, tuple(q_angles(CUBE.Q)), (0j, 0j, 0j), 0.25, 10.0)

    def test_bounds(self):
        g = channel_gap_geometry(self.geometry(), CUBE, 100.0, 0.01)
        self.assertAlmostEqual(g.channel_width_lb, (0.97 / 3) * 2 * math.pi * 1e-4, places=15)
        self.assertAlmostEqual(g.gap_width_ub, (2 - 0.97 / 3) * math.pi * 1e-4, places=15)
        self.assertAlmostEqual(g.gap_width_ub, 5.27e-4, delta=1e-6)

    def test_measured_widths(self):
        g = channel_gap_geometry(self.geometry(), CUBE, 100.0, 0.01)
        # |R^3 cos 3t| <= pi on an arc of length (2 / 3) R asin(pi / R^3)
        self.assertAlmostEqual(g.empirical_width / (2.0 / 3.0 * 100.0 * math.asin(math.pi * 1e-6)), 1.0, places=6)
        self.assertLessEqual(g.channel_width_lb, g.empirical_width)
        self.assertLessEqual(g.empirical_width, g.gap_width_ub)
        self.assertGreater(g.g_complement_width, g.empirical_width)

    def test_radius_inside_m(self):
        with self.assertRaises(InvalidParams):
            channel_gap_geometry(self.geometry(), CUBE, 5.0, 0.01)


if __name__ == "__main__":
    unittest.main()
