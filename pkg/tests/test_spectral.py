"""Test for spreadcore.spectral module."""
import logging
import math
import unittest

import numpy as np
from mock import patch
from testfixtures import LogCapture

from spreadcore.const import RESIDUAL_TOL
from spreadcore.exceptions import (
    HB1Violated,
    InvalidInvocation,
    NoConvergence,
    PreconditionLambdaNonnegative,
)
from spreadcore.spectral import (
    PeriodicOrbit,
    _period_map,
    check_HB1_HB2,
    growth_table,
    nonhomogeneous_periodic,
    periodic_attractor,
    principal_eigenfunction_course,
    principal_spectrum_point,
    sample_global_stability,
    spectrum_point_value,
)

from .conftest import (
    CONSTANTS,
    CONSTANTS_CONFIG,
    SPACE_TIME_CONFIG,
    grids,
    habitat_config,
    load,
)


class GrowthTableTest(unittest.TestCase):
    def setUp(self):
        self.habitat, self.time_grid, self.cell, _ = grids(load(CONSTANTS_CONFIG))

    def test_growth_table__number(self):
        table = growth_table(self.habitat, 1.5, self.time_grid, self.cell)
        self.assertEqual((32, 16), table.shape)
        self.assertTrue(np.all(table == 1.5))

    def test_growth_table__expression_text(self):
        table = growth_table(self.habitat, "1.5 + x", self.time_grid, self.cell)
        np.testing.assert_allclose(table[5], 1.5 + self.cell.nodes)

    def test_growth_table__interpolates_in_time(self):
        rows = np.vstack([np.zeros(16), np.ones(16)])
        table = growth_table(self.habitat, rows, self.time_grid, self.cell)
        np.testing.assert_allclose(table[[0, 8, 16, 24], 0], [0.0, 0.5, 1.0, 0.5])

    def test_growth_table__orbit(self):
        orbit = PeriodicOrbit(np.full((32, 16), 3.0), 1.0)
        table = growth_table(self.habitat, orbit, self.time_grid, self.cell)
        self.assertIs(orbit.values, table)

    def test_growth_table__wrong_shape(self):
        with self.assertRaises(InvalidInvocation):
            growth_table(self.habitat, np.ones((32, 8)), self.time_grid, self.cell)


class PrincipalSpectrumPointTest(unittest.TestCase):
    def setUp(self):
        self.habitat, self.time_grid, self.cell, self.kernel = grids(
            load(CONSTANTS_CONFIG)
        )

    def point(self, a_field, mu=0.0, xi=1):
        return principal_spectrum_point(
            self.habitat, xi, mu, a_field, self.time_grid, self.cell, self.kernel
        )

    def test_principal_spectrum_point__constant_growth_at_zero(self):
        result = self.point("a1")
        self.assertAlmostEqual(2.0, result.lam, places=12)
        self.assertLessEqual(result.iterations, 3)
        np.testing.assert_allclose(result.eigenfunction, 1.0)

    def test_principal_spectrum_point__twisted_uniform_kernel(self):
        for xi in (1, -1):
            self.assertAlmostEqual(math.sinh(1.0), self.point(1.0, 1.0, xi).lam, 10)

    def test_principal_spectrum_point__time_only_growth_is_its_mean(self):
        lam = self.point("1 + sin(2*pi*t/T)").lam
        self.assertAlmostEqual(1.0, lam, places=10)

    def test_principal_spectrum_point__space_heterogeneity(self):
        lam = self.point("1 + 0.5*cos(2*pi*x/p)").lam
        self.assertGreater(lam, 1.0)
        self.assertLess(lam, 1.5)

    def test_spectrum_point_value(self):
        self.assertEqual(
            self.point("a2", 0.5).lam,
            spectrum_point_value(
                self.habitat, 1, 0.5, "a2", self.time_grid, self.cell, self.kernel
            ),
        )

    def test_principal_eigenfunction_course__constant(self):
        course = principal_eigenfunction_course(self.point("a1"))
        self.assertEqual((32, 16), course.values.shape)
        np.testing.assert_allclose(course.values, 1.0, atol=1e-12)
        self.assertLess(course.drift, 1e-9)

    def test_principal_eigenfunction_course__seasonal(self):
        course = principal_eigenfunction_course(self.point("1 + sin(2*pi*t/T)"))
        expected = np.exp((1 - np.cos(2 * np.pi * self.time_grid.times)) / (2 * np.pi))
        np.testing.assert_allclose(
            course.values[:, 0], expected / expected.max(), rtol=0.05
        )
        self.assertLess(course.drift, 1e-9)


class SpectrumPropertiesTest(unittest.TestCase):
    def setUp(self):
        self.habitat, self.time_grid, self.cell, self.kernel = grids(
            load(SPACE_TIME_CONFIG)
        )

    def point(self, a_field, mu=0.0, xi=1):
        return principal_spectrum_point(
            self.habitat, xi, mu, a_field, self.time_grid, self.cell, self.kernel
        )

    def test_principal_spectrum_point__mirror_symmetry(self):
        seasonal = "2 + 0.5*sin(2*pi*t/T)"
        for mu in (0.25, 1.0, 3.0):
            forward = self.point(seasonal, mu, 1).lam
            backward = self.point(seasonal, mu, -1).lam
            reversed_rate = self.point(seasonal, -mu, 1).lam
            self.assertAlmostEqual(forward, backward, delta=1e-10)
            self.assertAlmostEqual(forward, reversed_rate, delta=1e-10)

    def test_principal_spectrum_point__monotone_in_growth(self):
        growth = growth_table(self.habitat, "a1", self.time_grid, self.cell)
        bump = 0.3 * np.cos(np.pi * self.cell.nodes / self.habitat.p) ** 2
        for xi, mu in ((1, 0.0), (1, 1.0), (-1, 2.0)):
            self.assertGreater(
                self.point(growth + bump, mu, xi).lam, self.point(growth, mu, xi).lam
            )

    def test_principal_spectrum_point__convex_in_mu(self):
        mus = 2.0 ** np.arange(-3, 4)
        lams = np.array([self.point(1.0, mu).lam for mu in mus])
        slopes = np.diff(lams) / np.diff(mus)
        self.assertGreaterEqual(np.diff(slopes).min(), -1e-8)

    def test_principal_spectrum_point__eigen_residual(self):
        for xi, mu in ((1, 0.0), (1, 1.0), (-1, 2.0)):
            result = self.point("a1", mu, xi)
            self.assertLess(result.residual, RESIDUAL_TOL)
            vector = result.eigenfunction
            self.assertEqual(1.0, vector.max())
            self.assertGreater(vector.min(), 0.0)
            monodromy = _period_map(result.spread, result.growth, self.time_grid.dt)
            rate = math.exp((result.lam - result.shift) * self.time_grid.T)
            residual = np.abs(monodromy @ vector - rate * vector).max()
            self.assertLess(residual, 1e-8)


class PeriodicAttractorTest(unittest.TestCase):
    def test_periodic_attractor__constants(self):
        habitat, time_grid, cell, kernel = grids(load(CONSTANTS_CONFIG))
        u_star = periodic_attractor(habitat, 1, time_grid, cell, kernel)
        v_star = periodic_attractor(habitat, 2, time_grid, cell, kernel)
        np.testing.assert_allclose(u_star.values, 2.0, atol=1e-12)
        np.testing.assert_allclose(v_star.values, 1.0, atol=1e-12)
        self.assertEqual(1.0, u_star.T)

    def test_periodic_attractor__seasonal(self):
        config = habitat_config(
            dict(CONSTANTS, a1="2 + sin(2*pi*t/T)"), grid={"nt": 64}
        )
        habitat, time_grid, cell, kernel = grids(load(config))
        u_star = periodic_attractor(habitat, 1, time_grid, cell, kernel)
        self.assertLess(u_star.drift, 1e-8)
        self.assertGreater(u_star.values.max() - u_star.values.min(), 0.1)
        np.testing.assert_allclose(u_star.values[:, 0], u_star.values[:, 7])
        self.assertAlmostEqual(2.0, float(u_star.values.mean()), delta=0.1)

    def test_periodic_attractor__hb1_violated(self):
        config = habitat_config(dict(CONSTANTS, a2="sin(2*pi*t/T) - 0.1"))
        habitat, time_grid, cell, kernel = grids(load(config))
        with self.assertRaises(HB1Violated) as context:
            periodic_attractor(habitat, 2, time_grid, cell, kernel)
        self.assertEqual(2, context.exception.species)

    def test_periodic_attractor__bad_species(self):
        habitat, time_grid, cell, kernel = grids(load(CONSTANTS_CONFIG))
        with self.assertRaises(InvalidInvocation):
            periodic_attractor(habitat, 3, time_grid, cell, kernel)


class NonhomogeneousPeriodicTest(unittest.TestCase):
    def setUp(self):
        self.habitat, self.time_grid, self.cell, self.kernel = grids(
            load(CONSTANTS_CONFIG)
        )

    def test_nonhomogeneous_periodic__constant_forcing(self):
        orbit = nonhomogeneous_periodic(
            self.habitat, 1, 0.0, -1.0, 2.0, self.time_grid, self.cell, self.kernel
        )
        np.testing.assert_allclose(orbit.values, 2.0, atol=1e-7)

    def test_nonhomogeneous_periodic__seasonal_forcing(self):
        orbit = nonhomogeneous_periodic(
            self.habitat,
            1,
            0.0,
            -1.0,
            "1 + sin(2*pi*t/T)",
            self.time_grid,
            self.cell,
            self.kernel,
        )
        omega = 2 * math.pi
        times = self.time_grid.times
        expected = 1 + (np.sin(omega * times) - omega * np.cos(omega * times)) / (
            1 + omega**2
        )
        np.testing.assert_allclose(orbit.values[:, 3], expected, atol=1e-6)

    def test_nonhomogeneous_periodic__growing_operator(self):
        with self.assertRaises(PreconditionLambdaNonnegative):
            nonhomogeneous_periodic(
                self.habitat, 1, 0.0, 1.0, 1.0, self.time_grid, self.cell, self.kernel
            )

    @patch("spreadcore.spectral._midpoint_table")
    def test_nonhomogeneous_periodic__not_positive(self, mock_midpoint):
        mock_midpoint.return_value = np.full((32, 16), -10.0)
        with self.assertRaises(NoConvergence) as context:
            nonhomogeneous_periodic(
                self.habitat, 1, 0.0, -1.0, 0.1, self.time_grid, self.cell, self.kernel
            )
        self.assertEqual(
            "positive nonhomogeneous periodic solution", context.exception.what
        )


class CheckHB1HB2Test(unittest.TestCase):
    def test_check_HB1_HB2__constants(self):
        habitat, time_grid, cell, kernel = grids(load(CONSTANTS_CONFIG))
        report = check_HB1_HB2(habitat, time_grid, cell, kernel)
        self.assertAlmostEqual(2.0, report.lambda_a1, places=10)
        self.assertAlmostEqual(1.0, report.lambda_a2, places=10)
        self.assertAlmostEqual(1.5, report.lambda_a1_c1v, places=8)
        self.assertAlmostEqual(-1.0, report.lambda_a2_b2u, places=8)
        self.assertAlmostEqual(-2.0, report.lambda_a1_2b1u, places=8)
        self.assertTrue(report.hb1)
        self.assertTrue(report.hb2)
        self.assertFalse(report.marginal)
        self.assertIsNone(report.sampled_stability)
        self.assertEqual("hb1", report.rows()[5][0])

    def test_check_HB1_HB2__no_persistence(self):
        config = habitat_config(dict(CONSTANTS, a1="-0.5"))
        habitat, time_grid, cell, kernel = grids(load(config))
        report = check_HB1_HB2(habitat, time_grid, cell, kernel)
        self.assertFalse(report.hb1)
        self.assertFalse(report.hb2)
        self.assertIsNone(report.lambda_a2_b2u)

    def test_check_HB1_HB2__marginal(self):
        config = habitat_config(dict(CONSTANTS, b2="0.5"))
        habitat, time_grid, cell, kernel = grids(load(config))
        with LogCapture(level=logging.WARNING) as log_capture:
            report = check_HB1_HB2(habitat, time_grid, cell, kernel)
        self.assertTrue(report.marginal)
        self.assertTrue(report.hb2)
        log_capture.check(
            (
                "spreadcore",
                "WARNING",
                f"(u*, 0) is neutrally stable: lambda_0 = {report.lambda_a2_b2u!r}",
            )
        )

    def test_check_HB1_HB2__second_species_invades(self):
        config = habitat_config(dict(CONSTANTS, b2="0.25"))
        habitat, time_grid, cell, kernel = grids(load(config))
        report = check_HB1_HB2(habitat, time_grid, cell, kernel)
        self.assertTrue(report.invasion)
        self.assertFalse(report.resistance)
        self.assertFalse(report.hb2)

    def test_sample_global_stability(self):
        habitat, time_grid, cell, kernel = grids(load(CONSTANTS_CONFIG))
        u_star = periodic_attractor(habitat, 1, time_grid, cell, kernel)
        v_star = periodic_attractor(habitat, 2, time_grid, cell, kernel)
        gap = sample_global_stability(
            habitat, u_star, v_star, time_grid, cell, kernel, samples=2, seed=3
        )
        self.assertLess(gap, 1e-6)
