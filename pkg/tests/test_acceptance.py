"""Desk-scale acceptance runs; set SPREADCORE_ACCEPTANCE=1 to enable them."""
import asyncio
import io
import math
import os
import tempfile
import unittest

from mock import patch
from scipy.integrate import quad

from spreadcore.cli import main
from spreadcore.const import C0_TOL
from spreadcore.sessions import Session, sweep
from spreadcore.speeds import single_species_speed, supersolution_residual

from .conftest import (
    ACCEPTANCE,
    BALANCED_COMPETITION,
    CONSTANTS,
    SPACE_TIME,
    grids,
    habitat_config,
    load,
)

FINE_GRID = {"nt": 64, "nx": 64, "check_nt": 64, "check_nx": 64}
FRONT_GRID = {"nt": 32, "nx": 32, "check_nt": 32, "check_nx": 32}
LONG_RUN = {"L": 300, "t_end": 200}


def within(estimate, target, relative=0.05, absolute=0.02):
    return abs(estimate - target) <= relative * abs(target) + absolute


@unittest.skipUnless(ACCEPTANCE, "set SPREADCORE_ACCEPTANCE=1 to run")
class SpectralOracleTest(unittest.TestCase):
    def test_constant_growth_matches_kernel_moments(self):
        config = load(habitat_config(dict(CONSTANTS, a1="1"), grid=FINE_GRID))
        with Session(config) as current:
            for mu in (0.0, 0.5, 1.0, 2.0, 4.0):
                moment, _ = quad(lambda z: 0.5 * math.exp(-mu * z), -1.0, 1.0)
                lam = current.principal_point(1, mu, "a1").lam
                self.assertAlmostEqual(moment, lam, delta=2e-3)

    def test_single_species_speed(self):
        config = load(habitat_config(dict(CONSTANTS, a1="1"), grid=FINE_GRID))
        habitat, time_grid, cell, kernel = grids(config)
        result = single_species_speed(habitat, 1, 1, time_grid, cell, kernel)
        self.assertAlmostEqual(0.9055, result.c_star, delta=5e-3)
        self.assertAlmostEqual(1.9150, result.mu_star, delta=5e-2)

    def test_grid_refinement(self):
        speeds = []
        for grid in ({"nt": 32, "nx": 32}, {"nt": 64, "nx": 64}):
            config = load(habitat_config(SPACE_TIME, params={"eps": 0.3}, grid=grid))
            with Session(config) as current:
                speeds.append(current.speed(1).c_star)
        self.assertLess(abs(speeds[0] - speeds[1]), 1e-2)


@unittest.skipUnless(ACCEPTANCE, "set SPREADCORE_ACCEPTANCE=1 to run")
class FrontAcceptanceTest(unittest.TestCase):
    def test_constants_are_linearly_determinate(self):
        config = load(habitat_config(grid=FRONT_GRID, run=LONG_RUN))
        with Session(config) as current:
            report = current.determinacy(1)
        self.assertEqual("determinate", report.verdict)
        c_bar = report.speed.c_star
        self.assertTrue(within(report.interval.c_low_hat, c_bar))
        self.assertTrue(within(report.interval.c_high_hat, c_bar))
        self.assertLess(report.behind_gap, 1e-2)

    def test_balanced_competition_is_linearly_determinate(self):
        config = load(
            habitat_config(BALANCED_COMPETITION, grid=FRONT_GRID, run=LONG_RUN)
        )
        with Session(config) as current:
            report = current.determinacy(1)
        self.assertEqual("determinate", report.verdict)
        self.assertTrue(report.stability.marginal)
        self.assertTrue(all(check.holds for check in report.lemma42))
        c_bar = report.speed.c_star
        self.assertTrue(within(report.interval.c_low_hat, c_bar))
        self.assertTrue(within(report.interval.c_high_hat, c_bar))

    def test_space_time_habitat_is_sandwiched(self):
        config = load(
            habitat_config(
                SPACE_TIME, params={"eps": 0.3}, grid=FRONT_GRID, run=LONG_RUN
            )
        )
        with Session(config) as current:
            run = current.front(1)
            c_bar = current.speed(1).c_star
            c0 = current.supersolution_bound(1)
        self.assertGreaterEqual(
            run.interval.c_low_hat, c_bar - 0.05 * abs(c_bar) - 0.02
        )
        self.assertLessEqual(run.interval.c_high_hat, c0 + 0.02)

    def test_time_periodic_speed_is_independent_of_initial_data(self):
        config = load(
            habitat_config(
                dict(CONSTANTS, a1="2 + 0.5*sin(2*pi*t/T)"),
                grid=FRONT_GRID,
                run=LONG_RUN,
            )
        )
        with Session(config) as current:
            first = current.front(1, s0=-150.0, delta=0.5).interval
            second = current.front(1, s0=-120.0, delta=0.2).interval
        self.assertTrue(
            within(second.c_high_hat, first.c_high_hat, relative=0.02, absolute=0)
        )
        for estimate in (first, second):
            self.assertTrue(
                within(estimate.c_low_hat, estimate.c_high_hat, absolute=0)
            )


@unittest.skipUnless(ACCEPTANCE, "set SPREADCORE_ACCEPTANCE=1 to run")
class SupersolutionAcceptanceTest(unittest.TestCase):
    def test_bound_dominates_linear_speed(self):
        for config in (
            habitat_config(grid=FRONT_GRID),
            habitat_config(SPACE_TIME, params={"eps": 0.3}, grid=FRONT_GRID),
        ):
            loaded = load(config)
            with Session(loaded) as current:
                c_bar = current.speed(1).c_star
                c0 = current.supersolution_bound(1)
                u_star, v_star = current.orbit(1), current.orbit(2)
                habitat = current.habitat
                worst = min(
                    supersolution_residual(
                        habitat,
                        1,
                        c0 + 1.0,
                        u_star,
                        v_star,
                        current.time_grid,
                        current.cell,
                        current.kernel,
                        phase=j * habitat.p / 8,
                    )
                    for j in range(8)
                )
            self.assertGreaterEqual(c0, c_bar)
            self.assertGreaterEqual(worst, -C0_TOL)


@unittest.skipUnless(ACCEPTANCE, "set SPREADCORE_ACCEPTANCE=1 to run")
class SweepAcceptanceTest(unittest.TestCase):
    def test_sweep_does_not_depend_on_jobs(self):
        config = habitat_config(run={"samples": 2})
        values = [1.0, 1.2, 1.5, 2.0]
        inline = asyncio.run(sweep(config, "b2", values, jobs=1))
        pooled = asyncio.run(sweep(config, "b2", values, jobs=4))
        self.assertEqual(inline, pooled)


@unittest.skipUnless(ACCEPTANCE, "set SPREADCORE_ACCEPTANCE=1 to run")
class OutputDeterminismTest(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.directory.cleanup()

    def outputs(self, command, config, jobs, *argv):
        base = os.path.join(self.directory.name, f"{command}-{jobs}")
        os.makedirs(base)
        path = os.path.join(base, "habitat.ini")
        with open(path, "w") as stream:
            stream.write(config)
        out = os.path.join(base, "out")
        with patch("sys.stdout", new_callable=io.StringIO):
            with patch("sys.stderr", new_callable=io.StringIO):
                main(
                    [command, "--config", path, "--out", out, "--jobs", str(jobs)]
                    + list(argv)
                )
        contents = {}
        for name in sorted(os.listdir(out)):
            with open(os.path.join(out, name), "rb") as stream:
                contents[name] = stream.read()
        return contents

    def assert_same_outputs(self, command, config, *argv):
        inline = self.outputs(command, config, 1, *argv)
        pooled = self.outputs(command, config, 8, *argv)
        self.assertTrue(inline)
        self.assertEqual(inline, pooled)

    def test_speed_outputs(self):
        config = habitat_config(dict(CONSTANTS, a1="1"), grid=FINE_GRID)
        self.assert_same_outputs("speed", config)

    def test_determinacy_outputs(self):
        self.assert_same_outputs(
            "determinacy", habitat_config(grid=FRONT_GRID, run=LONG_RUN)
        )

    def test_front_outputs(self):
        config = habitat_config(
            SPACE_TIME, params={"eps": 0.3}, grid=FRONT_GRID, run=LONG_RUN
        )
        self.assert_same_outputs("front", config)

    def test_sweep_outputs(self):
        config = habitat_config(run={"samples": 2})
        self.assert_same_outputs(
            "sweep", config, "--parameter", "b2", "--values", "1,1.2,1.5,2"
        )
