"""Test for spreadcore.discretize module."""
import math
import unittest

import numpy as np
from scipy.integrate import quad

from spreadcore.discretize import (
    CellGrid,
    LineGrid,
    cell_operator_matrix,
    convolve_cell,
    convolve_line,
    sample_kernel,
    twist,
    wrap_to_cell,
)
from spreadcore.exceptions import GridTooCoarse, InvalidInvocation, NonFiniteWeight
from spreadcore.habitat import KernelSpec


class GridTest(unittest.TestCase):
    def test_cell_grid(self):
        cell = CellGrid(2.0, 16)
        self.assertEqual(0.125, cell.dx)
        self.assertEqual(16, cell.nodes.size)
        self.assertEqual(1.875, cell.nodes[-1])

    def test_cell_grid__too_few_nodes(self):
        with self.assertRaises(InvalidInvocation):
            CellGrid(1.0, 8)

    def test_line_grid(self):
        line = LineGrid(CellGrid(1.0, 16), 2.0)
        self.assertEqual(32, line.half_count)
        self.assertEqual(65, line.size)
        self.assertEqual(-2.0, line.nodes[0])
        self.assertEqual(0.0, line.nodes[32])

    def test_line_grid__not_a_multiple_of_the_period(self):
        with self.assertRaises(InvalidInvocation):
            LineGrid(CellGrid(1.0, 16), 2.5)

    def test_cell_index(self):
        line = LineGrid(CellGrid(1.0, 16), 1.0)
        forward = line.cell_index(1)
        backward = line.cell_index(-1)
        self.assertEqual(15, forward[15])
        self.assertEqual(0, forward[16])
        self.assertEqual(1, backward[15])
        self.assertEqual([15, 0, 1], list(line.cell_index(1, [-1, 0, 1])))


class SampleKernelTest(unittest.TestCase):
    def test_sample_kernel(self):
        kernel = sample_kernel(KernelSpec("uniform", 1.0), 0.25)
        self.assertEqual(7, kernel.weights.size)
        self.assertEqual(3, kernel.reach)
        self.assertAlmostEqual(1.0, kernel.total, places=14)
        np.testing.assert_array_equal(kernel.weights, kernel.weights[::-1])

    def test_sample_kernel__all_shapes_normalized(self):
        for shape in ("uniform", "triangle", "cosine-bump"):
            kernel = sample_kernel(KernelSpec(shape, 0.7), 0.05)
            self.assertAlmostEqual(1.0, kernel.total, places=14, msg=shape)
            self.assertTrue(np.all(kernel.weights > 0), shape)

    def test_sample_kernel__too_coarse(self):
        with self.assertRaises(GridTooCoarse):
            sample_kernel(KernelSpec("uniform", 1.0), 1.0)

    def test_full_weights(self):
        kernel = sample_kernel(KernelSpec("uniform", 1.0), 0.25)
        np.testing.assert_array_equal(kernel.weights, kernel.full_weights())


class TwistTest(unittest.TestCase):
    def test_twist__uniform_moment(self):
        kernel = sample_kernel(KernelSpec("uniform", 1.0), 0.25)
        for mu in (0.5, 1.0, 4.0):
            moment = math.sinh(mu) / mu
            total = twist(kernel, 1, mu).total
            self.assertLess(abs(total - moment) / moment, 1e-10, mu)

    def test_twist__triangle_moment(self):
        kernel = sample_kernel(KernelSpec("triangle", 1.0), 0.1)
        moment = 2 * (math.cosh(2.0) - 1) / 4.0
        self.assertLess(abs(twist(kernel, -1, 2.0).total - moment) / moment, 1e-10)

    def test_twist__cosine_bump_moment(self):
        spec = KernelSpec("cosine-bump", 0.5)
        kernel = sample_kernel(spec, 0.05)
        moment, _ = quad(
            lambda z: math.exp(-1.5 * z) * float(spec.density(z)), -0.5, 0.5
        )
        self.assertLess(abs(twist(kernel, 1, 1.5).total - moment) / moment, 1e-9)

    def test_twist__zero_rate_is_untwisted(self):
        kernel = sample_kernel(KernelSpec("uniform", 1.0), 0.25)
        np.testing.assert_array_equal(kernel.weights, twist(kernel, 1, 0.0).weights)

    def test_twist__mirror_directions(self):
        kernel = sample_kernel(KernelSpec("triangle", 1.0), 0.25)
        forward = twist(kernel, 1, 2.5).weights
        backward = twist(kernel, -1, 2.5).weights
        np.testing.assert_array_equal(forward, backward[::-1])

    def test_twist__decays_forward(self):
        kernel = twist(sample_kernel(KernelSpec("uniform", 1.0), 0.25), 1, 1.0)
        self.assertGreater(kernel.weights[0], kernel.weights[-1])

    def test_twist__overflow(self):
        kernel = sample_kernel(KernelSpec("uniform", 1.0), 0.25)
        with self.assertRaises(NonFiniteWeight):
            twist(kernel, 1, 1000.0)

    def test_twist__twice(self):
        kernel = twist(sample_kernel(KernelSpec("uniform", 1.0), 0.25), 1, 1.0)
        with self.assertRaises(InvalidInvocation):
            twist(kernel, 1, 1.0)

    def test_twist__bad_direction(self):
        kernel = sample_kernel(KernelSpec("uniform", 1.0), 0.25)
        with self.assertRaises(InvalidInvocation):
            twist(kernel, 0, 1.0)


class ConvolveTest(unittest.TestCase):
    def setUp(self):
        self.cell = CellGrid(1.0, 16)
        self.kernel = sample_kernel(KernelSpec("uniform", 1.0), self.cell.dx)

    def test_wrap_to_cell(self):
        wrapped = wrap_to_cell(twist(self.kernel, 1, 1.0), self.cell)
        self.assertTrue(wrapped.wrapped)
        self.assertEqual(16, wrapped.weights.size)
        self.assertAlmostEqual(math.sinh(1.0), wrapped.total, places=12)

    def test_cell_operator_matrix(self):
        wrapped = wrap_to_cell(self.kernel, self.cell)
        matrix = cell_operator_matrix(wrapped)
        np.testing.assert_allclose(matrix @ np.ones(16), np.ones(16), rtol=1e-14)
        f = np.sin(2 * np.pi * self.cell.nodes)
        np.testing.assert_allclose(
            matrix @ f, convolve_cell(wrapped, f), rtol=0, atol=1e-14
        )

    def test_cell_operator_matrix__needs_wrapped_kernel(self):
        with self.assertRaises(InvalidInvocation):
            cell_operator_matrix(self.kernel)

    def test_convolve_cell__field_size(self):
        wrapped = wrap_to_cell(self.kernel, self.cell)
        with self.assertRaises(InvalidInvocation):
            convolve_cell(wrapped, np.ones(8))

    def test_convolve_line__constant(self):
        f = np.full(65, 2.0)
        np.testing.assert_allclose(
            convolve_line(self.kernel, f, 2.0, 2.0), f, rtol=1e-14
        )

    def test_convolve_line__pads(self):
        f = np.zeros(65)
        result = convolve_line(self.kernel, f, 1.0, 0.0)
        self.assertGreater(result[0], 0.4)
        self.assertEqual(0.0, result[-1])
        self.assertEqual(0.0, result[self.kernel.reach])

    def test_convolve_line__matches_cell_for_periodic_fields(self):
        line = LineGrid(self.cell, 3.0)
        f_cell = 1.5 + np.cos(2 * np.pi * self.cell.nodes)
        f_line = f_cell[line.cell_index(1)]
        reach = self.kernel.reach
        half = line.half_count
        left = f_cell[line.cell_index(1, np.arange(-half - reach, -half))]
        right = f_cell[line.cell_index(1, np.arange(half + 1, half + reach + 1))]
        on_line = convolve_line(self.kernel, f_line, left, right)
        on_cell = convolve_cell(wrap_to_cell(self.kernel, self.cell), f_cell)
        np.testing.assert_allclose(on_line, on_cell[line.cell_index(1)], atol=1e-13)


class ConvolvePropertiesTest(unittest.TestCase):
    def setUp(self):
        self.cell = CellGrid(1.0, 16)
        kernel = sample_kernel(KernelSpec("triangle", 1.0), self.cell.dx)
        self.line_kernels = (kernel, twist(kernel, -1, 1.5))
        self.cell_kernels = tuple(
            wrap_to_cell(line_kernel, self.cell) for line_kernel in self.line_kernels
        )
        self.generator = np.random.default_rng(7)

    def fields(self, size):
        f = self.generator.uniform(0.0, 2.0, size)
        return f, f + self.generator.uniform(0.0, 1.0, size)

    def pads(self, kernel):
        return tuple(self.generator.uniform(0.0, 1.0, (2, kernel.reach)))

    def test_convolve_cell__linear(self):
        for _ in range(50):
            alpha, beta = self.generator.uniform(-2.0, 2.0, 2)
            f, g = self.generator.normal(size=(2, 16))
            for kernel in self.cell_kernels:
                np.testing.assert_allclose(
                    convolve_cell(kernel, alpha * f + beta * g),
                    alpha * convolve_cell(kernel, f) + beta * convolve_cell(kernel, g),
                    rtol=0,
                    atol=1e-12,
                )

    def test_convolve_line__linear(self):
        for _ in range(50):
            alpha, beta = self.generator.uniform(-2.0, 2.0, 2)
            f, g = self.generator.normal(size=(2, 33))
            for kernel in self.line_kernels:
                (f_left, g_left), (f_right, g_right) = (
                    self.generator.normal(size=(2, kernel.reach)) for _ in range(2)
                )
                combined = convolve_line(
                    kernel,
                    alpha * f + beta * g,
                    alpha * f_left + beta * g_left,
                    alpha * f_right + beta * g_right,
                )
                np.testing.assert_allclose(
                    combined,
                    alpha * convolve_line(kernel, f, f_left, f_right)
                    + beta * convolve_line(kernel, g, g_left, g_right),
                    rtol=0,
                    atol=1e-12,
                )

    def test_convolve_cell__positive_and_monotone(self):
        for _ in range(50):
            f, g = self.fields(16)
            f[self.generator.integers(0, 16, 4)] = 0.0
            for kernel in self.cell_kernels:
                low, high = convolve_cell(kernel, f), convolve_cell(kernel, g)
                self.assertGreaterEqual(low.min(), 0.0)
                self.assertGreaterEqual((high - low).min(), -1e-14)

    def test_convolve_line__positive_and_monotone(self):
        for _ in range(50):
            f, g = self.fields(33)
            f[self.generator.integers(0, 33, 8)] = 0.0
            for kernel in self.line_kernels:
                left, right = self.pads(kernel)
                low = convolve_line(kernel, f, left, right)
                high = convolve_line(kernel, g, left + 0.5, right)
                self.assertGreaterEqual(low.min(), 0.0)
                self.assertGreaterEqual((high - low).min(), -1e-14)
