# Copyright 2024 The exclusion-lab authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.
"""
Unit test suite for the kernels package
"""
import unittest

import numpy as np
import pytest

from exclusion_lab.config import LabConfig
from exclusion_lab.errors import CapacityError, UsageError
from exclusion_lab.exclusion import RngStream
from exclusion_lab.kernels import (
    KernelEngine,
    StateIndex,
    Window,
    build_generator,
    enumerate_states,
    exclusion_kernel_exact,
    exclusion_kernel_mc,
    product_kernel_rw,
    srw_kernel,
    srw_kernel_1d,
    srw_kernel_1d_forward,
    torus_walk_spectral,
    torus_walk_table,
    uniformized_propagate,
    window_for,
)
from exclusion_lab.kernels.walk import periodic_kernel_1d
from exclusion_lab.lattice import Geometry, ParticleConfig

pytestmark = [pytest.mark.unit, pytest.mark.local]


class TestWalkKernel(unittest.TestCase):

    def test_bessel_against_forward_equation(self):
        for x, t in ((0, 1.0), (3, 2.0), (-2, 0.5)):
            self.assertAlmostEqual(srw_kernel_1d(x, t), srw_kernel_1d_forward(x, t), places=9)

    def test_known_value(self):
        self.assertAlmostEqual(srw_kernel_1d(0, 1.0), 0.30850832255, places=9)

    def test_mass(self):
        values = srw_kernel_1d(np.arange(-60, 61), 3.0)
        self.assertAlmostEqual(float(values.sum()), 1.0, places=12)

    def test_negative_time(self):
        self.assertRaises(UsageError, srw_kernel_1d, 0, -1.0)

    def test_forward_outside_radius(self):
        self.assertEqual(srw_kernel_1d_forward(80, 1.0), 0.0)

    def test_periodic_kernel_mass(self):
        for t, side in ((0.3, 7), (50.0, 4), (2.0, 3)):
            line = periodic_kernel_1d(t, side, 1e-17)
            self.assertAlmostEqual(float(line.sum()), 1.0, places=12)

    def test_periodic_kernel_equilibrates(self):
        line = periodic_kernel_1d(50.0, 4, 1e-17)
        np.testing.assert_allclose(line, 0.25, atol=1e-8)

    def test_table_against_spectral(self):
        for side, d, t in ((5, 2, 0.7), (8, 1, 3.0), (4, 3, 1.5)):
            g = Geometry.torus(d, side)
            np.testing.assert_allclose(torus_walk_table(t, g), torus_walk_spectral(t, g), atol=1e-12)

    def test_srw_kernel(self):
        g = Geometry.torus(2, 5)
        line = periodic_kernel_1d(1.0, 5, 1e-17)
        self.assertAlmostEqual(srw_kernel((0, 0), (4, 1), 1.0, g), line[4] * line[1])
        z = Geometry.infinite(2)
        self.assertAlmostEqual(srw_kernel((0, 0), (1, -1), 1.0, z), srw_kernel_1d(1, 1.0) ** 2)

    def test_product_kernel_allows_collisions(self):
        z = Geometry.infinite(1)
        self.assertAlmostEqual(product_kernel_rw([0, 0], [1, 1], 1.0, z), srw_kernel_1d(1, 1.0) ** 2)
        self.assertRaises(UsageError, product_kernel_rw, [0, 0], [1], 1.0, z)


class TestStateIndex(unittest.TestCase):

    def test_torus_enumeration(self):
        index = enumerate_states(2, Geometry.torus(1, 4))
        self.assertEqual(len(index), 12)
        np.testing.assert_array_equal(index.positions[0], [[0], [1]])
        np.testing.assert_array_equal(index.positions[-1], [[3], [2]])
        self.assertTrue(np.all(np.diff(index.codes) > 0))

    def test_lookup(self):
        g = Geometry.torus(2, 3)
        index = enumerate_states(2, g)
        for n in (0, 17, len(index) - 1):
            self.assertEqual(index.index_of(index.config(n)), n)
        self.assertEqual(int(index.lookup(np.array([[0, 0], [0, 0]]))), -1)
        self.assertRaises(UsageError, index.index_of, [[1, 1], [1, 1]])

    def test_capacity(self):
        with self.assertRaises(CapacityError) as raised:
            enumerate_states(2, Geometry.torus(1, 4), config=LabConfig(max_states=11))
        self.assertEqual(raised.exception.required, 12)
        self.assertEqual(raised.exception.budget, 11)

    def test_window(self):
        window = Window.around([[0], [1]], 2)
        self.assertEqual(window.shape, (6,))
        index = StateIndex(2, Geometry.infinite(1), window)
        self.assertEqual(len(index), 30)
        self.assertEqual(int(index.lookup(np.array([[-3], [0]]))), -1)
        self.assertGreaterEqual(int(index.lookup(np.array([[-2], [3]]))), 0)

    def test_window_rules(self):
        self.assertRaises(UsageError, StateIndex, 1, Geometry.infinite(1))
        self.assertRaises(UsageError, StateIndex, 1, Geometry.torus(1, 4), Window((0,), (1,)))
        self.assertRaises(UsageError, StateIndex, 0, Geometry.torus(1, 4))

    def test_window_for(self):
        self.assertEqual(window_for([[0, 0]], 0.0, 1, 2), Window((0, 0), (0, 0)))
        wide = window_for([[0], [3]], 1.0, 2, 1)
        self.assertLess(wide.lo[0], -10)
        self.assertGreater(wide.hi[0], 13)
        self.assertRaises(UsageError, window_for, [[0]], -1.0, 1, 1)


class TestGenerator(unittest.TestCase):

    def test_torus_generator(self):
        index = enumerate_states(2, Geometry.torus(2, 3))
        lmat = build_generator(index)
        dense = lmat.matrix.toarray()
        np.testing.assert_allclose(dense.sum(axis=1), 0.0, atol=1e-12)
        self.assertTrue(lmat.is_symmetric())
        off = dense - np.diag(np.diag(dense))
        self.assertTrue(set(np.unique(off)) <= {0.0, 1.0})
        self.assertEqual(lmat.uniform_rate, 8.0)

    def test_adjacent_pair_exit_rate(self):
        index = enumerate_states(2, Geometry.torus(1, 4))
        lmat = build_generator(index)
        self.assertEqual(lmat.exit_rates[index.index_of([[0], [1]])], 3.0)
        self.assertEqual(lmat.exit_rates[index.index_of([[0], [2]])], 4.0)

    def test_small_torus_rejected(self):
        index = enumerate_states(1, Geometry.torus(1, 2))
        self.assertRaises(UsageError, build_generator, index)

    def test_killed_window(self):
        index = StateIndex(1, Geometry.infinite(1), Window((0,), (4,)))
        lmat = build_generator(index)
        sums = lmat.matrix.toarray().sum(axis=1)
        np.testing.assert_allclose(sums, [-1.0, 0.0, 0.0, 0.0, -1.0])
        self.assertEqual(lmat.uniform_rate, 2.0)


class TestExactKernel(unittest.TestCase):

    def setUp(self):
        self.g = Geometry.torus(1, 6)
        self.engine = KernelEngine(2, self.g)

    def test_time_zero(self):
        row = self.engine.row([[0], [2]], 0.0)
        self.assertEqual(row.total(), 1.0)
        self.assertEqual(row.value([[0], [2]]), 1.0)

    def test_row_sum(self):
        engine = KernelEngine(2, Geometry.torus(2, 4))
        for t in (0.25, 1.0, 4.0):
            row = engine.row([[0, 0], [0, 1]], t)
            self.assertLess(abs(row.total() - 1.0), 1e-10)
            self.assertLess(row.tail, 1e-10)
            self.assertTrue(np.all(row.probabilities >= 0))

    def test_symmetry(self):
        matrix = self.engine.kernel_matrix(1.3)
        np.testing.assert_allclose(matrix, matrix.T, atol=1e-10)

    def test_chapman_kolmogorov(self):
        once = self.engine.kernel_matrix(0.7)
        twice = self.engine.kernel_matrix(1.4)
        self.assertLess(np.max(np.abs(twice - once @ once)), 1e-8)

    def test_one_particle_is_the_walk(self):
        g = Geometry.torus(2, 5)
        engine = KernelEngine(1, g)
        row = engine.row_vector([[0, 0]], 1.2)
        np.testing.assert_allclose(row, torus_walk_table(1.2, g).ravel(), atol=1e-8)

    def test_tagged_particle_is_a_walk(self):
        t = 0.9
        row = self.engine.row_vector([[1], [2]], t)
        first = self.engine.index.positions[:, 0, 0]
        marginal = np.bincount(first, weights=row, minlength=6)
        walk = periodic_kernel_1d(t, 6, 1e-17)
        np.testing.assert_allclose(marginal, np.roll(walk, 1), atol=1e-10)

    def test_exact_function_matches_engine(self):
        x = ParticleConfig([[0], [3]], self.g)
        row = exclusion_kernel_exact(x, 0.5, self.engine.index, self.engine.generator)
        np.testing.assert_allclose(row.probabilities, self.engine.row_vector(x, 0.5), atol=1e-14)
        self.assertEqual(row.base, x)
        self.assertRaises(UsageError, exclusion_kernel_exact, x, -0.5, self.engine.index, self.engine.generator)

    def test_propagate_several_times(self):
        start = np.zeros(len(self.engine))
        start[0] = 1.0
        rows = uniformized_propagate(self.engine.generator, start, [0.5, 2.0], 1e-12)
        np.testing.assert_allclose(rows[1], self.engine.row_vector(self.engine.index.config(0), 2.0), atol=1e-12)
        self.assertRaises(UsageError, uniformized_propagate, self.engine.generator, start, [-1.0], 1e-12)

    def test_windowed_walk(self):
        x = [[0]]
        window = window_for(x, 1.0, 1, 1)
        engine = KernelEngine(1, Geometry.infinite(1), window)
        row = engine.row(x, 1.0)
        self.assertAlmostEqual(row.value([[0]]), srw_kernel_1d(0, 1.0), places=9)
        self.assertAlmostEqual(row.value([[2]]), srw_kernel_1d(2, 1.0), places=9)
        self.assertLess(row.tail, 1e-9)

    def test_monte_carlo_agrees(self):
        g = Geometry.torus(1, 4)
        engine = KernelEngine(2, g)
        x = ParticleConfig([[0], [1]], g)
        exact = engine.row_vector(x, 0.5)
        targets = [engine.index.config(n) for n in range(len(engine))]
        estimates = exclusion_kernel_mc(x, 0.5, targets, 20000, RngStream(21))
        for estimate, value in zip(estimates, exact):
            self.assertLess(abs(estimate.value - value), 4.5 * max(estimate.stderr, 1e-3))


class TestKernelEngine(unittest.TestCase):

    def setUp(self):
        self.g = Geometry.torus(1, 5)
        self.engine = KernelEngine(2, self.g)

    def test_cached_rows(self):
        a = self.engine.row_vector([[0], [1]], 1.0)
        b = self.engine.row_vector([[0], [1]], 1.0)
        self.assertIs(a, b)
        self.assertFalse(a.flags.writeable)

    def test_rows_match_single_rows(self):
        times = [2.0, 0.5, 1.0]
        rows = self.engine.rows([[0], [2]], times)
        fresh = KernelEngine(2, self.g)
        for t, row in zip(times, rows):
            np.testing.assert_allclose(row, fresh.row_vector([[0], [2]], t), atol=1e-14)

    def test_no_cache_budget(self):
        engine = KernelEngine(2, self.g, config=LabConfig(row_cache_bytes=0))
        row = engine.row_vector([[0], [1]], 1.0)
        self.assertAlmostEqual(float(row.sum()), 1.0, places=10)

    def test_value(self):
        value = self.engine.value([[0], [1]], [[1], [0]], 1.0)
        self.assertAlmostEqual(value, self.engine.value([[1], [0]], [[0], [1]], 1.0), places=12)
        self.assertGreater(value, 0.0)

    def test_rw_values(self):
        x = [[0], [1]]
        values = self.engine.rw_values(x, 0.8)
        for n in (0, 5, 13):
            y = self.engine.index.positions[n]
            self.assertAlmostEqual(values[n], product_kernel_rw(x, y, 0.8, self.g), places=14)
        collided = self.engine.rw_values([[2], [2]], 0.8)
        self.assertEqual(collided.shape, (len(self.engine),))

    def test_rw_row_on_window(self):
        z = Geometry.infinite(1)
        engine = KernelEngine(2, z, Window((-3,), (3,)))
        values = engine.rw_row(ParticleConfig([[0], [1]], z), 0.5)
        n = engine.number_of([[1], [-1]])
        self.assertAlmostEqual(values[n], srw_kernel_1d(1, 0.5) * srw_kernel_1d(2, 0.5), places=14)

    def test_walk_table(self):
        np.testing.assert_allclose(self.engine.walk_table(1.0), periodic_kernel_1d(1.0, 5, 1e-17))

    def test_capacity(self):
        self.assertRaises(CapacityError, KernelEngine, 3, Geometry.torus(2, 8), config=LabConfig(max_states=1000))

    def test_config_is_copied(self):
        config = LabConfig()
        engine = KernelEngine(2, self.g, config=config)
        config.kernel_tolerance = 1.0
        self.assertEqual(engine.config.kernel_tolerance, 1e-12)

    def test_unknown_state(self):
        self.assertRaises(UsageError, self.engine.row, [[0], [0]], 1.0)
