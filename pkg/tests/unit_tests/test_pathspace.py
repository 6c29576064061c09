# Copyright 2025 American Express Travel Related Services Company, Inc.
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
# in compliance with the License. You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software distributed under the License
# is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
# or implied. See the License for the specific language governing permissions and limitations under
# the License.
"""Unit tests for discrete curves, maximal intervals and the path family"""
import math
from unittest import TestCase

import numpy as np

from chordflow.domain import euclidean_disk, radial_boundary_points, sphere_cap
from chordflow.pathspace import (
    ChordGenerator,
    DiscreteCurve,
    PathFamily,
    check_in_M0,
    compute_M0,
    constant_curve,
    depth_length_check,
    energy,
    energy_gradient,
    evaluate,
    h1_norm,
    in_M,
    maximal_intervals,
    node_runs,
    portion_curve,
    refine_crossings,
    reverse,
    segment_curve,
    speed_integral,
    sup_norm,
)
from chordflow.utils.exceptions import (
    EmptyFamilyException,
    EmptyIntervalException,
    NotInM0Exception,
    PreconditionUnmetException,
)

from .setup_utils import cusp_curve, ellipse, meridian_curve, tri_wedge

RIM = math.sqrt(3.0)


def calibrated_cap():
    return sphere_cap().with_constants(delta0=0.9 * math.pi / 6.0, K0=1.05)


class TestDiscreteCurve(TestCase):
    """The curve container and its norms"""

    def test_validation(self):
        with self.assertRaises(ValueError):
            DiscreteCurve(np.zeros((2, 2)))
        with self.assertRaises(ValueError):
            DiscreteCurve(np.zeros(5))
        x = segment_curve([0.0, 0.0], [1.0, 0.0], 4)
        with self.assertRaises(ValueError):
            x.nodes[0, 0] = 3.0

    def test_grid(self):
        x = segment_curve([0.0, 0.0], [1.0, 0.0], 8)
        self.assertEqual(x.n, 8)
        self.assertEqual(x.index(0.25), 2)
        with self.assertRaises(ValueError):
            x.index(0.3)
        with self.assertRaises(EmptyIntervalException):
            x.span(0.5, 0.5)

    def test_norms(self):
        x = segment_curve([0.0, 0.0], [1.0, 0.0], 4)
        self.assertAlmostEqual(h1_norm(x), 1.0)
        self.assertAlmostEqual(sup_norm(x), 1.0)
        self.assertAlmostEqual(energy(x), 0.5)
        self.assertAlmostEqual(energy(x, 0.0, 0.5), 0.25)
        self.assertAlmostEqual(speed_integral(x), 1.0)

    def test_energy_gradient(self):
        x = DiscreteCurve([[0.0, 0.0], [0.5, 0.5], [1.0, 0.0]])
        grad = energy_gradient(x)
        np.testing.assert_allclose(grad[1], [0.0, 2.0])
        np.testing.assert_allclose(grad, energy_gradient(x, field_=euclidean_disk().field))

    def test_meridian_energy(self):
        x = meridian_curve()
        self.assertAlmostEqual(energy(x, field_=sphere_cap().field), 8.0 * math.pi**2 / 9.0, delta=1e-2)

    def test_reverse_and_equality(self):
        x = cusp_curve()
        self.assertEqual(reverse(reverse(x)), x)
        self.assertNotEqual(reverse(x), x)
        self.assertEqual(hash(x), hash(DiscreteCurve(x.nodes.copy())))
        self.assertAlmostEqual(energy(reverse(x)), energy(x))
        self.assertTrue(constant_curve([1.0, 2.0], 8).is_constant())
        self.assertEqual(x.to_list()[:3], [128, 0.0, -0.5])

    def test_evaluate(self):
        x = segment_curve([0.0, 0.0], [2.0, 2.0], 4)
        np.testing.assert_allclose(evaluate(x, [0.0, 0.3, 1.0, 1.5]), [[0, 0], [0.6, 0.6], [2, 2], [2, 2]])


class TestIntervals(TestCase):
    """Maximal intervals, crossings and portions"""

    def setUp(self):
        self.spec = euclidean_disk()
        self.x = segment_curve([-1.5, 0.0], [1.5, 0.0], 16)

    def test_node_runs(self):
        phi = np.array([1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0, -1.0])
        self.assertEqual(node_runs(phi, 0.0), [(1, 2), (6, 7)])

    def test_crossing_segment(self):
        (record,) = maximal_intervals(self.x, self.spec)
        self.assertEqual((record.i, record.j), (3, 13))
        self.assertEqual(record.boundary_flags, (False, False))
        self.assertFalse(record.on_boundary)
        self.assertAlmostEqual(record.crossings[0], 1.0 / 6.0)
        self.assertAlmostEqual(record.crossings[1], 5.0 / 6.0)

    def test_cusp_curve_is_one_interval(self):
        (record,) = maximal_intervals(cusp_curve(), tri_wedge())
        self.assertEqual((record.a, record.b), (0.0, 1.0))
        self.assertTrue(record.on_boundary)

    def test_interior_endpoint(self):
        with self.assertRaises(NotInM0Exception):
            maximal_intervals(segment_curve([0.0, 0.0], [1.5, 0.0], 16), self.spec)
        with self.assertRaises(NotInM0Exception):
            check_in_M0(segment_curve([0.0, 0.0], [1.5, 0.0], 16), self.spec)

    def test_refine_crossings(self):
        y = refine_crossings(self.x, self.spec)
        np.testing.assert_allclose(y.nodes[3], [-1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(y.nodes[13], [1.0, 0.0], atol=1e-12)
        np.testing.assert_array_equal(y.nodes[4:13], self.x.nodes[4:13])
        self.assertIs(refine_crossings(y, self.spec), y)

    def test_portion_curve(self):
        (record,) = maximal_intervals(self.x, self.spec)
        portion = portion_curve(self.x, self.spec, record)
        self.assertEqual(portion.n, 16)
        expected = np.stack([np.linspace(-1.0, 1.0, 17), np.zeros(17)], axis=1)
        np.testing.assert_allclose(portion.nodes, expected, atol=1e-9)


class TestPathFamily(TestCase):
    """Chord generator, M₀ and the depth-length bound"""

    @classmethod
    def setUpClass(cls):
        cls.spec = calibrated_cap()
        cls.generator = ChordGenerator(cls.spec, 32)

    def test_generator_needs_shell(self):
        with self.assertRaises(PreconditionUnmetException):
            ChordGenerator(sphere_cap())

    def test_generated_chord(self):
        A, B = np.array([RIM, 0.0]), np.array([0.0, RIM])
        x = self.generator(A, B)
        np.testing.assert_array_equal(x.nodes[0], A)
        np.testing.assert_array_equal(x.nodes[-1], B)
        self.assertLessEqual(float(np.max(self.spec.phi(x.nodes))), self.spec.boundary_tol)
        self.assertLess(float(np.max(self.spec.phi(x.nodes[1:-1]))), 0.0)
        self.assertEqual(self.generator(B, A), reverse(x))
        self.assertTrue(self.generator(A, A).is_constant())

    def test_family(self):
        grid = np.array([[RIM, 0.0], [0.0, RIM], [-RIM, 0.0]])
        family = PathFamily.build(self.generator, 3, grid=grid)
        self.assertEqual(len(family.pairs()), 9)
        self.assertEqual(family.curve(2, 0), reverse(family.curve(0, 2)))
        self.assertGreater(family.M0, 0.0)
        integrals = [speed_integral(c, field_=self.spec.field) for c in family.curves.values()]
        self.assertAlmostEqual(family.M0, max(integrals))
        self.assertTrue(in_M(family.curve(0, 1), family, self.spec))
        with self.assertRaises(EmptyFamilyException):
            compute_M0(PathFamily(grid=grid))

    def test_family_on_an_even_grid(self):
        # evenly spaced directions come in antipodal pairs whose radial image crosses the center
        family = PathFamily.build(self.generator, 4)
        self.assertEqual(len(family.grid), 4)
        self.assertEqual(len(family.pairs()), 16)
        through = family.curve(0, 2)
        self.assertTrue(np.all(np.isfinite(through.nodes)))
        self.assertLess(float(np.min(np.linalg.norm(through.nodes, axis=1))), 0.05)
        for curve in family.curves.values():
            self.assertTrue(np.all(np.isfinite(curve.nodes)))
            self.assertLessEqual(float(np.max(self.spec.phi(curve.nodes))), self.spec.boundary_tol)

    def test_depth_length_check(self):
        x = meridian_curve()
        check = depth_length_check(x, self.spec, 0.0, 1.0, 0.5)
        self.assertTrue(check.holds)
        self.assertEqual(check.lhs, 1.0)
        expected = 0.25 / 1.05**2 / speed_integral(x, field_=self.spec.field)
        self.assertAlmostEqual(check.rhs, expected)
        with self.assertRaises(PreconditionUnmetException):
            depth_length_check(x, self.spec, 0.0, 1.0, 5.0)


def inward_curve(spec, rng, n=48):
    """Random curve on [i/n, j/n] from a boundary point towards the center, constant outside.

    Returns the curve with i and j."""
    i = int(rng.integers(0, 16))
    j = int(rng.integers(i + 8, n + 1))
    angle = rng.uniform(0.0, 2.0 * np.pi)
    direction = np.array([math.cos(angle), math.sin(angle)])
    start = radial_boundary_points(spec, direction[None])[0]
    steps = rng.uniform(0.5, 1.0, j - i)
    t = np.concatenate([[0.0], np.cumsum(steps) / np.sum(steps)]) * rng.uniform(0.1, 0.9)
    wiggle = rng.uniform(-0.2, 0.2) * np.sin(np.pi * np.linspace(0.0, 1.0, j - i + 1))
    normal = np.array([-direction[1], direction[0]])
    path = start + t[:, None] * (spec.center - start) + wiggle[:, None] * normal
    nodes = np.vstack([np.repeat(start[None], i, axis=0), path, np.repeat(path[-1:], n - j, axis=0)])
    return DiscreteCurve(nodes), i, j


class TestDepthLengthInequality(TestCase):
    """Reaching depth δ from the boundary costs b − a ≥ δ²/K₀² · (∫g(ẋ, ẋ))⁻¹"""

    def check_random_triples(self, spec, seed, count=1000):
        rng = np.random.default_rng(seed)
        for _ in range(count):
            x, i, j = inward_curve(spec, rng)
            depth = -float(np.min(spec.phi(x.nodes[i : j + 1])))
            self.assertGreater(depth, 0.0)
            check = depth_length_check(x, spec, i / x.n, j / x.n, rng.uniform(0.0, 1.0) * depth)
            self.assertTrue(check.holds, f"{check.lhs} < {check.rhs} on [{i}, {j}]")

    def test_cap(self):
        self.check_random_triples(calibrated_cap(), 31)

    def test_disk(self):
        # |∇φ| = 1, so K₀ = 1.05 bounds it with the usual margin
        self.check_random_triples(euclidean_disk().with_constants(K0=1.05), 32)

    def test_ellipse(self):
        self.check_random_triples(ellipse().with_constants(K0=1.05), 33)
