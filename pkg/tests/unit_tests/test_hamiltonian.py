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
"""Unit tests for natural Hamiltonians, the Jacobi metric and brake orbits"""
import math
from unittest import TestCase
from unittest.mock import Mock, patch

import numpy as np
import pytest

from chordflow.domain import calibrate
from chordflow.hamiltonian import (
    NaturalHamiltonian,
    brake_pipeline,
    brake_symmetry_defect,
    dedup_orbits,
    ellipsoid_reference,
    hamilton_flow,
    hamilton_step,
    jacobi_metric,
    lift_to_energy,
    refine_brake_orbit,
    regular_value_check,
    rk4_hamilton_step,
    turning_point,
)
from chordflow.minimax import ChordResult, ExistenceReport
from chordflow.pathspace import segment_curve
from chordflow.utils.exceptions import (
    BadRhoException,
    EnergyDriftException,
    NoConvergenceException,
    ShootingDivergedException,
    ZeroLambdaException,
)

SQRT2 = math.sqrt(2.0)


def axis_chord(rho, E=1.0):
    """Chord of the ellipsoid well along the first axis at shrink rho"""
    a = math.sqrt(E - rho)
    curve = segment_curve((a, 0.0), (-a, 0.0), 32)
    return ChordResult(
        curve=curve,
        energy=1.0,
        length=2.0 * a,
        geodesic_residual=0.0,
        orthogonality_defect=0.0,
        boundary_points=(curve.nodes[0], curve.nodes[-1]),
    )


def flat(E=1.0):
    """Free particle, V ≡ 0"""
    return NaturalHamiltonian(
        dim=2,
        V_eval=lambda q: np.zeros(np.shape(q)[:-1]),
        dV_eval=np.zeros_like,
        E=E,
        name="flat",
    )


def doubled_kinetic():
    """H = |p|² + q², through a position dependent kinetic matrix a = 2I"""
    return NaturalHamiltonian(
        dim=1,
        V_eval=lambda q: np.sum(q**2, axis=-1),
        dV_eval=lambda q: 2.0 * q,
        E=1.0,
        a_upper=lambda q: np.broadcast_to(2.0 * np.eye(1), np.shape(q)[:-1] + (1, 1)).copy(),
        name="doubled",
    )


def christoffel_by_differences(field_, q, h=1e-5):
    dim = len(q)
    dg = np.empty((dim, dim, dim))
    for l in range(dim):
        e = np.zeros(dim)
        e[l] = h
        dg[l] = (field_.g(q + e) - field_.g(q - e)) / (2.0 * h)
    inverse = np.linalg.inv(field_.g(q))
    # Γ^k_ij = ½ g^{kl}(∂_i g_lj + ∂_j g_li − ∂_l g_ij)
    lowered = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
    return np.einsum("kl,lij->kij", inverse, lowered)


class TestFlow(TestCase):
    def test_harmonic_half_period(self):
        ham = NaturalHamiltonian.ellipsoid([1.0], 1.0)
        trajectory = hamilton_flow(ham, [1.0], [0.0], math.pi / SQRT2)
        self.assertAlmostEqual(trajectory.q[-1, 0], -1.0, places=8)
        self.assertAlmostEqual(trajectory.p[-1, 0], 0.0, places=7)
        self.assertLess(trajectory.drift, 1e-9)
        self.assertEqual(len(trajectory.times), len(trajectory.q))

    def test_free_particle(self):
        trajectory = hamilton_flow(flat(), [0.0, 0.0], [1.0, 2.0], 1.5)
        np.testing.assert_allclose(trajectory.q[-1], [1.5, 3.0], atol=1e-10)
        np.testing.assert_allclose(trajectory.p[-1], [1.0, 2.0], atol=1e-15)

    def test_equilibrium_stays(self):
        ham = NaturalHamiltonian.ellipsoid([1.0, SQRT2], 1.0)
        q, p = hamilton_step(ham, np.zeros(2), np.zeros(2), 0.1)
        np.testing.assert_array_equal(q, np.zeros(2))
        np.testing.assert_array_equal(p, np.zeros(2))

    def test_position_dependent_kinetic_uses_rk4(self):
        ham = doubled_kinetic()
        self.assertFalse(ham.constant_kinetic)
        q, p = hamilton_step(ham, np.array([1.0]), np.array([0.0]), 1e-2)
        q4, p4 = rk4_hamilton_step(ham, np.array([1.0]), np.array([0.0]), 1e-2)
        np.testing.assert_array_equal(q, q4)
        np.testing.assert_array_equal(p, p4)
        trajectory = hamilton_flow(ham, [1.0], [0.0], math.pi / 2.0)
        self.assertAlmostEqual(trajectory.q[-1, 0], -1.0, places=8)

    def test_drift_is_reported(self):
        ham = NaturalHamiltonian.ellipsoid([1.0], 1.0)
        with self.assertRaises(EnergyDriftException):
            hamilton_flow(ham, [1.0], [0.0], 10.0, step=1.0)

    def test_ellipsoid_potential(self):
        ham = NaturalHamiltonian.ellipsoid([1.0, SQRT2], 1.0, quartic=0.5)
        self.assertAlmostEqual(float(ham.potential(np.array([1.0, 1.0]))), 1.0 + 2.0 + 0.5 * 4.0)
        np.testing.assert_allclose(ham.grad_V(np.array([1.0, 0.0])), [2.0 + 2.0, 0.0])
        np.testing.assert_allclose(ham.hess_V(np.zeros(2)), np.diag([2.0, 4.0]))
        with self.assertRaises(ZeroLambdaException):
            NaturalHamiltonian.ellipsoid([1.0, 0.0], 1.0)

    def test_regular_value(self):
        self.assertTrue(regular_value_check(NaturalHamiltonian.ellipsoid([1.0, SQRT2], 1.0)))
        self.assertFalse(regular_value_check(NaturalHamiltonian.ellipsoid([1.0, 1.0], 0.0)))


class TestJacobiMetric(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.ham = NaturalHamiltonian.ellipsoid([1.0, SQRT2], 1.0)
        cls.field, cls.spec = jacobi_metric(cls.ham, 0.2)

    def test_metric(self):
        np.testing.assert_allclose(self.field.g(np.zeros(2)), np.eye(2))
        np.testing.assert_allclose(self.field.g(np.array([0.1, 0.0])), 0.99 * np.eye(2))

    def test_domain(self):
        self.assertAlmostEqual(float(self.spec.phi(np.array([math.sqrt(0.8), 0.0]))), 0.0)
        self.assertLess(float(self.spec.phi(np.zeros(2))), 0.0)

    def test_christoffel(self):
        q = np.array([0.3, -0.2])
        np.testing.assert_allclose(self.field.christoffel(q), christoffel_by_differences(self.field, q), atol=1e-6)

    def test_bad_rho(self):
        for rho in [0.0, 1.0, 1.5]:
            with self.assertRaises(BadRhoException):
                jacobi_metric(self.ham, rho)
        with self.assertRaises(BadRhoException):
            jacobi_metric(flat(), 0.5)

    def test_small_rho_is_concave(self):
        _, spec = jacobi_metric(self.ham, 0.05)
        calibrated, report = calibrate(spec, 200)
        self.assertTrue(report.is_strongly_concave)
        self.assertGreater(calibrated.delta0, 0.0)
        self.assertGreater(calibrated.K0, 0.0)


class TestEllipsoidReference(TestCase):
    def test_axis_orbits(self):
        reference = ellipsoid_reference([1.0, SQRT2], 1.0)
        self.assertTrue(reference.rational_ratios)
        first, second = reference.orbits
        self.assertAlmostEqual(first.amplitude, 1.0)
        self.assertAlmostEqual(second.amplitude, 1.0 / SQRT2)
        self.assertAlmostEqual(first.T, math.pi / SQRT2)
        self.assertAlmostEqual(second.T, math.pi / 2.0)
        np.testing.assert_allclose(first.q_traj[-1], [-1.0, 0.0], atol=1e-12)
        self.assertLess(first.residual_pT, 1e-12)

    def test_irrational_ratio(self):
        self.assertFalse(ellipsoid_reference([1.0, 2.0**0.25], 1.0).rational_ratios)

    def test_degenerate_inputs(self):
        self.assertEqual(ellipsoid_reference([1.0, SQRT2], 0.0).orbits, [])
        with self.assertRaises(ZeroLambdaException):
            ellipsoid_reference([0.0, 1.0], 1.0)


class TestBrakeOrbits(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.ham = NaturalHamiltonian.ellipsoid([1.0, SQRT2], 1.0)

    def test_turning_point(self):
        np.testing.assert_allclose(turning_point(self.ham, [0.0, 2.0]), [0.0, 1.0 / SQRT2], atol=1e-12)
        with self.assertRaises(ShootingDivergedException):
            turning_point(flat(), [1.0, 0.0])

    def test_lift_to_energy(self):
        np.testing.assert_allclose(lift_to_energy(self.ham, [0.5, 0.0]), [1.0, 0.0], atol=1e-10)
        with self.assertRaises(ShootingDivergedException):
            lift_to_energy(self.ham, [0.0, 0.0])

    def test_axis_orbit(self):
        orbit = refine_brake_orbit(self.ham, [1.0, 0.0])
        self.assertAlmostEqual(orbit.T, math.pi / SQRT2, places=6)
        np.testing.assert_allclose(orbit.launch, [1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(orbit.q_traj[-1], [-1.0, 0.0], atol=1e-6)
        self.assertLess(orbit.residual_pT, 1e-6)
        self.assertLess(orbit.drift, 1e-8)
        self.assertLess(brake_symmetry_defect(self.ham, orbit), 1e-6)
        out = orbit.to_dict()
        self.assertAlmostEqual(out["T"], orbit.T)
        self.assertEqual(len(out["launch"]), 2)

    def test_perturbed_launch_returns_to_the_axis(self):
        orbit = refine_brake_orbit(self.ham, [1.0, 0.05])
        self.assertAlmostEqual(orbit.T, math.pi / SQRT2, places=4)
        np.testing.assert_allclose(orbit.launch, [1.0, 0.0], atol=1e-4)
        self.assertLess(orbit.residual_pT, 1e-6)

    def test_dedup(self):
        reference = ellipsoid_reference([1.0, SQRT2], 1.0)
        first, second = reference.orbits
        self.assertEqual(len(dedup_orbits([first, second, first])), 2)
        self.assertEqual([o.T for o in dedup_orbits([first, second])], [second.T, first.T])

    @patch("chordflow.hamiltonian.brake.scan_normal_chords")
    @patch("chordflow.hamiltonian.brake.solve_existence")
    @patch("chordflow.hamiltonian.brake.calibrate")
    def test_pipeline_solves_the_smallest_shrink(self, mock_calibrate, mock_solve, mock_scan):
        mock_solve.return_value = Mock(level=0.3, chords=[axis_chord(0.05)])
        mock_scan.side_effect = [[], [axis_chord(0.1)]]
        report = brake_pipeline(self.ham, [0.1, 0.05], grid=8, n=32)
        self.assertEqual(mock_solve.call_count, 1)
        self.assertEqual(mock_calibrate.call_count, 1)
        self.assertEqual(len(report.orbits), 1)
        self.assertAlmostEqual(report.orbits[0].T, math.pi / SQRT2, places=6)
        coarse, fine = report.per_rho
        self.assertEqual([coarse.rho, fine.rho], [0.1, 0.05])
        self.assertFalse(fine.from_scan)
        self.assertEqual(fine.level, 0.3)
        self.assertTrue(coarse.from_scan)
        self.assertEqual(coarse.reused, 1)
        self.assertGreater(coarse.distances[0], fine.distances[0])
        self.assertTrue(report.monotone)

    @patch("chordflow.hamiltonian.brake.scan_normal_chords")
    @patch("chordflow.hamiltonian.brake.solve_existence")
    def test_pipeline_keeps_the_scan_chords_of_a_stalled_solve(self, mock_solve, mock_scan):
        stalled = Mock(spec=ExistenceReport, chords=[axis_chord(0.05)])
        mock_solve.side_effect = NoConvergenceException("deformation stalled", stalled)
        report = brake_pipeline(self.ham, [0.05], grid=8, n=32)
        mock_scan.assert_not_called()
        self.assertEqual(len(report.orbits), 1)
        self.assertTrue(report.per_rho[0].from_scan)
        self.assertIsNone(report.per_rho[0].level)

    @pytest.mark.slow
    def test_pipeline_finds_the_axis_orbits(self):
        report = brake_pipeline(self.ham, [0.1, 0.05], grid=16, n=32)
        periods = sorted(o.T for o in report.orbits)
        self.assertTrue(any(abs(T - math.pi / 2.0) < 1e-3 for T in periods))
        self.assertTrue(any(abs(T - math.pi / SQRT2) < 1e-3 for T in periods))
        self.assertEqual([r.rho for r in report.per_rho], [0.1, 0.05])
        self.assertIn("distances_monotone", report.to_dict())
