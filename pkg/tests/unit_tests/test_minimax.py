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
"""Unit tests for the functional over homotopy states, chord extraction and the level search"""
import math
from unittest import TestCase
from unittest.mock import patch

import numpy as np
import pytest

from chordflow.domain import euclidean_disk, radial_boundary_points, sphere_cap
from chordflow.flows import build_ledger, first_deformation
from chordflow.minimax import (
    ChordResult,
    ExistenceReport,
    StateTransition,
    chord_distance,
    chord_from_report,
    concatenate,
    dedup_chords,
    functional_F,
    h1_admissible,
    identity_transition,
    is_equivariant,
    polish_chord,
    same_state,
    scan_normal_chords,
    solve_existence,
    transition,
)
from chordflow.pathspace import segment_curve
from chordflow.utils.exceptions import (
    CurveLeftMException,
    MismatchException,
    NoConvergenceException,
    NotConcaveException,
    OGCDetectedException,
    StalledException,
)
from chordflow.utils.run_config import BudgetsConfig

from .setup_utils import ellipse, strip, strip_state

AXES = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
CAP_LENGTH = 4.0 * math.pi / 3.0


def fake_chord(p, q, value):
    curve = segment_curve(p, q, 16)
    return ChordResult(
        curve=curve,
        energy=value,
        length=math.sqrt(2.0 * value),
        geodesic_residual=0.0,
        orthogonality_defect=0.0,
        boundary_points=(curve.nodes[0], curve.nodes[-1]),
    )


class TestTransitions(TestCase):
    def setUp(self):
        self.first = strip_state()
        self.second = self.first.copy()
        self.second.update((0, 1), segment_curve((0.0, 0.0), (0.1, -1.0), 32))
        self.second.tag("A")
        self.second.iterations = 2
        self.third = self.second.copy()
        self.third.update((0, 1), segment_curve((0.0, 0.0), (0.2, -1.0), 32))
        self.third.tag("B")
        self.third.iterations = 8

    def test_transition_reads_the_tag_log(self):
        h = transition(self.first, self.second)
        self.assertEqual(h.tags, ("A",))
        self.assertEqual(h.duration, 2.0)
        self.assertEqual(transition(self.second, self.third).tags, ("B",))

    def test_identity_is_neutral(self):
        h = transition(self.first, self.second)
        joined = concatenate(identity_transition(self.first), h)
        self.assertEqual(joined.tags, h.tags)
        self.assertEqual(joined.duration, h.duration)
        self.assertEqual(joined.junctions, ())
        self.assertIs(joined.final, self.second)
        joined = concatenate(h, identity_transition(self.second))
        self.assertEqual(joined.duration, h.duration)

    def test_junctions_follow_durations(self):
        h1 = StateTransition(self.first, self.second, ("A",), 1.0)
        h2 = StateTransition(self.second, self.third, ("B",), 3.0)
        joined = concatenate(h1, h2)
        self.assertEqual(joined.tags, ("A", "B"))
        self.assertEqual(joined.duration, 4.0)
        self.assertEqual(joined.junctions, (0.25,))
        self.assertIs(joined.initial, self.first)

    def test_mismatch(self):
        h1 = StateTransition(self.first, self.second, ("A",), 1.0)
        h2 = StateTransition(self.second, self.third, ("B",), 3.0)
        with self.assertRaises(MismatchException):
            concatenate(h2, h1)

    def test_same_state(self):
        self.assertTrue(same_state(self.first, self.first.copy()))
        self.assertFalse(same_state(self.first, self.second))


class TestFunctional(TestCase):
    def test_value(self):
        self.assertAlmostEqual(functional_F(strip_state(), strip()), 0.5)

    def test_constant_state(self):
        state = strip_state()
        for key in [(0, 1), (1, 0)]:
            del state.current[key]
        self.assertEqual(functional_F(state, strip()), 0.0)

    def test_energy_cap(self):
        with self.assertRaises(CurveLeftMException):
            functional_F(strip_state(), strip(), M0=0.4)
        self.assertAlmostEqual(functional_F(strip_state(), strip(), M0=0.6), 0.5)

    def test_curve_leaving_M0(self):
        state = strip_state()
        state.update((0, 1), segment_curve((0.0, -0.5), (0.0, -1.0), 32))
        with self.assertRaises(CurveLeftMException):
            functional_F(state, strip())

    def test_equivariance(self):
        state = strip_state()
        self.assertTrue(is_equivariant(state))
        state.current[(1, 0)] = segment_curve((0.0, -1.0), (0.1, 0.0), 32)
        self.assertFalse(is_equivariant(state))

    def test_admission(self):
        spec = strip()
        check = h1_admissible(strip_state(), spec, build_ledger(spec, 2.0))
        self.assertTrue(check.admissible)
        self.assertTrue(check.constant_seeds_fixed)


class TestChords(TestCase):
    def test_ellipse_scan_finds_both_axes(self):
        spec = ellipse()
        angles = np.pi * np.arange(16) / 8.0
        points = radial_boundary_points(spec, np.stack([np.cos(angles), np.sin(angles)], axis=1))
        chords = dedup_chords(scan_normal_chords(spec, points, n=32))
        self.assertEqual(len(chords), 2)
        self.assertAlmostEqual(chords[0].energy, 2.0, places=6)
        self.assertAlmostEqual(chords[1].energy, 8.0, places=6)
        for chord in chords:
            self.assertLess(chord.orthogonality_defect, 1e-8)
            self.assertLess(chord.geodesic_residual, 1e-6)
            self.assertFalse(chord.is_wogc)

    def test_ellipse_polish_reaches_an_axis(self):
        spec = ellipse()
        A0 = radial_boundary_points(spec, np.array([[math.cos(0.3), math.sin(0.3)]]))[0]
        chord = polish_chord(spec, A0, n=32)
        self.assertLess(min(abs(chord.length - 4.0), abs(chord.length - 2.0)), 1e-4)
        self.assertLess(chord.orthogonality_defect, 1e-4)

    def test_cap_scan(self):
        spec = sphere_cap()
        chords = scan_normal_chords(spec, radial_boundary_points(spec, AXES), n=64)
        self.assertEqual(len(chords), 4)
        for chord in chords:
            self.assertAlmostEqual(chord.length, CAP_LENGTH, places=6)
            self.assertAlmostEqual(chord.energy, 8.0 * math.pi**2 / 9.0, places=5)
        self.assertEqual(len(dedup_chords(chords)), 2)

    def test_cap_polish(self):
        spec = sphere_cap()
        chord = polish_chord(spec, radial_boundary_points(spec, AXES[:1])[0], n=64)
        self.assertAlmostEqual(chord.length, CAP_LENGTH, places=6)
        self.assertLess(chord.orthogonality_defect, 1e-8)
        np.testing.assert_allclose(chord.boundary_points[1], [-math.sqrt(3.0), 0.0], atol=1e-6)
        out = chord.to_dict()
        self.assertEqual(len(out["nodes"]), 65)
        self.assertAlmostEqual(out["length"], CAP_LENGTH, places=6)

    def test_chord_from_detected_report(self):
        spec = strip()
        with self.assertRaises(OGCDetectedException) as ctx:
            first_deformation(strip_state(), spec, build_ledger(spec, 2.0), 0.5, 0.1)
        chord = chord_from_report(spec, ctx.exception.report, n=32)
        self.assertAlmostEqual(chord.length, 1.0, places=9)
        self.assertAlmostEqual(chord.energy, 0.5, places=9)

    def test_distance(self):
        first = fake_chord((0.0, 0.0), (1.0, 0.0), 1.0)
        second = fake_chord((0.0, 1.0), (1.0, 1.0), 1.0)
        self.assertAlmostEqual(chord_distance(first, second), 1.0)
        self.assertEqual(chord_distance(first, fake_chord((1.0, 0.0), (0.0, 0.0), 1.0)), 0.0)

    def test_dedup(self):
        near = [fake_chord((0.0, 0.0), (1.0, 0.0), 8.78), fake_chord((0.0, 1.0), (1.0, 1.0), 8.77)]
        kept = dedup_chords(near)
        self.assertEqual([c.energy for c in kept], [8.77])
        apart = [fake_chord((0.0, 0.0), (1.0, 0.0), 9.0), fake_chord((0.0, 1.0), (1.0, 1.0), 4.0)]
        self.assertEqual([c.energy for c in dedup_chords(apart)], [4.0, 9.0])
        same = [fake_chord((0.0, 0.0), (1.0, 0.0), 2.0), fake_chord((1.0, 0.0), (0.0, 0.0), 2.0)]
        self.assertEqual(len(dedup_chords(same)), 1)
        distinct = [fake_chord((0.0, 0.0), (1.0, 0.0), 2.0), fake_chord((0.0, 1.0), (1.0, 1.0), 2.0)]
        self.assertEqual(len(dedup_chords(distinct)), 2)


class TestSolver(TestCase):
    def test_disk_fails_the_concavity_gate(self):
        with self.assertRaises(NotConcaveException):
            solve_existence(euclidean_disk(), grid=8, n=32)

    @pytest.mark.slow
    def test_cap_level(self):
        budgets = BudgetsConfig(max_iterations=60, sweeps_per_rung=20, wall_clock_seconds=120.0)
        report = solve_existence(sphere_cap(), grid=8, n=64, budgets=budgets)
        self.assertTrue(report.chords)
        self.assertFalse(report.from_scan)
        self.assertFalse(report.stalled)
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(report.F_history, report.F_history[1:])))
        self.assertAlmostEqual(report.level, 8.0 * math.pi**2 / 9.0, places=4)
        self.assertTrue(report.lower_bound_ok)
        for chord in report.chords:
            self.assertAlmostEqual(chord.length, CAP_LENGTH, places=4)
            self.assertLess(chord.orthogonality_defect, 1e-4)
        out = report.to_dict()
        self.assertEqual(out["F_history"][0], report.F_history[0])
        self.assertIn("completeness of (M, g) is assumed and not checked", out["notes"])

    @pytest.mark.slow
    def test_cap_length_under_refinement(self):
        budgets = BudgetsConfig(max_iterations=60, sweeps_per_rung=20, wall_clock_seconds=300.0)
        coarse = solve_existence(sphere_cap(), grid=8, n=64, budgets=budgets)
        fine = solve_existence(sphere_cap(), grid=16, n=128, budgets=budgets)
        self.assertFalse(coarse.from_scan or fine.from_scan)
        shortest = min(chord.length for chord in coarse.chords)
        self.assertLess(abs(min(chord.length for chord in fine.chords) - shortest) / shortest, 1e-3)

    @patch("chordflow.minimax.solver.scan_normal_chords")
    @patch("chordflow.minimax.solver.first_deformation")
    def test_stalled_deformation_is_not_a_success(self, mock_deformation, mock_scan):
        def stall(state, *args, **kwargs):
            raise StalledException("level still above the rung", state)

        mock_deformation.side_effect = stall
        mock_scan.return_value = [fake_chord((-1.0, 0.0), (1.0, 0.0), 2.0)]
        with self.assertRaises(NoConvergenceException) as ctx:
            solve_existence(sphere_cap(), grid=4, n=32, concavity_samples=40)
        report = ctx.exception.best
        self.assertIsInstance(report, ExistenceReport)
        self.assertTrue(report.stalled)
        self.assertTrue(report.from_scan)
        self.assertEqual([c.energy for c in report.chords], [2.0])
        self.assertIsNone(report.level)
        self.assertEqual(len(set(report.F_history)), 1)
        self.assertTrue(any("normal scan" in note for note in report.notes))
