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
"""Unit testing for the RunOrchestrator class"""
import math
import os
import tempfile
import unittest
from unittest.mock import Mock, patch

import pytest

from chordflow.criticality import WogcScan
from chordflow.hamiltonian import BrakePipelineReport, ellipsoid_reference
from chordflow.minimax import ChordResult, ExistenceReport
from chordflow.orchestrators import RunOrchestrator
from chordflow.orchestrators.run_orchestrator import EXIT_INVALID, EXIT_OK, EXIT_STALLED
from chordflow.pathspace import segment_curve
from chordflow.utils.artifacts import read_json
from chordflow.utils.config import ConfigException
from chordflow.utils.exceptions import (
    BadRhoException,
    ChordFlowException,
    NoConvergenceException,
    PreconditionUnmetException,
    StalledException,
)
from chordflow.utils.run_config import run_config_from_dict

from .setup_utils import ELLIPSOID_CONFIG, SAMPLE_CONFIG

SQRT2 = math.sqrt(2.0)


def config_with(geometry, **extra):
    data = {**SAMPLE_CONFIG, "geometry": geometry, **extra}
    return run_config_from_dict(data)


def fake_report(plot_chord=True):
    curve = segment_curve((-SQRT2, 0.0), (SQRT2, 0.0), 8)
    chord = ChordResult(
        curve=curve,
        energy=4.0,
        length=2.0 * SQRT2,
        geodesic_residual=0.0,
        orthogonality_defect=0.0,
        boundary_points=(curve.nodes[0], curve.nodes[-1]),
    )
    ledger = Mock(c1_lower_bound=0.01, delta0=0.4)
    ledger.to_dict.return_value = {"delta0": 0.4, "c1_lower_bound": 0.01}
    concavity = Mock()
    concavity.to_dict.return_value = {"strongly_concave": True}
    return ExistenceReport(
        chords=[chord] if plot_chord else [],
        ledger=ledger,
        concavity=concavity,
        wogc=WogcScan(),
        level=4.0,
        F_history=[5.0, 4.0],
        notes=["note"],
    )


class TestRunOrchestrator(unittest.TestCase):
    """Unit testing for the RunOrchestrator class"""

    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()  # pylint: disable=consider-using-with
        self.out = self.tmp.name

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def test_build_spec(self):
        names = {
            "sphere_cap": "sphere_cap",
            "euclidean_disk": "euclidean_disk",
            "half_plane": "half_plane",
        }
        for kind, name in names.items():
            spec = RunOrchestrator.from_config(config_with({"kind": kind})).build_spec()
            self.assertTrue(spec.name.startswith(name), spec.name)
        spec = RunOrchestrator.from_config(run_config_from_dict(ELLIPSOID_CONFIG)).build_spec()
        self.assertTrue(spec.name.startswith("jacobi_ellipsoid"))

    def test_hamiltonian_needs_its_block(self):
        with self.assertRaises(ConfigException):
            RunOrchestrator.from_config(config_with({"kind": "sphere_cap"})).hamiltonian()

    def test_out_dir_and_plot_overrides(self):
        config = config_with({"kind": "sphere_cap"})
        orchestrator = RunOrchestrator.from_config(config, out_dir=self.out, plot=True)
        self.assertEqual(orchestrator.out_dir, self.out)
        self.assertEqual(RunOrchestrator.from_config(config).out_dir, "out")

    @patch.dict(os.environ, {"CONFIG_PATH": "missing.config.yml"})
    def test_from_missing_config_path(self):
        with self.assertRaises(ConfigException):
            RunOrchestrator.from_config_path()

    def test_check_rejects_the_disk(self):
        orchestrator = RunOrchestrator.from_config(config_with({"kind": "euclidean_disk"}), out_dir=self.out)
        report = orchestrator.run_check()
        self.assertEqual(report.exit_code, EXIT_INVALID)
        self.assertFalse(report.summary["strongly_concave"])
        self.assertTrue(report.summary["witnesses"])
        self.assertEqual(report.artifacts, [])

    def test_solve_rejects_the_disk(self):
        orchestrator = RunOrchestrator.from_config(config_with({"kind": "euclidean_disk"}), out_dir=self.out)
        self.assertEqual(orchestrator.run_solve().exit_code, EXIT_INVALID)

    @patch("chordflow.orchestrators.run_orchestrator.solve_existence")
    def test_solve_writes_artifacts(self, mock_solve):
        mock_solve.return_value = fake_report()
        orchestrator = RunOrchestrator.from_config(config_with({"kind": "sphere_cap"}), out_dir=self.out, plot=True)
        report = orchestrator.run_solve()
        self.assertEqual(report.exit_code, EXIT_OK)
        self.assertEqual(report.summary["chords"], 1)
        self.assertEqual(report.summary["level"], 4.0)
        names = sorted(os.path.basename(p) for p in report.artifacts)
        self.assertEqual(names, ["chords.json", "constants.json", "plot.svg", "trace.csv"])
        chords = read_json(os.path.join(self.out, "chords.json"))
        self.assertEqual(chords[0]["energy"], 4.0)
        constants = read_json(os.path.join(self.out, "constants.json"))
        self.assertEqual(constants["ledger"]["delta0"], 0.4)
        self.assertEqual(constants["F_history"], [5.0, 4.0])
        with open(os.path.join(self.out, "trace.csv"), "r", encoding="utf-8") as f:
            self.assertEqual(f.readline().strip(), "iter,step_kind,F,residual,displacement,cusps")
        self.assertEqual(mock_solve.call_args.kwargs["grid"], SAMPLE_CONFIG["discretization"]["boundary_grid"])

    @patch("chordflow.orchestrators.run_orchestrator.solve_existence")
    def test_solve_without_chords(self, mock_solve):
        mock_solve.side_effect = NoConvergenceException("no chord found on sphere_cap", fake_report(False))
        orchestrator = RunOrchestrator.from_config(config_with({"kind": "sphere_cap"}), out_dir=self.out)
        report = orchestrator.run_solve()
        self.assertEqual(report.exit_code, EXIT_STALLED)
        self.assertEqual(report.summary["error"], "no chord found on sphere_cap")
        self.assertEqual(report.summary["chords"], [])
        self.assertEqual(read_json(os.path.join(self.out, "chords.json")), [])

    @patch("chordflow.orchestrators.run_orchestrator.brake_pipeline")
    def test_brake_writes_orbits(self, mock_pipeline):
        reference = ellipsoid_reference([1.0, SQRT2], 1.0)
        mock_pipeline.return_value = BrakePipelineReport(reference.orbits, [], True)
        config = run_config_from_dict({**ELLIPSOID_CONFIG, "outputs": {"directory": self.out}})
        report = RunOrchestrator.from_config(config).run_brake()
        self.assertEqual(report.exit_code, EXIT_OK)
        self.assertEqual(report.summary["orbits"], 2)
        self.assertTrue(report.summary["rational_ratios"])
        payload = read_json(report.artifacts[0])
        self.assertEqual(len(payload["reference"]["orbits"]), 2)
        self.assertTrue(payload["distances_monotone"])
        self.assertEqual(mock_pipeline.call_args.args[1], [0.2])

    @patch("chordflow.orchestrators.run_orchestrator.brake_pipeline")
    def test_brake_failures(self, mock_pipeline):
        config = run_config_from_dict({**ELLIPSOID_CONFIG, "outputs": {"directory": self.out}})
        mock_pipeline.return_value = BrakePipelineReport([], [], True)
        self.assertEqual(RunOrchestrator.from_config(config).run_brake().exit_code, EXIT_STALLED)
        mock_pipeline.side_effect = ChordFlowException("boom")
        report = RunOrchestrator.from_config(config).run_brake()
        self.assertEqual(report.exit_code, EXIT_STALLED)
        self.assertEqual(report.summary, {"error": "boom", "error_kind": "ChordFlowException"})

    @patch("chordflow.orchestrators.run_orchestrator.ChordGenerator")
    @patch("chordflow.orchestrators.run_orchestrator.detect_wogc")
    @patch("chordflow.orchestrators.run_orchestrator.calibrate")
    def test_check_generator_failure(self, mock_calibrate, mock_wogc, mock_generator):
        config = config_with({"kind": "sphere_cap"})
        orchestrator = RunOrchestrator.from_config(config, out_dir=self.out)
        mock_calibrate.return_value = (orchestrator.build_spec(), Mock())
        mock_wogc.return_value = WogcScan()
        mock_generator.side_effect = PreconditionUnmetException("no inward push from the boundary pair")
        report = orchestrator.run_check()
        self.assertEqual(report.exit_code, EXIT_INVALID)
        self.assertEqual(report.summary["error_kind"], "PreconditionUnmetException")
        self.assertEqual(report.artifacts, [])
        mock_generator.side_effect = ChordFlowException("flow left the shell")
        self.assertEqual(orchestrator.run_check().exit_code, EXIT_STALLED)

    @patch("chordflow.orchestrators.run_orchestrator.solve_existence")
    def test_solve_failure_kinds(self, mock_solve):
        orchestrator = RunOrchestrator.from_config(config_with({"kind": "sphere_cap"}), out_dir=self.out)
        mock_solve.side_effect = PreconditionUnmetException("eps must be positive, got 0.0")
        self.assertEqual(orchestrator.run_solve().exit_code, EXIT_INVALID)
        mock_solve.side_effect = ChordFlowException("integrator drift")
        report = orchestrator.run_solve()
        self.assertEqual(report.exit_code, EXIT_STALLED)
        self.assertEqual(report.summary["error"], "integrator drift")
        mock_solve.side_effect = StalledException("level 9.5 still above 9.4")
        report = orchestrator.run_solve()
        self.assertEqual(report.exit_code, EXIT_STALLED)
        self.assertEqual(report.artifacts, [])

    @patch("chordflow.orchestrators.run_orchestrator.brake_pipeline")
    def test_brake_rejects_a_degenerate_shrink(self, mock_pipeline):
        mock_pipeline.side_effect = BadRhoException("sublevel V <= 0.8 has no boundary inside the chart")
        config = run_config_from_dict({**ELLIPSOID_CONFIG, "outputs": {"directory": self.out}})
        report = RunOrchestrator.from_config(config).run_brake()
        self.assertEqual(report.exit_code, EXIT_INVALID)
        self.assertEqual(report.summary["error_kind"], "BadRhoException")

    @pytest.mark.slow
    def test_check_on_the_cap(self):
        orchestrator = RunOrchestrator.from_config(config_with({"kind": "sphere_cap"}), out_dir=self.out)
        report = orchestrator.run_check()
        self.assertEqual(report.exit_code, EXIT_OK)
        self.assertTrue(report.summary["strongly_concave"])
        self.assertAlmostEqual(report.summary["delta0"], 0.9 * math.pi / 6.0, places=3)
        self.assertEqual(report.summary["wogc"]["suspects"], 0)
        self.assertTrue(os.path.exists(os.path.join(self.out, "constants.json")))
