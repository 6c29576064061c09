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
"""Unit testing for the command line entry point"""
import contextlib
import io
import json
import os
import tempfile
import unittest
from unittest.mock import Mock, patch

import yaml

from chordflow.cli import build_parser, cmd_check, main
from chordflow.criticality import WogcScan
from chordflow.orchestrators import RunReport
from chordflow.utils.exceptions import PreconditionUnmetException

from .setup_utils import SAMPLE_CONFIG


class TestCli(unittest.TestCase):
    """Unit testing for the command line entry point"""

    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()  # pylint: disable=consider-using-with
        self.out = os.path.join(self.tmp.name, "out")

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def write_config(self, **sections):
        path = os.path.join(self.tmp.name, "run.config.yml")
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump({**SAMPLE_CONFIG, **sections}, f)
        return path

    def run_main(self, argv):
        stdout = io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(io.StringIO()):
            code = main(argv)
        return code, stdout.getvalue()

    def test_parser(self):
        args = build_parser().parse_args(["solve", "--config", "a.yml", "--plot", "--seed", "3"])
        self.assertEqual(args.command, "solve")
        self.assertEqual(args.config, "a.yml")
        self.assertTrue(args.plot)
        self.assertEqual(args.seed, 3)
        self.assertIsNone(build_parser().parse_args(["check"]).plot)

    def test_unknown_command(self):
        with contextlib.redirect_stderr(io.StringIO()), self.assertRaises(SystemExit):
            build_parser().parse_args(["bend"])

    def test_check_rejects_the_disk(self):
        path = self.write_config(geometry={"kind": "euclidean_disk"})
        code, stdout = self.run_main(["check", "--config", path, "--out", self.out])
        self.assertEqual(code, 1)
        summary = json.loads(stdout)
        self.assertFalse(summary["strongly_concave"])

    @patch("chordflow.cli.load_dotenv")
    @patch.dict(os.environ, {"CONFIG_PATH": "missing.config.yml"})
    def test_missing_config(self, _mock_dotenv):
        code, stdout = self.run_main(["check"])
        self.assertEqual(code, 1)
        self.assertEqual(stdout, "")

    def test_invalid_config(self):
        path = self.write_config(discretization={"nodes": 100})
        self.assertEqual(cmd_check(path, out=self.out), 1)

    @patch("chordflow.cli.RunOrchestrator.from_config")
    def test_overrides_reach_the_orchestrator(self, mock_from_config):
        mock_from_config.return_value.run_solve.return_value = RunReport(0, {"chords": 2})
        path = self.write_config()
        code, stdout = self.run_main(["solve", "--config", path, "--out", self.out, "--seed", "7", "--plot"])
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(stdout), {"chords": 2})
        config = mock_from_config.call_args.args[0]
        self.assertEqual(config.seed, 7)
        self.assertEqual(mock_from_config.call_args.kwargs, {"out_dir": self.out, "plot": True})

    @patch("chordflow.cli.RunOrchestrator.from_config")
    def test_exit_code_passes_through(self, mock_from_config):
        mock_from_config.return_value.run_brake.return_value = RunReport(2, {"error": "stalled"})
        path = self.write_config(geometry={"kind": "jacobi_well"}, hamiltonian={"rho": [0.2]})
        code, _ = self.run_main(["brake", "--config", path])
        self.assertEqual(code, 2)

    @patch("chordflow.orchestrators.run_orchestrator.ChordGenerator")
    @patch("chordflow.orchestrators.run_orchestrator.detect_wogc")
    @patch("chordflow.orchestrators.run_orchestrator.calibrate")
    def test_generator_failure_exits_cleanly(self, mock_calibrate, mock_wogc, mock_generator):
        mock_calibrate.side_effect = lambda spec, *args, **kwargs: (spec, Mock())
        mock_wogc.return_value = WogcScan()
        mock_generator.side_effect = PreconditionUnmetException("no inward push from the boundary pair")
        path = self.write_config(geometry={"kind": "sphere_cap"})
        code, stdout = self.run_main(["check", "--config", path, "--out", self.out])
        self.assertEqual(code, 1)
        summary = json.loads(stdout)
        self.assertEqual(summary["error_kind"], "PreconditionUnmetException")
        self.assertFalse(os.path.exists(os.path.join(self.out, "constants.json")))
