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
"""Unit tests for the JSON artifacts and the SVG plot"""
import math
import os
import tempfile
import unittest

import numpy as np

from chordflow.domain import euclidean_disk, sphere_cap
from chordflow.hamiltonian import NaturalHamiltonian, jacobi_metric
from chordflow.utils.artifacts import (
    CHORDS_FILE,
    dumps,
    read_json,
    to_jsonable,
    write_chords,
    write_constants,
)
from chordflow.utils.plotting import plot_domain


class TestArtifacts(unittest.TestCase):
    """JSON conversion and files"""

    def test_to_jsonable(self):
        value = to_jsonable(
            {
                "array": np.array([1.5, 2.0]),
                "pair": (np.int64(3), np.bool_(True)),
                "nan": math.nan,
                "inf": np.float64(math.inf),
                1: "key",
            }
        )
        self.assertEqual(value, {"array": [1.5, 2.0], "pair": [3, True], "nan": None, "inf": None, "1": "key"})
        self.assertIsInstance(value["pair"][0], int)
        self.assertIsInstance(value["pair"][1], bool)

    def test_dumps_is_deterministic(self):
        first = dumps({"b": 0.1 + 0.2, "a": [np.float64(1.0) / 3.0]})
        second = dumps({"a": [1.0 / 3.0], "b": 0.30000000000000004})
        self.assertEqual(first, second)
        self.assertTrue(first.startswith('{\n  "a"'))
        self.assertIn("0.30000000000000004", first)
        self.assertTrue(first.endswith("\n"))

    def test_non_finite_values_become_null(self):
        self.assertIn("null", dumps({"level": math.nan}))

    def test_write_and_read(self):
        with tempfile.TemporaryDirectory() as tmp:
            directory = os.path.join(tmp, "nested")
            path = write_chords(directory, [{"energy": 0.5, "nodes": np.zeros((2, 2))}])
            self.assertEqual(os.path.basename(path), CHORDS_FILE)
            self.assertEqual(read_json(path), [{"energy": 0.5, "nodes": [[0.0, 0.0], [0.0, 0.0]]}])
            again = write_constants(directory, {"K0": 1.05})
            with open(again, "r", encoding="utf-8") as f:
                self.assertEqual(f.read(), '{\n  "K0": 1.05\n}\n')


class TestPlot(unittest.TestCase):
    """Domain drawings"""

    def test_plot_is_written_and_reproducible(self):
        spec = sphere_cap()
        chord = np.stack([np.linspace(-math.sqrt(3.0), math.sqrt(3.0), 9), np.zeros(9)], axis=1)
        with tempfile.TemporaryDirectory() as tmp:
            first = plot_domain(spec, os.path.join(tmp, "a.svg"), [chord], delta0=0.4, extent=2.5)
            second = plot_domain(spec, os.path.join(tmp, "b.svg"), [chord], delta0=0.4, extent=2.5)
            with open(first, "rb") as f, open(second, "rb") as g:
                content = f.read()
                self.assertEqual(content, g.read())
            self.assertIn(b"<svg", content)

    def test_plot_without_shell(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = plot_domain(euclidean_disk(), os.path.join(tmp, "disk.svg"), title="disk")
            self.assertTrue(os.path.exists(path))

    def test_plot_needs_a_planar_chart(self):
        _, spec = jacobi_metric(NaturalHamiltonian.ellipsoid([1.0, 1.0, 1.0], 1.0), 0.2)
        with self.assertRaises(ValueError):
            plot_domain(spec, "unused.svg")
