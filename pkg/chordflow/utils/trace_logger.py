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
"""This module defines the interface for the per-step trace logger"""
import csv
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from typing import Callable, List

TRACE_HEADER = ["iter", "step_kind", "F", "residual", "displacement", "cusps"]


@dataclass(frozen=True)
class TraceRow:
    """One accepted deformation step"""

    iter: int
    step_kind: str
    F: float
    residual: float
    displacement: float
    cusps: int


class TraceLogger(ABC):
    """This is the class that defines the interface for the trace logger component"""

    @abstractmethod
    def log(self, row: TraceRow) -> None:
        """Send the row to the desired component"""

    def _log(self) -> Callable[[TraceRow], TraceRow]:
        """Return a function that logs the row and passes it through"""

        def _log_helper(row: TraceRow) -> TraceRow:
            self.log(row)
            return row

        return _log_helper

    def __call__(self, row: TraceRow) -> TraceRow:
        return self._log()(row)


class CsvTraceLogger(TraceLogger):
    """Collects rows in memory and writes them as trace.csv"""

    def __init__(self) -> None:
        self.rows: List[TraceRow] = []

    def log(self, row: TraceRow) -> None:
        self.rows.append(row)

    def write(self, path: str) -> None:
        """Write the collected rows with the fixed header"""
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=TRACE_HEADER)
            writer.writeheader()
            for row in self.rows:
                values = asdict(row)
                values["F"] = repr(float(values["F"]))
                values["residual"] = repr(float(values["residual"]))
                values["displacement"] = repr(float(values["displacement"]))
                writer.writerow(values)


class NullTraceLogger(TraceLogger):
    """Discards rows"""

    def log(self, row: TraceRow) -> None:
        pass
