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
"""
Search for the first critical level of the boundary-pair family.

The identity state over a boundary grid is deformed by repeated first deformations along a
geometric ladder of ε values. Whenever a deformation aborts on a top interval that is already
a chord, that chord is polished as a continuous normal geodesic and reported.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from chordflow.criticality import WogcScan, detect_wogc
from chordflow.domain import (
    ConcavityReport,
    DomainSpec,
    boundary_directions,
    calibrate,
    radial_boundary_points,
)
from chordflow.flows import (
    ConstantsLedger,
    HomotopyState,
    OGCReport,
    build_ledger,
    first_deformation,
)
from chordflow.pathspace import ChordGenerator, PathFamily
from chordflow.utils.exceptions import (
    NoConvergenceException,
    OGCDetectedException,
    StalledException,
)
from chordflow.utils.run_config import BudgetsConfig, ConstantsConfig, TolerancesConfig
from chordflow.utils.trace_logger import NullTraceLogger, TraceLogger

from .chords import SUBSTEPS, ChordResult, chord_from_report, dedup_chords, scan_normal_chords
from .homotopy import (
    StateTransition,
    concatenate,
    functional_F,
    h1_admissible,
    identity_transition,
    transition,
)

_logger_ = logging.getLogger(__name__)

LADDER_START = 0.05
LADDER_FLOOR = 1e-6
COMPLETENESS_NOTE = "completeness of (M, g) is assumed and not checked"


@dataclass
class ExistenceReport:  # pylint: disable=too-many-instance-attributes
    chords: List[ChordResult]
    ledger: ConstantsLedger
    concavity: ConcavityReport
    wogc: WogcScan
    level: Optional[float] = None
    lower_bound_ok: bool = True
    stalled: bool = False
    from_scan: bool = False
    admissible: bool = True
    ladder: List[Tuple[float, float]] = field(default_factory=list)
    F_history: List[float] = field(default_factory=list)
    history: Optional[StateTransition] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "chords": [chord.to_dict() for chord in self.chords],
            "level": self.level,
            "level_lower_bound": self.ledger.c1_lower_bound,
            "lower_bound_ok": self.lower_bound_ok,
            "stalled": self.stalled,
            "from_scan": self.from_scan,
            "initial_state_admissible": self.admissible,
            "ladder": [[eps, value] for eps, value in self.ladder],
            "F_history": list(self.F_history),
            "tags": list(self.history.tags) if self.history is not None else [],
            "wogc_suspects": len(self.wogc.suspects),
            "notes": list(self.notes),
        }


def _polish_reports(spec: DomainSpec, reports: List[OGCReport], n: int, substeps: int) -> List[ChordResult]:
    chords = []
    for report in reports:
        try:
            chords.append(chord_from_report(spec, report, n, substeps))
        except NoConvergenceException as e:
            _logger_.warning("chord detected on seed %s did not polish: %s", report.key, e)
    return chords


# pylint: disable-next=too-many-arguments, too-many-positional-arguments, too-many-locals
# pylint: disable-next=too-many-branches, too-many-statements
def solve_existence(
    spec: DomainSpec,
    grid: int = 32,
    n: int = 128,
    budgets: Optional[BudgetsConfig] = None,
    overrides: Optional[ConstantsConfig] = None,
    tolerances: Optional[TolerancesConfig] = None,
    seed: int = 0,
    trace: Optional[TraceLogger] = None,
    concavity_samples: int = 200,
    delta_max: Optional[float] = None,
    substeps: int = SUBSTEPS,
) -> ExistenceReport:
    """Chords at the first critical level of ``spec``.

    Raises NotConcaveException before any iteration when the concavity gate fails and
    NoConvergenceException, carrying the partial report, when the deformation finds no chord; the
    report then lists the chords of the normal scan as diagnostics with ``from_scan`` set."""
    budgets = budgets or BudgetsConfig()
    tolerances = tolerances or TolerancesConfig()
    trace = trace or NullTraceLogger()
    started = time.monotonic()

    spec, concavity = calibrate(spec, concavity_samples, delta_max=delta_max, seed=seed)
    points = radial_boundary_points(spec, boundary_directions(spec.dim, grid, seed))
    points = points[np.all(np.isfinite(points), axis=1)]
    wogc = detect_wogc(spec, points)
    notes = [COMPLETENESS_NOTE, f"expected multiplicity >= {spec.dim}"]
    if wogc.flagged:
        notes.append(f"{len(wogc.suspects)} weak chords suspected; results assume there are none")

    family = PathFamily.build(ChordGenerator(spec, n, seed=seed), len(points), seed=seed, grid=points)
    ledger = build_ledger(spec, float(family.M0), overrides, seed=seed)
    state = HomotopyState.identity(family)
    admission = h1_admissible(state, spec, ledger)
    if not admission.admissible:
        _logger_.warning("identity state fails the admission checks: %s", admission)

    report = ExistenceReport(
        chords=[], ledger=ledger, concavity=concavity, wogc=wogc, admissible=admission.admissible, notes=notes
    )
    history = identity_transition(state)
    report.F_history.append(functional_F(state, spec))
    eps = LADDER_START * ledger.M0
    floor = LADDER_FLOOR * ledger.M0
    detected: List[OGCReport] = []
    while True:
        if time.monotonic() - started > budgets.wall_clock_seconds:
            _logger_.warning("wall clock budget of %ss exhausted", budgets.wall_clock_seconds)
            report.stalled = True
            break
        if state.iterations >= budgets.max_iterations:
            _logger_.warning("iteration budget of %s exhausted", budgets.max_iterations)
            report.stalled = True
            break
        c = report.F_history[-1]
        if c <= 0.0:
            break
        try:
            new = first_deformation(
                state,
                spec,
                ledger,
                c,
                eps,
                max_iterations=budgets.sweeps_per_rung,
                abort_tol=tolerances.abort_ogc,
                trace=trace,
            )
        except OGCDetectedException as e:
            detected.append(e.report)
            break
        except StalledException as e:
            new = e.state if isinstance(e.state, HomotopyState) else state
            eps *= 0.5
            _logger_.info("rung stalled (%s); eps halved to %s", e, eps)
        history = concatenate(history, transition(state, new))
        state = new
        value = state.F(spec)
        report.F_history.append(value)
        report.ladder.append((eps, value))
        if eps < floor:
            _logger_.warning("eps ladder reached its floor %s at level %s", floor, value)
            report.stalled = True
            break
    report.history = history

    chords = _polish_reports(spec, detected, n, substeps)
    if not chords:
        report.stalled = True
        report.chords = dedup_chords(
            scan_normal_chords(spec, points, n, substeps), tolerances.dedup_energy, tolerances.dedup_shape
        )
        report.from_scan = True
        notes.append("the deformation found no chord; listed chords come from the normal scan")
        raise NoConvergenceException(
            f"deformation on {spec.name} stalled at level {report.F_history[-1]:.6g} without a chord", report
        )
    report.chords = dedup_chords(chords, tolerances.dedup_energy, tolerances.dedup_shape)

    report.level = min(chord.energy for chord in report.chords)
    report.lower_bound_ok = report.level >= ledger.c1_lower_bound - 1e-12
    if not report.lower_bound_ok:
        _logger_.warning("level %s below the lower bound %s", report.level, ledger.c1_lower_bound)
    _logger_.info(
        "%s chords on %s, level %s, %s steps", len(report.chords), spec.name, report.level, state.iterations
    )
    return report
