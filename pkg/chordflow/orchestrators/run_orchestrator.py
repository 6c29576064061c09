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
This module contains the RunOrchestrator class.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from chordflow.criticality import detect_wogc
from chordflow.domain import (
    DomainSpec,
    boundary_directions,
    calibrate,
    euclidean_disk,
    half_plane,
    radial_boundary_points,
    sphere_cap,
)
from chordflow.flows import build_ledger
from chordflow.hamiltonian import NaturalHamiltonian, brake_pipeline, ellipsoid_reference, jacobi_metric
from chordflow.minimax import ExistenceReport, solve_existence
from chordflow.minimax.solver import COMPLETENESS_NOTE
from chordflow.pathspace import ChordGenerator, PathFamily
from chordflow.utils import artifacts
from chordflow.utils.config import ConfigException
from chordflow.utils.exceptions import (
    BadRhoException,
    ChordFlowException,
    NoConvergenceException,
    NotConcaveException,
    PreconditionUnmetException,
    StalledException,
)
from chordflow.utils.run_config import RunConfig, load_run_config
from chordflow.utils.trace_logger import CsvTraceLogger

_logger_ = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_STALLED = 2


@dataclass
class RunReport:
    exit_code: int
    summary: Dict[str, Any]
    artifacts: List[str] = field(default_factory=list)


class RunOrchestrator:
    """
    This class runs one validated configuration through the check, solve or brake pipeline and
    writes the artifacts of the run.
    """

    def __init__(self, config: RunConfig, out_dir: Optional[str] = None, plot: Optional[bool] = None) -> None:
        """Constructor for the RunOrchestrator class"""
        self._config = config
        self._out_dir = out_dir if out_dir is not None else config.outputs.directory
        self._plot = config.outputs.plot if plot is None else plot

    @staticmethod
    def from_config_path(path: Optional[str] = None, **kwargs: Any) -> "RunOrchestrator":
        """Method to build a RunOrchestrator from a YAML file, CONFIG_PATH when ``path`` is None"""
        return RunOrchestrator(load_run_config(path), **kwargs)

    @staticmethod
    def from_config(config: RunConfig, **kwargs: Any) -> "RunOrchestrator":
        return RunOrchestrator(config, **kwargs)

    @property
    def config(self) -> RunConfig:
        return self._config

    @property
    def out_dir(self) -> str:
        return self._out_dir

    def hamiltonian(self) -> NaturalHamiltonian:
        block = self._config.hamiltonian
        if block is None:
            raise ConfigException("hamiltonian: block required for this run")
        return NaturalHamiltonian.ellipsoid(block.lambdas, block.energy, block.quartic)

    def build_spec(self) -> DomainSpec:
        geometry = self._config.geometry
        if geometry.kind == "half_plane":
            return half_plane(half_width=geometry.box_half_width)
        if geometry.kind == "euclidean_disk":
            return euclidean_disk(geometry.disk_radius)
        if geometry.kind == "sphere_cap":
            return sphere_cap(geometry.cap_radius, geometry.chart_radius)
        block = self._config.hamiltonian
        assert block is not None
        return jacobi_metric(self.hamiltonian(), block.rho[0])[1]

    def _boundary_grid(self, spec: DomainSpec) -> np.ndarray:
        d = self._config.discretization
        points = radial_boundary_points(spec, boundary_directions(spec.dim, d.boundary_grid, self._config.seed))
        return points[np.all(np.isfinite(points), axis=1)]

    def _not_concave(self, e: NotConcaveException) -> RunReport:
        witnesses = [
            {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in w.items()} for w in e.witnesses[:5]
        ]
        _logger_.error("%s", e)
        return RunReport(EXIT_INVALID, {"strongly_concave": False, "error": str(e), "witnesses": witnesses})

    @staticmethod
    def _failed(e: ChordFlowException) -> RunReport:
        """Exit 1 for an unmet precondition or a degenerate shrink, 2 for any other numerical failure"""
        _logger_.error("%s", e)
        code = EXIT_INVALID if isinstance(e, (PreconditionUnmetException, BadRhoException)) else EXIT_STALLED
        return RunReport(code, {"error": str(e), "error_kind": type(e).__name__})

    def run_check(self) -> RunReport:
        """Concavity gate, constants ledger and the weak chord scan"""
        config = self._config
        try:
            spec = self.build_spec()
        except ChordFlowException as e:
            return self._failed(e)
        try:
            spec, concavity = calibrate(
                spec, config.discretization.concavity_samples, config.constants.delta_max, config.seed
            )
            points = self._boundary_grid(spec)
            wogc = detect_wogc(spec, points)
            family = PathFamily.build(
                ChordGenerator(spec, config.discretization.nodes, seed=config.seed),
                len(points),
                seed=config.seed,
                grid=points,
            )
            ledger = build_ledger(spec, float(family.M0), config.constants, seed=config.seed)
        except NotConcaveException as e:
            return self._not_concave(e)
        except ChordFlowException as e:
            return self._failed(e)
        summary = {
            "strongly_concave": True,
            "delta0": ledger.delta0,
            "K0": ledger.K0,
            "M0": ledger.M0,
            "lambda1": ledger.lambda1,
            "c1_lower_bound": ledger.c1_lower_bound,
            "wogc": {"shots": len(wogc.shots), "touching": len(wogc.touching), "suspects": len(wogc.suspects)},
            "notes": [COMPLETENESS_NOTE],
        }
        path = artifacts.write_constants(
            self._out_dir, {"ledger": ledger.to_dict(), "concavity": concavity.to_dict(), **summary}
        )
        return RunReport(EXIT_OK, summary, [path])

    def _solve_artifacts(self, spec: DomainSpec, report: ExistenceReport, trace: CsvTraceLogger) -> List[str]:
        paths = [
            artifacts.write_chords(self._out_dir, [chord.to_dict() for chord in report.chords]),
            artifacts.write_constants(
                self._out_dir,
                {"ledger": report.ledger.to_dict(), "concavity": report.concavity.to_dict(), **report.to_dict()},
            ),
        ]
        trace_path = os.path.join(self._out_dir, artifacts.TRACE_FILE)
        trace.write(trace_path)
        paths.append(trace_path)
        if self._plot and spec.dim == 2:
            # pylint: disable=import-outside-toplevel
            from chordflow.utils.plotting import plot_domain

            paths.append(
                plot_domain(
                    spec,
                    os.path.join(self._out_dir, artifacts.PLOT_FILE),
                    [chord.curve.nodes for chord in report.chords],
                    report.ledger.delta0,
                )
            )
        return paths

    def run_solve(self) -> RunReport:
        """Existence run: every chord found at the first critical level"""
        config = self._config
        try:
            spec = self.build_spec()
        except ChordFlowException as e:
            return self._failed(e)
        trace = CsvTraceLogger()
        os.makedirs(self._out_dir, exist_ok=True)
        try:
            report = solve_existence(
                spec,
                grid=config.discretization.boundary_grid,
                n=config.discretization.nodes,
                budgets=config.budgets,
                overrides=config.constants,
                tolerances=config.tolerances,
                seed=config.seed,
                trace=trace,
                concavity_samples=config.discretization.concavity_samples,
                delta_max=config.constants.delta_max,
                substeps=config.discretization.polish_substeps,
            )
        except NotConcaveException as e:
            return self._not_concave(e)
        except (NoConvergenceException, StalledException) as e:
            _logger_.error("%s", e)
            summary: Dict[str, Any] = {"error": str(e)}
            paths = []
            best = getattr(e, "best", None)
            if isinstance(best, ExistenceReport):
                summary.update(best.to_dict())
                paths = self._solve_artifacts(spec, best, trace)
            return RunReport(EXIT_STALLED, summary, paths)
        except ChordFlowException as e:
            return self._failed(e)
        summary = {
            "chords": len(report.chords),
            "lengths": [chord.length for chord in report.chords],
            "level": report.level,
            "c1_lower_bound": report.ledger.c1_lower_bound,
            "lower_bound_ok": report.lower_bound_ok,
            "stalled": report.stalled,
            "notes": report.notes,
        }
        return RunReport(EXIT_OK, summary, self._solve_artifacts(spec, report, trace))

    def run_brake(self) -> RunReport:
        """Brake orbits of the configured well, seeded by Jacobi chords over the ρ ladder"""
        config = self._config
        ham = self.hamiltonian()
        block = config.hamiltonian
        assert block is not None
        reference = ellipsoid_reference(block.lambdas, block.energy) if block.quartic == 0.0 else None
        try:
            report = brake_pipeline(
                ham,
                block.rho,
                grid=config.discretization.boundary_grid,
                n=config.discretization.nodes,
                step=config.discretization.integrator_step,
                concavity_samples=config.discretization.concavity_samples,
                seed=config.seed,
                budgets=config.budgets,
            )
        except ChordFlowException as e:
            return self._failed(e)
        report.reference = reference
        payload = report.to_dict()
        if reference is not None:
            payload["reference"] = {
                "rational_ratios": reference.rational_ratios,
                "orbits": [{"T": o.T, "amplitude": o.amplitude} for o in reference.orbits],
            }
        payload["notes"] = [COMPLETENESS_NOTE]
        path = artifacts.write_orbits(self._out_dir, payload)
        summary = {
            "orbits": len(report.orbits),
            "half_periods": [o.T for o in report.orbits],
            "amplitudes": [o.amplitude for o in report.orbits],
            "distances_monotone": report.monotone,
        }
        if reference is not None:
            summary["rational_ratios"] = reference.rational_ratios
        code = EXIT_OK if report.orbits else EXIT_STALLED
        return RunReport(code, summary, [path])
