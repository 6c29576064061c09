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
The first deformation: push a homotopy state below a level.

Non-essential intervals are cleared first (type C); then every curve above the target level
alternates reparameterization (type B) and outward-pushing descent (type A) steps. The run stops
when the state is below ``c − eps`` or when a top interval has converged to an orthogonal
geodesic chord, which is reported through :class:`OGCDetectedException`.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from chordflow.criticality import OGCCheck, is_ogc, residual_vplus
from chordflow.domain import DomainSpec
from chordflow.pathspace import DiscreteCurve, IntervalRecord, constant_speed, portion_curve
from chordflow.utils.exceptions import (
    BadIntervalException,
    ChordFlowException,
    LeftMException,
    NoNonessentialException,
    NotSecondTypeException,
    OGCDetectedException,
    PreconditionUnmetException,
    RejectedStepException,
    StalledException,
)
from chordflow.utils.trace_logger import NullTraceLogger, TraceLogger, TraceRow

from .descent import FlowStepResult, interval_products, type_A_step
from .ledger import ConstantsLedger
from .pushdown import type_C_step
from .reparam import type_B_step
from .state import HomotopyState, Key

_logger_ = logging.getLogger(__name__)

ABORT_TOL = 5e-2
PASSAGE_FACTOR = 4.0
MAX_ITERATIONS = 400


@dataclass(frozen=True)
class OGCReport:
    key: Key
    interval: IntervalRecord
    curve: DiscreteCurve  # the portion on the interval at constant speed on [0, 1]
    check: OGCCheck
    residual: float
    level: float


def top_interval(x: DiscreteCurve, spec: DomainSpec) -> Optional[IntervalRecord]:
    products = interval_products(x, spec)
    if not products:
        return None
    return max(products, key=lambda item: item[1])[0]


def top_portion(x: DiscreteCurve, spec: DomainSpec) -> Optional[Tuple[IntervalRecord, DiscreteCurve]]:
    """The top interval of x and its portion resampled at constant speed.

    The resampling leaves the image unchanged, so the residual of the portion depends on the image only."""
    record = top_interval(x, spec)
    if record is None:
        return None
    return record, constant_speed(portion_curve(x, spec, record), spec.field)


def chord_residual(x: DiscreteCurve, spec: DomainSpec) -> float:
    """residual_vplus of the constant-speed top portion; NaN without a usable interval"""
    try:
        top = top_portion(x, spec)
        if top is None:
            return math.nan
        return residual_vplus(top[1], spec, 0.0, 1.0)
    except ChordFlowException:
        return math.nan


def check_top_ogc(
    key: Key, x: DiscreteCurve, spec: DomainSpec, abort_tol: float = ABORT_TOL
) -> Optional[OGCReport]:
    """Report when the top interval of x is a chord within ``abort_tol``"""
    try:
        top = top_portion(x, spec)
        if top is None:
            return None
        record, portion = top
        residual = residual_vplus(portion, spec, 0.0, 1.0)
        if residual >= abort_tol:
            return None
        check = is_ogc(portion, spec, geodesic_tol=abort_tol, orthogonality_tol=abort_tol)
    except ChordFlowException:
        return None
    if not check.ok:
        return None
    return OGCReport(key, record, portion, check, residual, _product(x, spec, record))


def _product(x: DiscreteCurve, spec: DomainSpec, record: IntervalRecord) -> float:
    for item, value in interval_products(x, spec):
        if (item.i, item.j) == (record.i, record.j):
            return value
    return math.nan


def _top_residual(x: DiscreteCurve, spec: DomainSpec) -> float:
    record = top_interval(x, spec)
    if record is None:
        return math.nan
    try:
        return residual_vplus(x, spec, record.a, record.b)
    except BadIntervalException:
        return math.nan


def _row(state: HomotopyState, result: FlowStepResult, spec: DomainSpec, cusps: int = 0) -> TraceRow:
    state.iterations += 1
    return TraceRow(
        iter=state.iterations,
        step_kind=result.step_kind,
        F=result.F_after,
        residual=_top_residual(result.curve, spec),
        displacement=result.displacement_h1,
        cusps=cusps,
    )


def first_deformation(  # pylint: disable=too-many-arguments, too-many-positional-arguments, too-many-branches
    state: HomotopyState,
    spec: DomainSpec,
    ledger: ConstantsLedger,
    c: float,
    eps: float,
    max_iterations: int = MAX_ITERATIONS,
    abort_tol: float = ABORT_TOL,
    trace: Optional[TraceLogger] = None,
) -> HomotopyState:
    """New state with F ≤ c − eps, deformed by C, then alternating B and A steps"""
    if not eps > 0.0:
        raise PreconditionUnmetException(f"eps must be positive, got {eps}")
    trace = trace or NullTraceLogger()
    F_start = state.F(spec)
    if F_start > c + eps + 1e-12 * max(1.0, c):
        raise PreconditionUnmetException(f"state level {F_start:.6g} above c + eps = {c + eps:.6g}")
    target = c - eps
    new = state.copy()
    for key in new.evolving_keys():
        try:
            result = type_C_step(new.current[key], spec, ledger)
        except NoNonessentialException:
            continue
        new.update(key, result.curve)
        new.tag("C")
        trace(_row(new, result, spec, cusps=len(result.interval_map)))

    for _ in range(max_iterations):
        values = new.values(spec)
        top = [key for key, value in values.items() if value > target]
        if not top:
            _logger_.info("level %s reached after %s steps, tags %s", target, new.iterations, new.tag_log)
            return new
        leader = max(top, key=lambda key: values[key])
        moved = False
        for key in top:
            x = new.current[key]
            report = check_top_ogc(key, x, spec, abort_tol)
            if report is not None:
                _logger_.info("chord detected on seed %s at level %s", key, report.level)
                raise OGCDetectedException(f"chord on seed {key} at level {report.level:.6g}", report)
            before = x
            try:
                result = type_B_step(x, spec, ledger)
                new.update(key, result.curve)
                new.tag("B")
                trace(_row(new, result, spec))
                x = result.curve
                moved = True
            except (NotSecondTypeException, RejectedStepException):
                pass
            try:
                result = type_A_step(x, spec, ledger, ledger.T_eps, level=target)
            except RejectedStepException:
                continue
            except LeftMException as e:
                raise StalledException(str(e), new) from e
            if result.F_after < result.F_before or result.displacement_h1 > 0.0:
                new.update(key, result.curve)
                new.tag("A")
                trace(_row(new, result, spec))
                moved = True
            if key == leader:
                _check_passage(key, before, new.current[key], spec, abort_tol)
        if not moved:
            break
    F_end = new.F(spec)
    raise StalledException(
        f"level {F_end:.6g} still above {target:.6g} after {max_iterations} sweeps (started at {F_start:.6g})",
        new,
    )


def _check_passage(key: Key, before: DiscreteCurve, after: DiscreteCurve, spec: DomainSpec, abort_tol: float) -> None:
    """Abort when the seed carrying ℱ moves away from a chord it has just come close to.

    A descent step that raises the chord residual of the leading seed has passed the nearest
    point to a chord; the pre-step curve is reported if it is a chord within the wider
    passage tolerance."""
    r_before = chord_residual(before, spec)
    if not r_before < PASSAGE_FACTOR * abort_tol:
        return
    if not chord_residual(after, spec) > r_before:
        return
    report = check_top_ogc(key, before, spec, PASSAGE_FACTOR * abort_tol)
    if report is not None:
        _logger_.info("seed %s passed a chord at level %s", key, report.level)
        raise OGCDetectedException(f"chord passed on seed {key} at level {report.level:.6g}", report)
