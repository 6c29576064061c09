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
Classification of critical portions.

A portion [a, b] whose cone residual is inside the criticality band is

* ``near_regular_ogc`` when the velocity is continuous across every boundary contact,
* ``irregular_first_type`` when some contact run is a cusp, x constant on it and the velocity
  jumping across it by an angle of at least d₀; smaller jumps are listed but count as continuous,
* ``irregular_second_type`` when there is no cusp but x is constant on an initial or final run.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np

from chordflow.domain import DomainSpec
from chordflow.geometry import Array
from chordflow.pathspace import DiscreteCurve, IntervalRecord
from chordflow.utils.exceptions import NotACuspException, NotCriticalException

from .cone import residual_vplus

_logger_ = logging.getLogger(__name__)

Classification = Literal[
    "near_regular_ogc", "irregular_first_type", "irregular_second_type", "not_critical"
]

CRITICALITY_TOL = 1e-5
ANGLE_TOL = 1e-3
CONSTANT_TOL = 1e-12


@dataclass(frozen=True)
class CuspInfo:
    """Cusp interval [t1, t2] with its angle Θ and the tangential jump defect"""

    t1: float
    t2: float
    theta: float
    tangential_defect: float

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.t1, self.t2, self.theta


@dataclass(frozen=True)
class CriticalityReport:  # pylint: disable=too-many-instance-attributes
    interval: IntervalRecord
    residual_vplus: float
    classification: Classification
    cusps: List[CuspInfo] = field(default_factory=list)
    ell_minus: float = 0.0
    ell_plus: float = 0.0
    bending: List[Tuple[float, float, float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.interval.a,
            "b": self.interval.b,
            "residual_vplus": self.residual_vplus,
            "classification": self.classification,
            "cusps": [list(c.as_tuple()) + [c.tangential_defect] for c in self.cusps],
            "ell_minus": self.ell_minus,
            "ell_plus": self.ell_plus,
            "bending": [list(b) for b in self.bending],
        }


def _g_angle(g: Array, u: Array, w: Array) -> float:
    nu = math.sqrt(max(float(u @ g @ u), 0.0))
    nw = math.sqrt(max(float(w @ g @ w), 0.0))
    if nu == 0.0 or nw == 0.0:
        return 0.0
    cosine = float(u @ g @ w) / (nu * nw)
    return math.acos(min(1.0, max(-1.0, cosine)))


def _tangential_defect(spec: DomainSpec, p: Array, u: Array, w: Array) -> float:
    g = spec.field.g(p)
    d = spec.dphi(p)
    grad = np.linalg.solve(g, d)
    jump = u - w
    tangential = jump - (float(d @ jump) / float(d @ grad)) * grad
    scale = max(math.sqrt(float(u @ g @ u)), math.sqrt(float(w @ g @ w)), 1e-300)
    return math.sqrt(max(float(tangential @ g @ tangential), 0.0)) / scale


def _cusp(spec: DomainSpec, x: DiscreteCurve, k1: int, k2: int, angle_tol: float) -> CuspInfo:
    if k1 < 1 or k2 > x.n - 1:
        raise NotACuspException(f"contact run [{k1}, {k2}] touches the end of the curve")
    run = x.nodes[k1 : k2 + 1]
    if np.max(np.abs(run - run[0])) > CONSTANT_TOL:
        raise NotACuspException(f"x is not constant on [{k1 / x.n}, {k2 / x.n}]")
    before = x.n * (x.nodes[k1] - x.nodes[k1 - 1])
    after = x.n * (x.nodes[k2 + 1] - x.nodes[k2])
    p = x.nodes[k1]
    theta = _g_angle(spec.field.g(p), before, after)
    if theta < angle_tol:
        raise NotACuspException(f"velocity is continuous across [{k1 / x.n}, {k2 / x.n}]")
    return CuspInfo(k1 / x.n, k2 / x.n, theta, _tangential_defect(spec, p, before, after))


def cusp_angle(x: DiscreteCurve, spec: DomainSpec, t1: float, t2: float, angle_tol: float = ANGLE_TOL) -> float:
    """Θ, the g-angle between ẋ(t1⁻) and ẋ(t2⁺)"""
    return _cusp(spec, x, x.index(t1), x.index(t2), angle_tol).theta


def describe_cusp(
    x: DiscreteCurve, spec: DomainSpec, t1: float, t2: float, angle_tol: float = ANGLE_TOL
) -> CuspInfo:
    return _cusp(spec, x, x.index(t1), x.index(t2), angle_tol)


def constant_runs(x: DiscreteCurve, i: int, j: int) -> Tuple[int, int]:
    """Number of cells of [i, j] on which x is constant at the start and at the end"""
    nodes = x.nodes[i : j + 1]
    moving = np.flatnonzero(np.max(np.abs(np.diff(nodes, axis=0)), axis=1) > CONSTANT_TOL)
    if len(moving) == 0:
        return j - i, j - i
    return int(moving[0]), int(len(nodes) - 2 - moving[-1])


def contact_runs(phi: Array, start: int, stop: int, tol: float) -> List[Tuple[int, int]]:
    """Runs of nodes strictly between ``start`` and ``stop`` with |φ| ≤ tol"""
    runs = []
    k = start + 1
    while k < stop:
        if abs(phi[k]) <= tol:
            m = k
            while m + 1 < stop and abs(phi[m + 1]) <= tol:
                m += 1
            runs.append((k, m))
            k = m + 1
        else:
            k += 1
    return runs


def classify_portion(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    x: DiscreteCurve,
    spec: DomainSpec,
    a: float,
    b: float,
    threshold: float = CRITICALITY_TOL,
    angle_tol: float = ANGLE_TOL,
    strict: bool = True,
    d0: float = 0.0,
) -> CriticalityReport:
    """Criticality report of the portion on [a, b]; first type needs a cusp angle of at least ``d0``"""
    i, j = x.span(a, b)
    phi = spec.phi(x.nodes)
    interval = IntervalRecord(
        a=a,
        b=b,
        i=i,
        j=j,
        kind="maximal",
        boundary_flags=(bool(abs(phi[i]) <= spec.boundary_tol), bool(abs(phi[j]) <= spec.boundary_tol)),
    )
    residual = residual_vplus(x, spec, a, b)
    if residual > threshold:
        if strict:
            raise NotCriticalException(f"residual {residual:.3e} above {threshold:.1e} on [{a}, {b}]")
        return CriticalityReport(interval, residual, "not_critical")
    head, tail = constant_runs(x, i, j)
    ell_minus, ell_plus = head / x.n, tail / x.n
    cusps: List[CuspInfo] = []
    for k1, k2 in contact_runs(phi, i + head, j - tail, spec.boundary_tol):
        try:
            cusps.append(_cusp(spec, x, k1, k2, angle_tol))
        except NotACuspException:
            continue
    if cusps and max(c.theta for c in cusps) >= d0:
        classification: Classification = "irregular_first_type"
    elif ell_minus + ell_plus > 0.0:
        classification = "irregular_second_type"
    else:
        classification = "near_regular_ogc"
    _logger_.debug("portion [%s, %s]: %s, residual %s", a, b, classification, residual)
    return CriticalityReport(interval, residual, classification, cusps, ell_minus, ell_plus)


def minimum_cusp_angle(reports: List[CriticalityReport]) -> Optional[float]:
    """Smallest Θ over the first-type reports, the empirical d₀"""
    angles = [c.theta for r in reports for c in r.cusps]
    return min(angles) if angles else None
