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
Chord tests on discrete curves and the scan for weak chords.

The geodesic residual compares every interior node with the midpoint of the geodesic through its
two neighbours, 2n²·|x_i − m_i|_g, which approximates |Dẋ/ds| at the node and vanishes for the
exact samples of a geodesic.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from chordflow.domain import (
    DomainSpec,
    NormalShot,
    boundary_tangent_basis,
    shoot_normal_geodesic,
)
from chordflow.geometry import Array, flow_endpoints, shoot_geodesics
from chordflow.pathspace import DiscreteCurve
from chordflow.utils.exceptions import BadIntervalException, ChordFlowException

_logger_ = logging.getLogger(__name__)

MIDPOINT_STEPS = 16
ENDPOINT_TOL = 1e-6


@dataclass(frozen=True)
class OGCCheck:
    ok: bool
    geodesic_residual: float
    orthogonality_defect: float
    is_wogc: bool


def geodesic_residual(x: DiscreteCurve, spec: DomainSpec, i: int, j: int) -> float:
    """max over interior nodes of 2n²|x_k − m_k|_g"""
    if j - i < 2:
        return 0.0
    P = x.nodes[i : j - 1]
    Q = x.nodes[i + 2 : j + 1]
    V, _, _ = shoot_geodesics(spec.field, P, Q, steps=MIDPOINT_STEPS, tol=1e-14, max_iter=30)
    mid, _ = flow_endpoints(spec.field, P, 0.5 * V, MIDPOINT_STEPS)
    defect = x.nodes[i + 1 : j] - mid
    g = spec.field.g(x.nodes[i + 1 : j])
    norms = np.sqrt(np.maximum(np.einsum("ca,cab,cb->c", defect, g, defect), 0.0))
    if not np.all(np.isfinite(norms)):
        return math.inf
    return 2.0 * x.n**2 * float(np.max(norms))


def end_velocity(x: DiscreteCurve, k: int, forward: bool) -> Array:
    """Second order one-sided difference of ẋ at node k"""
    if forward:
        return 0.5 * x.n * (-3.0 * x.nodes[k] + 4.0 * x.nodes[k + 1] - x.nodes[k + 2])
    return 0.5 * x.n * (3.0 * x.nodes[k] - 4.0 * x.nodes[k - 1] + x.nodes[k - 2])


def orthogonality_defect(spec: DomainSpec, p: Array, v: Array) -> float:
    """max_w |g(v, w)|/(|v||w|) over a g-orthonormal boundary tangent basis"""
    g = spec.field.g(p)
    speed = math.sqrt(max(float(v @ g @ v), 0.0))
    if speed == 0.0:
        return 1.0
    basis = boundary_tangent_basis(spec, p)
    return float(np.max(np.abs(basis @ g @ v))) / speed


def is_ogc(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    x: DiscreteCurve,
    spec: DomainSpec,
    a: float = 0.0,
    b: float = 1.0,
    geodesic_tol: float = 1e-4,
    orthogonality_tol: float = 1e-4,
    touch_tol: Optional[float] = None,
) -> OGCCheck:
    """Geodesic, orthogonal at both ends, interior in the domain; touching interior nodes mark a WOGC"""
    i, j = x.span(a, b)
    if j - i < 3:
        raise BadIntervalException(f"[{a}, {b}] is too short for a chord test")
    nodes = x.nodes[i : j + 1]
    if np.max(np.abs(nodes - nodes[0])) == 0.0:
        raise BadIntervalException(f"x is constant on [{a}, {b}]")
    phi = spec.phi(nodes)
    if abs(phi[0]) > ENDPOINT_TOL or abs(phi[-1]) > ENDPOINT_TOL:
        raise BadIntervalException(f"[{a}, {b}] does not start and end on the boundary")
    touch_tol = spec.boundary_tol if touch_tol is None else touch_tol
    residual = geodesic_residual(x, spec, i, j)
    defect = max(
        orthogonality_defect(spec, x.nodes[i], end_velocity(x, i, True)),
        orthogonality_defect(spec, x.nodes[j], end_velocity(x, j, False)),
    )
    interior = phi[1:-1]
    is_wogc = bool(np.any(interior > -touch_tol))
    inside = bool(np.all(interior <= touch_tol))
    ok = residual < geodesic_tol and defect < orthogonality_tol and inside
    return OGCCheck(ok, residual, defect, is_wogc)


@dataclass
class WogcScan:
    """Normal geodesics shot from a boundary grid and the ones touching ∂Ω inside"""

    shots: List[NormalShot] = field(default_factory=list)
    touching: List[int] = field(default_factory=list)
    suspects: List[int] = field(default_factory=list)
    failures: int = 0

    @property
    def flagged(self) -> bool:
        return bool(self.suspects)


def detect_wogc(
    spec: DomainSpec,
    boundary_points: Array,
    touch_tol: float = 1e-4,
    residual_tol: float = 0.1,
) -> WogcScan:
    """Flag normal geodesics that come within ``touch_tol`` of ∂Ω before their exit.

    A touching shot whose exit is nearly orthogonal is reported as a suspected weak chord."""
    scan = WogcScan()
    for A in np.atleast_2d(np.asarray(boundary_points, dtype=float)):
        try:
            shot = shoot_normal_geodesic(spec, A)
        except ChordFlowException:
            scan.failures += 1
            continue
        scan.shots.append(shot)
        k = len(scan.shots) - 1
        if shot.max_interior_phi > -touch_tol:
            scan.touching.append(k)
            if shot.tangential_residual <= residual_tol:
                scan.suspects.append(k)
    if scan.suspects:
        _logger_.warning(
            "%s suspected weak orthogonal geodesic chords on %s", len(scan.suspects), spec.name
        )
    return scan
