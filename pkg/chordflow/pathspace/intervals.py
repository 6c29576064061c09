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
Maximal intervals of a curve inside the closed domain.

Runs are read off the node values of φ, so the interval list is a deterministic function of the
node array. ``refine_crossings`` moves run end nodes onto the boundary crossing of their cell.
"""
import logging
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from chordflow.domain import DomainSpec, project_to_boundary
from chordflow.geometry import Array, flow_endpoints, shoot_geodesics
from chordflow.utils.exceptions import NotInM0Exception

from .curve import DiscreteCurve, evaluate

_logger_ = logging.getLogger(__name__)

CELL_STEPS = 8


@dataclass(frozen=True)
class IntervalRecord:
    """Grid interval [a, b] = [i/n, j/n] of a curve"""

    a: float
    b: float
    i: int
    j: int
    kind: Literal["maximal", "sub"] = "maximal"
    boundary_flags: Tuple[bool, bool] = (False, False)
    crossings: Tuple[float, float] = (0.0, 1.0)
    minimal: bool = False

    @property
    def on_boundary(self) -> bool:
        return all(self.boundary_flags)

    @property
    def length(self) -> float:
        return self.b - self.a


def node_runs(phi: Array, tol: float) -> List[Tuple[int, int]]:
    """Maximal index runs [i, j], j > i, with φ ≤ tol"""
    inside = phi <= tol
    runs = []
    start = None
    for k, flag in enumerate(inside):
        if flag and start is None:
            start = k
        if not flag and start is not None:
            if k - 1 > start:
                runs.append((start, k - 1))
            start = None
    if start is not None and len(inside) - 1 > start:
        runs.append((start, len(inside) - 1))
    return runs


def _segment_crossing(spec: DomainSpec, p: Array, q: Array) -> float:
    """Fraction θ with φ((1 − θ)p + θq) = 0"""
    return float(brentq(lambda t: float(spec.phi(p + t * (q - p))), 0.0, 1.0, xtol=1e-15))


def cell_crossings(spec: DomainSpec, P: Array, Q: Array) -> Tuple[Array, Array]:
    """Boundary crossings on the minimal geodesics from inside points P to outside points Q.

    Returns the crossing points and their fractions along each cell."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    V, converged, _ = shoot_geodesics(spec.field, P, Q, steps=CELL_STEPS, tol=1e-13)
    points = np.empty_like(P)
    fractions = np.empty(len(P))
    for k in range(len(P)):
        p, q, v = P[k], Q[k], V[k]
        if converged[k]:

            def phi_at(t: float, p: Array = p, v: Array = v) -> float:
                x, _ = flow_endpoints(spec.field, p[None], t * v[None], CELL_STEPS)
                return float(spec.phi(x[0]))

            try:
                t = float(brentq(phi_at, 0.0, 1.0, xtol=1e-15))
                fractions[k] = t
                points[k] = flow_endpoints(spec.field, p[None], t * v[None], CELL_STEPS)[0][0]
                continue
            except ValueError:
                pass
        t = _segment_crossing(spec, p, q)
        fractions[k] = t
        points[k] = p + t * (q - p)
    return points, fractions


def _crossing_parameter(spec: DomainSpec, x: DiscreteCurve, inner: int, outer: int) -> float:
    theta = _segment_crossing(spec, x.nodes[inner], x.nodes[outer])
    return (inner + theta * (outer - inner)) / x.n


def maximal_intervals(
    x: DiscreteCurve, spec: DomainSpec, tol: Optional[float] = None
) -> List[IntervalRecord]:
    """ℐ_x read off the node values of φ"""
    tol = spec.boundary_tol if tol is None else tol
    phi = spec.phi(x.nodes)
    if phi[0] < -tol or phi[-1] < -tol:
        raise NotInM0Exception(f"endpoint phi values {phi[0]:.3e}, {phi[-1]:.3e} below -{tol:.1e}")
    records = []
    for i, j in node_runs(phi, tol):
        cross_a = i / x.n if i == 0 or abs(phi[i]) <= tol else _crossing_parameter(spec, x, i, i - 1)
        cross_b = j / x.n if j == x.n or abs(phi[j]) <= tol else _crossing_parameter(spec, x, j, j + 1)
        records.append(
            IntervalRecord(
                a=i / x.n,
                b=j / x.n,
                i=i,
                j=j,
                kind="maximal",
                boundary_flags=(bool(abs(phi[i]) <= tol), bool(abs(phi[j]) <= tol)),
                crossings=(cross_a, cross_b),
            )
        )
    return records


def refine_crossings(x: DiscreteCurve, spec: DomainSpec, tol: Optional[float] = None) -> DiscreteCurve:
    """Move every run end node that is off the boundary onto the crossing of its outer cell"""
    tol = spec.boundary_tol if tol is None else tol
    phi = spec.phi(x.nodes)
    inner, outer = [], []
    for i, j in node_runs(phi, tol):
        if i > 0 and abs(phi[i]) > tol:
            inner.append(i)
            outer.append(i - 1)
        if j < x.n and abs(phi[j]) > tol:
            inner.append(j)
            outer.append(j + 1)
    if not inner:
        return x
    points, _ = cell_crossings(spec, x.nodes[inner], x.nodes[outer])
    nodes = x.nodes.copy()
    nodes[inner] = points
    _logger_.debug("moved %s run ends onto the boundary", len(inner))
    return x.with_nodes(nodes)


def portion_curve(x: DiscreteCurve, spec: DomainSpec, record: IntervalRecord) -> DiscreteCurve:
    """x between the boundary crossings of ``record``, affinely reparameterized onto [0, 1].

    The nodes spanning the crossings are interpolated by a cubic spline so that resampled
    geodesic portions keep a small geodesic residual."""
    start, stop = record.crossings
    lo = max(int(np.floor(start * x.n)), 0)
    hi = min(int(np.ceil(stop * x.n)), x.n)
    grid = np.linspace(start, stop, x.n + 1)
    if hi - lo < 3:
        nodes = evaluate(x, grid)
    else:
        nodes = CubicSpline(x.grid[lo : hi + 1], x.nodes[lo : hi + 1], axis=0)(grid)
    nodes[0] = project_to_boundary(spec, nodes[0])
    nodes[-1] = project_to_boundary(spec, nodes[-1])
    return DiscreteCurve(nodes)
