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
Orthogonal geodesic chords as continuous objects.

A deformation run only locates a chord up to its discretization; the chord itself is recovered
by shooting the inward normal geodesic from a boundary point and moving that point until the
exit velocity is normal to the boundary. The launch point is parameterized by a ray direction
d₀ + T·u from the star center, T spanning the complement of d₀.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq
from scipy.spatial.distance import directed_hausdorff

from chordflow.criticality import geodesic_residual, orthogonality_defect
from chordflow.domain import (
    DomainSpec,
    NormalShot,
    radial_boundary_points,
    shoot_normal_geodesic,
    tangential_part,
)
from chordflow.flows import OGCReport
from chordflow.geometry import Array, flow_samples
from chordflow.pathspace import DiscreteCurve
from chordflow.utils.exceptions import (
    ChordFlowException,
    NoConvergenceException,
    RejectedStepException,
)
from chordflow.utils.retry import base_backtrack

_logger_ = logging.getLogger(__name__)

SUBSTEPS = 32
POLISH_TOL = 1e-10
FD_STEP = 1e-7
TOUCH_TOL = 1e-4
SAME_ENERGY = 1e-6
SHOT_STEP = 2e-3


@dataclass(frozen=True)
class ChordResult:  # pylint: disable=too-many-instance-attributes
    """A chord on [0, 1] at constant speed; energy = length²/2"""

    curve: DiscreteCurve
    energy: float
    length: float
    geodesic_residual: float
    orthogonality_defect: float
    boundary_points: Tuple[Array, Array]
    is_wogc: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "energy": float(self.energy),
            "length": float(self.length),
            "geodesic_residual": float(self.geodesic_residual),
            "orthogonality_defect": float(self.orthogonality_defect),
            "boundary_points": [np.asarray(p, dtype=float).tolist() for p in self.boundary_points],
            "is_wogc": self.is_wogc,
            "nodes": self.curve.nodes.tolist(),
        }


def chord_from_shot(spec: DomainSpec, shot: NormalShot, n: int = 128, substeps: int = SUBSTEPS) -> ChordResult:
    """Sample the shot on n + 1 nodes at constant speed"""
    nodes = flow_samples(spec.field, shot.launch, shot.length * shot.launch_velocity, n, substeps)
    nodes[0] = shot.launch
    nodes[-1] = shot.exit_point
    curve = DiscreteCurve(nodes)
    return ChordResult(
        curve=curve,
        energy=0.5 * shot.length**2,
        length=shot.length,
        geodesic_residual=geodesic_residual(curve, spec, 0, n),
        orthogonality_defect=orthogonality_defect(spec, shot.exit_point, shot.exit_velocity),
        boundary_points=(shot.launch.copy(), shot.exit_point.copy()),
        is_wogc=bool(shot.max_interior_phi > -TOUCH_TOL),
    )


def _exit_residual(spec: DomainSpec, shot: NormalShot) -> Array:
    if spec.dim == 2:
        return np.array([shot.signed_residual])
    return tangential_part(spec, shot.exit_point, shot.exit_velocity)


def _launcher(spec: DomainSpec, A0: Array, step: float) -> Tuple[Callable[[Array], NormalShot], int]:
    center = np.asarray(spec.center, dtype=float)
    d0 = np.asarray(A0, dtype=float) - center
    size = float(np.linalg.norm(d0))
    if size == 0.0:
        raise NoConvergenceException("launch point coincides with the star center")
    d0 = d0 / size
    T = null_space(d0[None])

    def shoot(u: Array) -> NormalShot:
        A = radial_boundary_points(spec, (d0 + T @ u)[None])[0]
        if not np.all(np.isfinite(A)):
            raise NoConvergenceException(f"ray {(d0 + T @ u).tolist()} does not meet the boundary")
        return shoot_normal_geodesic(spec, A, step=step)

    return shoot, T.shape[1]


def polish_chord(  # pylint: disable=too-many-arguments, too-many-positional-arguments, too-many-locals
    spec: DomainSpec,
    A0: Array,
    n: int = 128,
    substeps: int = SUBSTEPS,
    tol: float = POLISH_TOL,
    max_iter: int = 30,
    step: float = SHOT_STEP,
) -> ChordResult:
    """Damped Gauss–Newton on the launch point until the exit velocity is normal.

    Raises NoConvergenceException carrying the best chord found when the residual stays above
    ``tol``."""
    shoot, m = _launcher(spec, A0, step)
    u = np.zeros(m)
    try:
        shot = shoot(u)
    except ChordFlowException as e:
        raise NoConvergenceException(f"no normal geodesic from {np.asarray(A0).tolist()}: {e}") from e
    r = _exit_residual(spec, shot)
    for it in range(max_iter):
        size = float(np.linalg.norm(r))
        if size < tol:
            _logger_.debug("chord polished in %s iterations, residual %s", it, size)
            return chord_from_shot(spec, shot, n, substeps)
        J = np.empty((len(r), m))
        try:
            for k in range(m):
                shifted = u.copy()
                shifted[k] += FD_STEP
                J[:, k] = (_exit_residual(spec, shoot(shifted)) - r) / FD_STEP
        except ChordFlowException as e:
            raise NoConvergenceException(f"jacobian failed: {e}", chord_from_shot(spec, shot, n, substeps)) from e
        du = -np.linalg.lstsq(J, r, rcond=None)[0]

        def trial(t: float, u: Array = u, du: Array = du, size: float = size) -> Tuple[Array, NormalShot, Array]:
            candidate = u + t * du
            s = shoot(candidate)
            res = _exit_residual(spec, s)
            if not float(np.linalg.norm(res)) < size:
                raise RejectedStepException(f"exit residual {float(np.linalg.norm(res)):.3e} not below {size:.3e}")
            return candidate, s, res

        try:
            (u, shot, r), _ = base_backtrack(
                trial, 1.0, max_halvings=20, exceptions=ChordFlowException, log_func=_logger_.debug
            )
        except ChordFlowException as e:
            if size < math.sqrt(tol):
                break
            raise NoConvergenceException(
                f"chord polishing stalled at residual {size:.3e}", chord_from_shot(spec, shot, n, substeps)
            ) from e
    size = float(np.linalg.norm(r))
    if size < math.sqrt(tol):
        _logger_.debug("chord accepted at residual %s", size)
        return chord_from_shot(spec, shot, n, substeps)
    raise NoConvergenceException(
        f"chord polishing left residual {size:.3e} after {max_iter} iterations",
        chord_from_shot(spec, shot, n, substeps),
    )


def chord_from_report(spec: DomainSpec, report: OGCReport, n: int = 128, substeps: int = SUBSTEPS) -> ChordResult:
    """Polish the chord seeded by the start point of an aborting interval"""
    return polish_chord(spec, report.curve.nodes[0], n, substeps)


def _shoot_at(spec: DomainSpec, theta: float, step: float) -> NormalShot:
    A = radial_boundary_points(spec, np.array([[math.cos(theta), math.sin(theta)]]))[0]
    if not np.all(np.isfinite(A)):
        raise NoConvergenceException(f"ray at angle {theta} does not meet the boundary")
    return shoot_normal_geodesic(spec, A, step=step)


def _scan_planar(
    spec: DomainSpec, points: Array, shots: List[Optional[NormalShot]], n: int, substeps: int, tol: float
) -> List[ChordResult]:
    rel = points - np.asarray(spec.center, dtype=float)
    angles = np.arctan2(rel[:, 1], rel[:, 0])
    order = np.argsort(angles)
    found = []
    for idx, k in enumerate(order):
        shot = shots[k]
        if shot is None:
            continue
        if abs(shot.signed_residual) <= tol:
            found.append(chord_from_shot(spec, shot, n, substeps))
            continue
        nxt = order[(idx + 1) % len(order)]
        other = shots[nxt]
        if other is None or abs(other.signed_residual) <= tol:
            continue
        if shot.signed_residual * other.signed_residual > 0.0:
            continue
        lo, hi = float(angles[k]), float(angles[nxt])
        if hi <= lo:
            hi += 2.0 * math.pi
        try:
            theta = brentq(lambda t: _shoot_at(spec, t, SHOT_STEP).signed_residual, lo, hi, xtol=1e-13)
            found.append(chord_from_shot(spec, _shoot_at(spec, theta, SHOT_STEP), n, substeps))
        except (ValueError, ChordFlowException) as e:
            _logger_.debug("no chord between angles %s and %s: %s", lo, hi, e)
    return found


def _scan_minima(
    spec: DomainSpec, points: Array, shots: List[Optional[NormalShot]], n: int, substeps: int
) -> List[ChordResult]:
    r = np.array([math.inf if s is None else s.tangential_residual for s in shots])
    found = []
    neighbours = min(2 * spec.dim, len(points) - 1)
    for k, point in enumerate(points):
        if not math.isfinite(r[k]):
            continue
        nearest = np.argsort(np.linalg.norm(points - point, axis=1))[1 : neighbours + 1]
        if r[k] > np.min(r[nearest]):
            continue
        try:
            found.append(polish_chord(spec, point, n, substeps))
        except NoConvergenceException as e:
            _logger_.debug("local minimum at %s did not polish: %s", point.tolist(), e)
    return found


def scan_normal_chords(
    spec: DomainSpec, boundary_points: Array, n: int = 128, substeps: int = SUBSTEPS, tol: float = 1e-8
) -> List[ChordResult]:
    """Chords found from a boundary grid: residual sign changes in two dimensions, local minima above"""
    points = np.atleast_2d(np.asarray(boundary_points, dtype=float))
    points = points[np.all(np.isfinite(points), axis=1)]
    shots: List[Optional[NormalShot]] = []
    for A in points:
        try:
            shots.append(shoot_normal_geodesic(spec, A, step=SHOT_STEP))
        except ChordFlowException as e:
            _logger_.debug("normal shot from %s failed: %s", A.tolist(), e)
            shots.append(None)
    if spec.dim == 2:
        found = _scan_planar(spec, points, shots, n, substeps, tol)
    else:
        found = _scan_minima(spec, points, shots, n, substeps)
    _logger_.info("normal scan of %s boundary points found %s chords", len(points), len(found))
    return found


def chord_distance(first: ChordResult, second: ChordResult) -> float:
    """Symmetric Hausdorff distance between the node sets of two chords"""
    P, Q = first.curve.nodes, second.curve.nodes
    return max(directed_hausdorff(P, Q)[0], directed_hausdorff(Q, P)[0])


def dedup_chords(results: List[ChordResult], tol: float = 0.05, shape_tol: float = 1e-3) -> List[ChordResult]:
    """One chord per energy cluster of width ``tol``; equal-energy chords with distinct images stay apart"""
    kept: List[ChordResult] = []
    for result in sorted(results, key=lambda r: r.energy):
        duplicate = False
        for other in kept:
            gap = abs(result.energy - other.energy)
            if gap > tol:
                continue
            same_energy = gap <= SAME_ENERGY * max(1.0, abs(other.energy))
            if not same_energy or chord_distance(result, other) <= shape_tol:
                duplicate = True
                break
        if not duplicate:
            kept.append(result)
    return kept
