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
Brake orbits: solutions with p(0) = p(T) = 0 swinging between two points of V⁻¹(E).

A launch point on the turning manifold V = E is parameterized by a ray direction from the origin,
d₀ + B·u with B spanning the complement of d₀, so Newton updates stay on the manifold. The
residual is the momentum at the first return turn, the first time after the start at which
dV/dt changes sign from positive to non-positive.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq
from scipy.spatial.distance import directed_hausdorff

from chordflow.domain import DomainSpec, boundary_directions, calibrate, radial_boundary_points
from chordflow.geometry import Array
from chordflow.minimax import ChordResult, ExistenceReport, dedup_chords, scan_normal_chords, solve_existence
from chordflow.utils.exceptions import (
    ChordFlowException,
    NoConvergenceException,
    NotConcaveException,
    RejectedStepException,
    ShootingDivergedException,
    ZeroLambdaException,
)
from chordflow.utils.retry import base_backtrack
from chordflow.utils.run_config import BudgetsConfig

from .jacobi import jacobi_metric
from .system import NaturalHamiltonian, hamilton_step

_logger_ = logging.getLogger(__name__)

MAX_NEWTON = 50
BRAKE_TOL = 1e-10
ACCEPT_TOL = 1e-6
FD_STEP = 1e-7
RATIONAL_DENOMINATOR = 20
REUSE_FRACTION = 0.5


@dataclass(frozen=True)
class BrakeOrbit:
    times: Array
    q_traj: Array
    p_traj: Array
    T: float
    residual_p0: float
    residual_pT: float
    drift: float = 0.0

    @property
    def launch(self) -> Array:
        return self.q_traj[0]

    @property
    def amplitude(self) -> float:
        return float(np.max(np.linalg.norm(self.q_traj, axis=1)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "T": float(self.T),
            "amplitude": self.amplitude,
            "launch": self.q_traj[0].tolist(),
            "turn": self.q_traj[-1].tolist(),
            "residual_p0": float(self.residual_p0),
            "residual_pT": float(self.residual_pT),
            "drift": float(self.drift),
        }


def turning_point(ham: NaturalHamiltonian, direction: Array, iterations: int = 80) -> Array:
    """The point of V⁻¹(E) on the ray from the origin along ``direction``"""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    lo, hi = 0.0, ham.chart_radius
    if float(ham.potential(hi * d)) < ham.E:
        raise ShootingDivergedException(f"ray {d.tolist()} does not reach the energy level")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if float(ham.potential(mid * d)) >= ham.E:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi) * d


def lift_to_energy(ham: NaturalHamiltonian, point: Array, max_iter: int = 50) -> Array:
    """Move a point along ∇V onto V⁻¹(E)"""
    q = np.array(point, dtype=float)
    for _ in range(max_iter):
        gap = ham.E - float(ham.potential(q))
        if abs(gap) < 1e-13:
            return q
        grad = ham.grad_V(q)
        size = float(grad @ grad)
        if size == 0.0:
            raise ShootingDivergedException(f"critical point of V at {q.tolist()}")
        q = q + gap / size * grad
    return q


def _rate(ham: NaturalHamiltonian, q: Array, p: Array) -> float:
    """dV/dt along the flow"""
    return float(ham.grad_V(q) @ ham.velocity(q, p))


def shoot_brake(ham: NaturalHamiltonian, q0: Array, step: float = 1e-3, max_time: float = 100.0) -> BrakeOrbit:
    """Flow from (q0, 0) up to the first return turn"""
    q = np.array(q0, dtype=float)
    p = np.zeros_like(q)
    H0 = float(ham.energy(q, p))
    times, qs, ps = [0.0], [q.copy()], [p.copy()]
    t = 0.0
    prev_rate = 0.0
    falling = False
    drift = 0.0
    while t < max_time:
        q1, p1 = hamilton_step(ham, q, p, step)
        rate = _rate(ham, q1, p1)
        if falling and prev_rate > 0.0 and rate <= 0.0:

            def rate_after(s: float, q: Array = q, p: Array = p) -> float:
                return _rate(ham, *hamilton_step(ham, q, p, s))

            s = brentq(rate_after, 0.0, step, xtol=1e-15) if rate < 0.0 else step
            qT, pT = hamilton_step(ham, q, p, s)
            times.append(t + s)
            qs.append(qT)
            ps.append(pT)
            drift = max(drift, abs(float(ham.energy(qT, pT)) - H0))
            return BrakeOrbit(
                times=np.array(times),
                q_traj=np.array(qs),
                p_traj=np.array(ps),
                T=t + s,
                residual_p0=0.0,
                residual_pT=float(np.linalg.norm(pT)),
                drift=drift,
            )
        if rate < 0.0:
            falling = True
        drift = max(drift, abs(float(ham.energy(q1, p1)) - H0))
        prev_rate = rate
        q, p = q1, p1
        t += step
        times.append(t)
        qs.append(q.copy())
        ps.append(p.copy())
    raise ShootingDivergedException(f"no return turn from {np.asarray(q0).tolist()} within time {max_time}")


def refine_brake_orbit(  # pylint: disable=too-many-locals
    ham: NaturalHamiltonian,
    launch: Array,
    step: float = 1e-3,
    tol: float = BRAKE_TOL,
    max_iter: int = MAX_NEWTON,
) -> BrakeOrbit:
    """Newton on the turning manifold until the return turn has p = 0"""
    d0 = np.asarray(launch, dtype=float)
    d0 = d0 / np.linalg.norm(d0)
    B = null_space(d0[None])
    m = B.shape[1]

    def orbit_at(u: Array) -> BrakeOrbit:
        return shoot_brake(ham, turning_point(ham, d0 + B @ u), step)

    u = np.zeros(m)
    orbit = orbit_at(u)
    for it in range(max_iter):
        size = orbit.residual_pT
        if size < tol or m == 0:
            _logger_.debug("brake orbit after %s Newton steps, residual %s", it, size)
            return orbit
        r = orbit.p_traj[-1]
        J = np.empty((len(r), m))
        for k in range(m):
            shifted = u.copy()
            shifted[k] += FD_STEP
            J[:, k] = (orbit_at(shifted).p_traj[-1] - r) / FD_STEP
        du = -np.linalg.lstsq(J, r, rcond=None)[0]

        def trial(t: float, u: Array = u, du: Array = du, size: float = size) -> Tuple[Array, BrakeOrbit]:
            candidate = u + t * du
            trial_orbit = orbit_at(candidate)
            if not trial_orbit.residual_pT < size:
                raise RejectedStepException(f"turn momentum {trial_orbit.residual_pT:.3e} not below {size:.3e}")
            return candidate, trial_orbit

        try:
            (u, orbit), _ = base_backtrack(
                trial, 1.0, max_halvings=20, exceptions=ChordFlowException, log_func=_logger_.debug
            )
        except ChordFlowException:
            break
    if orbit.residual_pT < ACCEPT_TOL:
        return orbit
    raise ShootingDivergedException(f"turn momentum {orbit.residual_pT:.3e} after {max_iter} Newton steps")


def brake_orbit_from_chord(
    ham: NaturalHamiltonian, chord: ChordResult, rho: float, step: float = 1e-3
) -> BrakeOrbit:
    """Brake orbit seeded by a chord of the Jacobi metric at shrink ``rho``"""
    start = np.asarray(chord.boundary_points[0], dtype=float)
    level = float(ham.potential(start))
    if abs(level - (ham.E - rho)) > 1e-6:
        _logger_.warning("chord endpoint at V = %s, expected %s", level, ham.E - rho)
    return refine_brake_orbit(ham, lift_to_energy(ham, start), step)


@dataclass(frozen=True)
class EllipsoidReference:
    orbits: List[BrakeOrbit]
    rational_ratios: bool


def ellipsoid_reference(lambdas: Sequence[float], E: float, samples: int = 257) -> EllipsoidReference:
    """Axis brake orbits q_i(t) = (√E/λ_i)·cos(√2 λ_i t) of ½|p|² + Σ λ_i² q_i²"""
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam == 0.0):
        raise ZeroLambdaException(f"zero frequency in {lam.tolist()}")
    rational = False
    for i in range(len(lam)):
        for j in range(i + 1, len(lam)):
            ratio = float((lam[i] / lam[j]) ** 2)
            nearest = Fraction(ratio).limit_denominator(RATIONAL_DENOMINATOR)
            if abs(ratio - float(nearest)) <= 1e-9 * max(1.0, ratio):
                rational = True
    if rational:
        _logger_.warning("squared frequency ratios of %s are rational; only axis orbits are returned", lam.tolist())
    if E <= 0.0:
        return EllipsoidReference([], rational)
    orbits = []
    for i, value in enumerate(np.abs(lam)):
        amplitude = math.sqrt(E) / value
        omega = math.sqrt(2.0) * value
        T = math.pi / omega
        t = np.linspace(0.0, T, samples)
        q = np.zeros((samples, len(lam)))
        p = np.zeros((samples, len(lam)))
        q[:, i] = amplitude * np.cos(omega * t)
        p[:, i] = -amplitude * omega * np.sin(omega * t)
        orbits.append(BrakeOrbit(t, q, p, T, 0.0, float(np.linalg.norm(p[-1]))))
    return EllipsoidReference(orbits, rational)


def hausdorff(P: Array, Q: Array) -> float:
    return max(directed_hausdorff(P, Q)[0], directed_hausdorff(Q, P)[0])


def dedup_orbits(orbits: List[BrakeOrbit], tol: float = 1e-2) -> List[BrakeOrbit]:
    """Drop orbits whose half-period and image match a kept one within ``tol``"""
    kept: List[BrakeOrbit] = []
    for orbit in sorted(orbits, key=lambda o: o.T):
        if not any(abs(orbit.T - other.T) <= tol and hausdorff(orbit.q_traj, other.q_traj) <= tol for other in kept):
            kept.append(orbit)
    return kept


def brake_symmetry_defect(ham: NaturalHamiltonian, orbit: BrakeOrbit) -> float:
    """max |q(t) − q(2T − t)| over the orbit samples, the flow continued past the turn"""
    q, p = orbit.q_traj[-1].copy(), orbit.p_traj[-1].copy()
    defect = 0.0
    for k in range(len(orbit.times) - 1, 0, -1):
        h = orbit.times[k] - orbit.times[k - 1]
        q, p = hamilton_step(ham, q, p, h)
        defect = max(defect, float(np.linalg.norm(q - orbit.q_traj[k - 1])))
    return defect


@dataclass
class RhoResult:  # pylint: disable=too-many-instance-attributes
    rho: float
    concavity_ok: bool
    chords: List[ChordResult] = field(default_factory=list)
    orbits: List[BrakeOrbit] = field(default_factory=list)
    distances: List[float] = field(default_factory=list)
    level: Optional[float] = None  # first critical level when the deformation found a chord
    from_scan: bool = True
    reused: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rho": self.rho,
            "concavity_ok": self.concavity_ok,
            "chord_lengths": [c.length for c in self.chords],
            "distances": list(self.distances),
            "level": self.level,
            "from_scan": self.from_scan,
            "reused_orbits": self.reused,
        }


@dataclass
class BrakePipelineReport:
    orbits: List[BrakeOrbit]
    per_rho: List[RhoResult]
    monotone: bool
    reference: Optional[EllipsoidReference] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "orbits": [o.to_dict() for o in self.orbits],
            "per_rho": [r.to_dict() for r in self.per_rho],
            "distances_monotone": self.monotone,
        }


def _monotone(per_rho: List[RhoResult], orbits: List[BrakeOrbit], tol: float) -> bool:
    ok = True
    for unique in orbits:
        series = []
        for result in per_rho:
            matched = [
                d for o, d in zip(result.orbits, result.distances) if hausdorff(o.q_traj, unique.q_traj) <= tol
            ]
            if matched:
                series.append(min(matched))
        if any(b > a + 1e-12 for a, b in zip(series, series[1:])):
            ok = False
    return ok


def _boundary_grid(spec: DomainSpec, grid: int, seed: int) -> Array:
    points = radial_boundary_points(spec, boundary_directions(spec.dim, grid, seed))
    return points[np.all(np.isfinite(points), axis=1)]


# pylint: disable-next=too-many-arguments, too-many-positional-arguments
def _minimax_chords(
    spec: DomainSpec,
    grid: int,
    n: int,
    concavity_samples: int,
    seed: int,
    budgets: Optional[BudgetsConfig],
) -> RhoResult:
    """Chords of the smallest shrink: the first critical level by deformation, completed by the normal scan"""
    result = RhoResult(rho=math.nan, concavity_ok=True)
    try:
        report = solve_existence(
            spec, grid=grid, n=n, budgets=budgets, seed=seed, concavity_samples=concavity_samples
        )
    except NotConcaveException:
        _logger_.warning("jacobi domain %s failed the concavity test; chords only seed shooting", spec.name)
        result.concavity_ok = False
        result.chords = scan_normal_chords(spec, _boundary_grid(spec, grid, seed), n)
        return result
    except NoConvergenceException as e:
        _logger_.warning("no chord from the deformation on %s: %s", spec.name, e)
        best = e.best
        result.chords = list(best.chords) if isinstance(best, ExistenceReport) else []
        return result
    result.level = report.level
    result.from_scan = False
    result.chords = list(report.chords) + scan_normal_chords(spec, _boundary_grid(spec, grid, seed), n)
    return result


def _reusable(orbits: List[BrakeOrbit], chord: ChordResult) -> Optional[BrakeOrbit]:
    """A found orbit within half its amplitude of the chord"""
    best: Optional[BrakeOrbit] = None
    best_distance = math.inf
    for orbit in orbits:
        distance = hausdorff(chord.curve.nodes, orbit.q_traj)
        if distance < REUSE_FRACTION * orbit.amplitude and distance < best_distance:
            best, best_distance = orbit, distance
    return best


def brake_pipeline(  # pylint: disable=too-many-arguments, too-many-positional-arguments, too-many-locals
    ham: NaturalHamiltonian,
    rhos: Sequence[float],
    grid: int = 32,
    n: int = 128,
    step: float = 1e-3,
    concavity_samples: int = 200,
    seed: int = 0,
    tol: float = 1e-3,
    orbit_tol: float = 1e-2,
    budgets: Optional[BudgetsConfig] = None,
) -> BrakePipelineReport:
    """Chords of the Jacobi metric over a shrinking ρ ladder, each refined into a brake orbit.

    The smallest ρ runs the existence solver and shoots from its chords; larger ρ only scan,
    and a chord close to an orbit already found reuses it instead of shooting again. Results
    are listed from the largest ρ down."""
    per_rho = []
    found: List[BrakeOrbit] = []
    ladder = sorted(rhos)
    for rho in ladder:
        _, spec = jacobi_metric(ham, rho)
        if rho == ladder[0]:
            result = _minimax_chords(spec, grid, n, concavity_samples, seed, budgets)
            result.rho = rho
        else:
            try:
                calibrate(spec, concavity_samples, seed=seed)
                concave = True
            except NotConcaveException:
                _logger_.warning("jacobi domain at rho %s failed the concavity test; chords only seed shooting", rho)
                concave = False
            result = RhoResult(rho=rho, concavity_ok=concave)
            result.chords = scan_normal_chords(spec, _boundary_grid(spec, grid, seed), n)
        result.chords = dedup_chords(result.chords, tol=tol, shape_tol=tol)
        for chord in result.chords:
            orbit = _reusable(found, chord)
            if orbit is not None:
                result.reused += 1
            else:
                try:
                    orbit = brake_orbit_from_chord(ham, chord, rho, step)
                except ChordFlowException as e:
                    _logger_.warning("chord of length %s at rho %s gave no brake orbit: %s", chord.length, rho, e)
                    continue
                found.append(orbit)
            result.orbits.append(orbit)
            result.distances.append(hausdorff(chord.curve.nodes, orbit.q_traj))
        per_rho.append(result)
    per_rho.sort(key=lambda r: -r.rho)
    orbits = dedup_orbits(found, orbit_tol)
    monotone = _monotone(per_rho, orbits, orbit_tol)
    if not monotone:
        _logger_.warning("chord to orbit distances are not monotone in rho")
    _logger_.info("%s brake orbits for %s", len(orbits), ham.name)
    return BrakePipelineReport(orbits, per_rho, monotone)
