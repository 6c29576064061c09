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
Geodesic integration, two-point shooting and the injectivity radius lower bound.

Integration is fixed-step classical RK4 on the first-order system (q, v), so trajectories are
reproducible for a given step. Shooting works on batches of endpoint pairs at once.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from chordflow.utils.exceptions import (
    DegenerateRegionException,
    LeftChartException,
    NoConvergenceException,
    StepTooLargeException,
    TooFarApartException,
)

from .metric import Array, MetricField, metric_at

_logger_ = logging.getLogger(__name__)

ENERGY_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class GeodesicTrajectory:
    """Sampled geodesic"""

    times: Array
    points: Array
    velocities: Array

    @property
    def start(self) -> Array:
        return self.points[0]

    @property
    def end(self) -> Array:
        return self.points[-1]

    def speed(self, field_: MetricField) -> float:
        """Initial g-speed; constant along the trajectory up to integration error"""
        g0 = field_.g(self.points[0])
        v0 = self.velocities[0]
        return math.sqrt(max(float(v0 @ g0 @ v0), 0.0))

    def length(self, field_: MetricField) -> float:
        return self.speed(field_) * float(self.times[-1] - self.times[0])


def geodesic_acceleration(field_: MetricField, q: Array, v: Array) -> Array:
    """−Γ^k_ij v^i v^j on a batch"""
    gamma = field_.christoffel(q)
    return -np.einsum("...kij,...i,...j->...k", gamma, v, v)


def rk4_step(field_: MetricField, q: Array, v: Array, h: float) -> Tuple[Array, Array]:
    """One classical RK4 step of the geodesic system"""
    k1q, k1v = v, geodesic_acceleration(field_, q, v)
    q2, v2 = q + 0.5 * h * k1q, v + 0.5 * h * k1v
    k2q, k2v = v2, geodesic_acceleration(field_, q2, v2)
    q3, v3 = q + 0.5 * h * k2q, v + 0.5 * h * k2v
    k3q, k3v = v3, geodesic_acceleration(field_, q3, v3)
    q4, v4 = q + h * k3q, v + h * k3v
    k4q, k4v = v4, geodesic_acceleration(field_, q4, v4)
    q_next = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    v_next = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return q_next, v_next


def _quadratic(field_: MetricField, q: Array, v: Array) -> Array:
    return np.einsum("...i,...ij,...j->...", v, field_.g(q), v)


def integrate_geodesic(
    field_: MetricField, q0: Array, v0: Array, T: float, step: float
) -> GeodesicTrajectory:
    """Integrate the geodesic equation from (q0, v0) over parameter length T"""
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    q = np.array(q0, dtype=float)
    v = np.array(v0, dtype=float)
    metric_at(field_, q)
    count = max(int(math.ceil(abs(T) / step - 1e-12)), 1) if T != 0.0 else 0
    h = T / count if count else 0.0
    times = [0.0]
    points = [q.copy()]
    velocities = [v.copy()]
    e0 = float(_quadratic(field_, q, v))
    for i in range(count):
        q, v = rk4_step(field_, q, v, h)
        if not bool(field_.chart_domain.contains(q)) or not np.all(np.isfinite(q)):
            exit_time = (i + 1) * h
            raise LeftChartException(
                f"geodesic left chart {field_.name} at t = {exit_time:.6g}", exit_time
            )
        times.append((i + 1) * h)
        points.append(q.copy())
        velocities.append(v.copy())
    e1 = float(_quadratic(field_, q, v))
    drift = abs(e1 - e0) / max(abs(e0), 1e-300)
    if e0 > 0.0 and drift > ENERGY_DRIFT_LIMIT:
        raise StepTooLargeException(
            f"relative energy drift {drift:.3e} above {ENERGY_DRIFT_LIMIT:.0e} at step {step:.3e}"
        )
    return GeodesicTrajectory(
        times=np.array(times), points=np.array(points), velocities=np.array(velocities)
    )


def flow_endpoints(field_: MetricField, P: Array, V: Array, steps: int) -> Tuple[Array, Array]:
    """Batched time-1 geodesic flow; rows leaving the chart become NaN"""
    q = np.array(P, dtype=float)
    v = np.array(V, dtype=float)
    h = 1.0 / steps
    alive = np.ones(len(q), dtype=bool)
    for _ in range(steps):
        q, v = rk4_step(field_, q, v, h)
        alive &= field_.chart_domain.contains(q) & np.all(np.isfinite(q), axis=-1)
        q = np.where(alive[:, None], q, np.asarray(P, dtype=float))
        v = np.where(alive[:, None], v, 0.0)
    q[~alive] = np.nan
    v[~alive] = np.nan
    return q, v


def flow_samples(field_: MetricField, p: Array, v: Array, steps: int, substeps: int = 1) -> Array:
    """Points of the geodesic from (p, v) at t = i/steps, i = 0..steps"""
    q = np.array(p, dtype=float)
    w = np.array(v, dtype=float)
    h = 1.0 / (steps * substeps)
    out = [q.copy()]
    for _ in range(steps):
        for _ in range(substeps):
            q, w = rk4_step(field_, q, w, h)
        out.append(q.copy())
    return np.array(out)


def shoot_geodesics(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    field_: MetricField,
    P: Array,
    Q: Array,
    steps: int = 64,
    tol: float = 1e-9,
    max_iter: int = 50,
    initial: Optional[Array] = None,
) -> Tuple[Array, Array, Array]:
    """Damped Newton shooting for many endpoint pairs.

    Returns the initial velocities, the converged mask and the final endpoint errors."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    count, dim = P.shape
    V = (Q - P).copy() if initial is None else np.array(initial, dtype=float)
    X, _ = flow_endpoints(field_, P, V, steps)
    R = X - Q
    err = np.linalg.norm(R, axis=1)
    err[~np.isfinite(err)] = np.inf
    done = err < tol
    for _ in range(max_iter):
        active = ~done
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        Pa, Va, Ra = P[idx], V[idx], R[idx]
        eps = 1e-7 * (1.0 + np.linalg.norm(Va, axis=1))
        jac = np.empty((len(idx), dim, dim))
        for k in range(dim):
            Vk = Va.copy()
            Vk[:, k] += eps
            Xk, _ = flow_endpoints(field_, Pa, Vk, steps)
            jac[:, :, k] = (Xk - (Ra + Q[idx])) / eps[:, None]
        try:
            delta = -np.linalg.solve(jac, Ra[..., None])[..., 0]
        except np.linalg.LinAlgError:
            delta = -Ra
        delta[~np.isfinite(delta)] = 0.0
        factor = np.ones(len(idx))
        pending = np.ones(len(idx), dtype=bool)
        best_V, best_R, best_err = Va.copy(), Ra.copy(), err[idx].copy()
        for _ in range(12):
            trial = Va + factor[:, None] * delta
            Xt, _ = flow_endpoints(field_, Pa, trial, steps)
            Rt = Xt - Q[idx]
            et = np.linalg.norm(Rt, axis=1)
            et[~np.isfinite(et)] = np.inf
            better = pending & (et < best_err)
            best_V[better], best_R[better], best_err[better] = trial[better], Rt[better], et[better]
            pending &= ~better
            if not np.any(pending):
                break
            factor[pending] *= 0.5
        stuck = pending
        V[idx], R[idx], err[idx] = best_V, best_R, best_err
        done[idx] = (best_err < tol) | stuck
    converged = err < tol
    return V, converged, err


def chart_segment_length(field_: MetricField, p: Array, q: Array, samples: int = 33) -> float:
    """Riemannian length of the straight chart segment, an upper bound of the distance"""
    t = np.linspace(0.0, 1.0, samples)
    delta = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    points = np.asarray(p, dtype=float) + t[:, None] * delta
    speeds = np.sqrt(np.maximum(_quadratic(field_, points, np.broadcast_to(delta, points.shape)), 0.0))
    return float(trapezoid(speeds, t))


def minimal_geodesic(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    field_: MetricField,
    p: Array,
    q: Array,
    dist_bound: float,
    steps: int = 256,
    injectivity_bound: Optional[float] = None,
) -> GeodesicTrajectory:
    """Shortest geodesic on [0, 1] from p to q inside the uniqueness radius"""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    metric_at(field_, p)
    metric_at(field_, q)
    if np.array_equal(p, q):
        return GeodesicTrajectory(
            times=np.array([0.0, 1.0]), points=np.array([p, p]), velocities=np.zeros((2, len(p)))
        )
    estimate = chart_segment_length(field_, p, q)
    bound = dist_bound if injectivity_bound is None else min(dist_bound, injectivity_bound)
    if estimate > bound:
        raise TooFarApartException(
            f"distance estimate {estimate:.6g} exceeds the uniqueness bound {bound:.6g}"
        )
    V, converged, err = shoot_geodesics(field_, p[None], q[None], steps=steps)
    if not converged[0]:
        # seed from a relaxed discrete geodesic
        from .discrete import relax_discrete_geodesic  # pylint: disable=import-outside-toplevel

        nodes = relax_discrete_geodesic(field_, p, q, 16)
        guess = 16.0 * (nodes[1] - nodes[0])
        V, converged, err = shoot_geodesics(field_, p[None], q[None], steps=steps, initial=guess[None])
    if not converged[0]:
        raise NoConvergenceException(
            f"shooting from {p.tolist()} to {q.tolist()} stopped at error {err[0]:.3e}"
        )
    return integrate_geodesic(field_, p, V[0], 1.0, 1.0 / steps)


def _orthonormal_directions(g: Array, count: int, rng: np.random.Generator) -> Array:
    dim = g.shape[-1]
    chol = np.linalg.cholesky(g)
    raw = rng.normal(size=(count, dim))
    # unit g-norm: v = L^{-T} w with |w| = 1
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return np.linalg.solve(chol.T, raw.T).T


def _normal_perturbations(g: Array, v: Array, eps: float) -> Array:
    """Directions perturbed g-orthogonally to v, one per remaining dimension"""
    dim = len(v)
    basis = [v / math.sqrt(float(v @ g @ v))]
    for e in np.eye(dim):
        w = e.copy()
        for b in basis:
            w = w - float(w @ g @ b) * b
        norm = math.sqrt(max(float(w @ g @ w), 0.0))
        if norm > 1e-8:
            basis.append(w / norm)
        if len(basis) == dim:
            break
    return np.array([basis[0] + eps * b for b in basis[1:]])


# pylint: disable-next=too-many-arguments, too-many-positional-arguments, too-many-locals
def injectivity_radius_lower_bound(
    field_: MetricField,
    region: Array,
    cap: Optional[float] = None,
    floor: float = 1e-6,
    directions: int = 16,
    points: int = 16,
    step: float = 1e-2,
    seed: int = 0,
) -> float:
    """Sampled lower bound from the first conjugate points of geodesic fans.

    A conjugate point along γ shows up as a sign change of det[γ', J] where the J are
    finite-difference Jacobi fields. Half of the shortest conjugate distance is returned, capped."""
    region = np.atleast_2d(np.asarray(region, dtype=float))
    if region.size == 0 or len(region) == 0:
        raise DegenerateRegionException("empty sample region")
    cap = field_.chart_domain.scale if cap is None else cap
    rng = np.random.default_rng(seed)
    chosen = region[rng.permutation(len(region))[:points]]
    eps = 1e-6
    starts, velocities, groups = [], [], []
    for p in chosen:
        g = field_.g(p)
        for v in _orthonormal_directions(g, directions, rng):
            perturbed = _normal_perturbations(g, v, eps)
            starts.append(np.repeat(p[None], 1 + len(perturbed), axis=0))
            velocities.append(np.vstack([v[None], perturbed]))
            groups.append(1 + len(perturbed))
    width = groups[0]
    q = np.concatenate(starts).reshape(-1, width, field_.dim)
    v = np.concatenate(velocities).reshape(-1, width, field_.dim)
    alive = np.ones(len(q), dtype=bool)
    conjugate = np.full(len(q), np.inf)

    def determinant(qs: Array, vs: Array) -> Array:
        jac = (qs[:, 1:, :] - qs[:, :1, :]) / eps
        mats = np.concatenate([vs[:, :1, :], jac], axis=1)
        return np.linalg.det(mats)

    prev = determinant(q, v)
    t = 0.0
    n_steps = int(math.ceil(cap * 2.0 / step))
    for _ in range(n_steps):
        q_next, v_next = rk4_step(field_, q, v, step)
        inside = np.all(field_.chart_domain.contains(q_next), axis=1) & alive
        det_next = determinant(q_next, v_next)
        flipped = inside & np.isinf(conjugate) & (np.sign(det_next) != np.sign(prev)) & (t > 0.0)
        for idx in np.flatnonzero(flipped):
            q_i, v_i = q[idx], v[idx]

            def det_at(s: float, q_i: Array = q_i, v_i: Array = v_i) -> float:
                qs, vs = rk4_step(field_, q_i[None], v_i[None], s)
                return float(determinant(qs, vs)[0])

            try:
                conjugate[idx] = t + brentq(det_at, 0.0, step, xtol=1e-12)
            except ValueError:
                conjugate[idx] = t + step
        alive &= inside
        q = np.where(alive[:, None, None], q_next, q)
        v = np.where(alive[:, None, None], v_next, v)
        prev = np.where(alive, det_next, prev)
        t += step
        if not np.any(alive & np.isinf(conjugate)):
            break
    bound = min(cap, 0.5 * float(np.min(conjugate)))
    if bound < floor:
        raise DegenerateRegionException(f"injectivity bound {bound:.3e} below floor {floor:.3e}")
    _logger_.debug("injectivity radius lower bound %s for %s", bound, field_.name)
    return bound
