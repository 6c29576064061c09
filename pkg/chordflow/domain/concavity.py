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
Second fundamental form, the sampled strong concavity test and the gradient bound K₀.

The concavity test follows η⁺ and η⁻ trajectories out of a ring of boundary points. On every
level it restricts the covariant Hessian of φ to the g-orthogonal complement of ∇φ and checks
that the restriction is negative definite; the deepest level where every trajectory passes is
refined by bisection.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np

from chordflow.geometry import Array
from chordflow.utils.exceptions import (
    NotConcaveException,
    NotTangentException,
    PreconditionUnmetException,
)

from .eta import flow_eta_batch
from .spec import (
    DomainSpec,
    boundary_directions,
    boundary_tangent_basis,
    radial_boundary_points,
    require_boundary,
)

_logger_ = logging.getLogger(__name__)

K0_SAFETY = 1.05
DELTA0_DEFLATION = 0.9
FD_STEP = 1e-3


@dataclass(frozen=True)
class ConcavityReport:
    """Outcome of :func:`check_strong_concavity`"""

    is_strongly_concave: bool
    delta0: float
    witnesses: List[Dict[str, Any]] = field(default_factory=list)
    verified_depth: float = 0.0
    boundary_points: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "is_strongly_concave": self.is_strongly_concave,
            "delta0": self.delta0,
            "verified_depth": self.verified_depth,
            "boundary_points": self.boundary_points,
            "witnesses": [
                {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in w.items()}
                for w in self.witnesses
            ],
        }


def _boundary_offset(spec: DomainSpec, x: Array, direction: Array, normal: Array, t: float) -> float:
    """s with φ(x + t·direction + s·normal) = 0, by Newton from s = 0"""
    s = 0.0
    for _ in range(30):
        q = x + t * direction + s * normal
        value = float(spec.phi(q))
        slope = float(spec.dphi(q) @ normal)
        ds = value / slope
        s -= ds
        if abs(ds) < 1e-16:
            break
    return s


def second_fundamental_form(
    spec: DomainSpec,
    x: Array,
    v: Array,
    normal: Literal["outward", "inward"] = "outward",
    tangency_tol: float = 1e-6,
) -> float:
    """II(v, v) at a boundary point.

    ``outward`` is the form with respect to ∇φ, obtained from the acceleration of a boundary curve
    through x with velocity v: II(v, v) = dφ(c̈ + Γ(v, v)), so that II + H^φ(v, v) = 0. ``inward``
    rescales it to the inward unit normal, the sign convention of geodesic curvature."""
    x = require_boundary(spec, x)
    v = np.asarray(v, dtype=float)
    g = spec.field.g(x)
    d = spec.dphi(x)
    grad = np.linalg.solve(g, d)
    grad_norm = float(np.sqrt(d @ grad))
    v_norm = float(np.sqrt(max(v @ g @ v, 0.0)))
    if abs(float(d @ v)) > tangency_tol * max(1.0, v_norm * grad_norm):
        raise NotTangentException(f"g(grad phi, v) = {float(d @ v):.3e} at {x.tolist()}")
    chart_norm = float(np.linalg.norm(v))
    if chart_norm == 0.0:
        return 0.0
    direction = v / chart_norm
    h = FD_STEP * max(1.0, float(np.linalg.norm(x)) * 1e-3)

    def second_difference(step: float) -> float:
        return (
            _boundary_offset(spec, x, direction, grad, step)
            + _boundary_offset(spec, x, direction, grad, -step)
        ) / step**2

    s2 = (4.0 * second_difference(0.5 * h) - second_difference(h)) / 3.0
    gamma = spec.field.christoffel(x)
    acceleration = s2 * grad + np.einsum("kij,i,j->k", gamma, direction, direction)
    value = float(d @ acceleration) * chart_norm**2
    if normal == "inward":
        return -value / grad_norm
    return value


def _tangent_hessian(spec: DomainSpec, Q: Array) -> Tuple[Array, Array, Array]:
    """Largest eigenvalue of the tangent-restricted Hessian, its tangent eigenvector and |∇φ|"""
    grad_norm = spec.grad_norm(Q)
    hess = spec.hess_phi(Q)
    if spec.dim == 2:
        d = spec.dphi(Q)
        t = np.stack([-d[:, 1], d[:, 0]], axis=1)
        tn = np.sqrt(np.maximum(np.einsum("ci,cij,cj->c", t, spec.field.g(Q), t), 1e-300))
        t = t / tn[:, None]
        values = np.einsum("ci,cij,cj->c", t, hess, t)
        return values, t, grad_norm
    top = np.empty(len(Q))
    vectors = np.empty_like(Q)
    for i, q in enumerate(Q):
        basis = boundary_tangent_basis(spec, q)
        restricted = basis @ hess[i] @ basis.T
        eigenvalues, eigenvectors = np.linalg.eigh(restricted)
        top[i] = eigenvalues[-1]
        vectors[i] = eigenvectors[:, -1] @ basis
    return top, vectors, grad_norm


def _failures(spec: DomainSpec, Q: Array) -> Tuple[Array, Array, Array]:
    finite = np.all(np.isfinite(Q), axis=1)
    bad = ~finite
    top = np.full(len(Q), np.nan)
    vectors = np.full(Q.shape, np.nan)
    if np.any(finite):
        values, t, grad_norm = _tangent_hessian(spec, Q[finite])
        top[finite] = values
        vectors[finite] = t
        bad[finite] = (grad_norm <= spec.gradient_floor) | ~(values < 0.0)
    return bad, top, vectors


def _witnesses(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    spec: DomainSpec, Q: Array, bad: Array, top: Array, vectors: Array, limit: int = 5
) -> List[Dict[str, Any]]:
    out = []
    for i in np.flatnonzero(bad)[:limit]:
        finite = bool(np.all(np.isfinite(Q[i])))
        out.append(
            {
                "point": Q[i].copy(),
                "tangent": vectors[i].copy(),
                "hessian_value": float(top[i]),
                "phi": float(spec.phi(Q[i])) if finite else float("nan"),
                "reason": "hessian not negative" if finite and np.isfinite(top[i]) else "degenerate gradient",
            }
        )
    return out


def boundary_sample(spec: DomainSpec, samples: int, seed: int = 0) -> Array:
    """Radial boundary points used by the concavity test, rays without a crossing dropped"""
    count = max(12, samples // 8)
    points = radial_boundary_points(spec, boundary_directions(spec.dim, count, seed))
    return points[np.all(np.isfinite(points), axis=1)]


def check_strong_concavity(  # pylint: disable=too-many-locals
    spec: DomainSpec,
    samples: int,
    delta_max: Optional[float] = None,
    seed: int = 0,
    levels: int = 32,
    bisections: int = 20,
) -> ConcavityReport:
    """Sampled strong concavity of ∂Ω and the largest verified shell depth"""
    if samples < 100:
        raise PreconditionUnmetException(f"samples must be at least 100, got {samples}")
    boundary = boundary_sample(spec, samples, seed)
    if len(boundary) == 0:
        witness = {"point": np.asarray(spec.center), "tangent": np.zeros(spec.dim),
                   "hessian_value": float("nan"), "phi": float(spec.phi(spec.center)),
                   "reason": "no boundary crossing"}
        return ConcavityReport(False, 0.0, [witness])
    bad, top, vectors = _failures(spec, boundary)
    if np.any(bad):
        witnesses = _witnesses(spec, boundary, bad, top, vectors)
        _logger_.info("%s is not strongly concave: %s failing boundary samples", spec.name, int(np.sum(bad)))
        return ConcavityReport(False, 0.0, witnesses, 0.0, len(boundary))

    delta_max = 0.25 * spec.field.chart_domain.scale if delta_max is None else float(delta_max)
    step = delta_max / levels
    sides = np.concatenate([boundary, boundary])
    signs = np.concatenate([np.ones(len(boundary)), -np.ones(len(boundary))])
    current = sides.copy()
    verified = delta_max
    for level in range(1, levels + 1):
        trial = flow_eta_batch(spec, current, signs * step)
        bad, _, _ = _failures(spec, trial)
        if np.any(bad):
            lo, hi = 0.0, step
            for _ in range(bisections):
                mid = 0.5 * (lo + hi)
                failing, _, _ = _failures(spec, flow_eta_batch(spec, current, signs * mid))
                if np.any(failing):
                    hi = mid
                else:
                    lo = mid
            verified = (level - 1) * step + lo
            break
        current = trial
    delta0 = DELTA0_DEFLATION * verified
    _logger_.info("%s: verified shell depth %s, delta0 %s", spec.name, verified, delta0)
    return ConcavityReport(delta0 > 0.0, delta0, [], verified, len(boundary))


def compute_K0(spec: DomainSpec, samples: int, seed: int = 0) -> float:
    """1.05 × the sampled maximum of |∇φ|_g over {φ ≤ δ₀}"""
    rng = np.random.default_rng(seed)
    points = spec.field.chart_domain.sample(rng, samples)
    points = points[spec.phi(points) <= spec.delta0]
    boundary = boundary_sample(spec, max(samples, 100), seed)
    pool = np.concatenate([points, boundary]) if len(points) else boundary
    if len(pool) == 0:
        raise PreconditionUnmetException(f"no sample of {spec.name} with phi <= delta0")
    return K0_SAFETY * float(np.max(spec.grad_norm(pool)))


def calibrate(
    spec: DomainSpec, samples: int, delta_max: Optional[float] = None, seed: int = 0
) -> Tuple[DomainSpec, ConcavityReport]:
    """Spec carrying the verified δ₀ and the matching K₀; NotConcaveException otherwise"""
    report = check_strong_concavity(spec, samples, delta_max=delta_max, seed=seed)
    if not report.is_strongly_concave:
        raise NotConcaveException(f"{spec.name} failed the strong concavity test", report.witnesses)
    shelled = spec.with_constants(delta0=report.delta0)
    return shelled.with_constants(K0=compute_K0(shelled, samples, seed)), report
