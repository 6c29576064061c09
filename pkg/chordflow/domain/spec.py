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
This module contains the DomainSpec class.

A domain is the sublevel set {φ < 0} of a boundary function given in chart coordinates. The
spec carries φ and its chart differential; the g-gradient and the covariant Hessian are derived
from them and from the metric.
"""
import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from chordflow.geometry import Array, MetricField
from chordflow.utils.exceptions import NotOnBoundaryException

BatchMap = Callable[[Array], Array]


@dataclass(frozen=True)
class DomainSpec:  # pylint: disable=too-many-instance-attributes
    """Boundary function with its derived constants"""

    field: MetricField
    phi_eval: BatchMap
    dphi_eval: BatchMap
    center: Array
    name: str = "domain"
    delta0: float = 0.0
    K0: float = 0.0
    boundary_tol: float = 1e-7
    hess_step: float = 1e-5
    gradient_floor: float = 1e-8
    hess_eval: Optional[BatchMap] = None

    @property
    def dim(self) -> int:
        return self.field.dim

    def phi(self, q: Array) -> Array:
        return np.asarray(self.phi_eval(np.asarray(q, dtype=float)), dtype=float)

    def dphi(self, q: Array) -> Array:
        """Chart differential ∂_kφ"""
        return np.asarray(self.dphi_eval(np.asarray(q, dtype=float)), dtype=float)

    def grad_phi(self, q: Array) -> Array:
        """g-gradient ∇φ = g⁻¹ dφ"""
        q = np.asarray(q, dtype=float)
        return np.linalg.solve(self.field.g(q), self.dphi(q)[..., None])[..., 0]

    def grad_norm(self, q: Array) -> Array:
        """|∇φ|_g"""
        q = np.asarray(q, dtype=float)
        d = self.dphi(q)
        return np.sqrt(np.maximum(np.einsum("...i,...i->...", d, self.grad_phi(q)), 0.0))

    def unit_gradient(self, q: Array) -> Array:
        """∇φ/|∇φ|_g, zero where |∇φ|_g is below the gradient floor"""
        q = np.asarray(q, dtype=float)
        grad = self.grad_phi(q)
        norm = self.grad_norm(q)
        safe = np.where(norm > self.gradient_floor, norm, 1.0)
        return np.where((norm > self.gradient_floor)[..., None], grad / safe[..., None], 0.0)

    def euclidean_hessian(self, q: Array) -> Array:
        """∂_i∂_jφ by Richardson-extrapolated central differences of dφ"""
        q = np.asarray(q, dtype=float)
        if self.hess_eval is not None:
            return np.asarray(self.hess_eval(q), dtype=float)
        h = self.hess_step * self.field.chart_domain.scale
        rows = []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = 1.0
            coarse = (self.dphi(q + h * e) - self.dphi(q - h * e)) / (2.0 * h)
            fine = (self.dphi(q + 0.5 * h * e) - self.dphi(q - 0.5 * h * e)) / h
            rows.append((4.0 * fine - coarse) / 3.0)
        d2 = np.stack(rows, axis=-2)
        return 0.5 * (d2 + np.swapaxes(d2, -1, -2))

    def hess_phi(self, q: Array) -> Array:
        """Covariant Hessian H^φ_ij = ∂_i∂_jφ − Γ^k_ij ∂_kφ"""
        q = np.asarray(q, dtype=float)
        gamma = self.field.christoffel(q)
        return self.euclidean_hessian(q) - np.einsum("...kij,...k->...ij", gamma, self.dphi(q))

    def with_constants(
        self, delta0: Optional[float] = None, K0: Optional[float] = None
    ) -> "DomainSpec":
        """Copy with calibrated δ₀ and K₀"""
        changes = {}
        if delta0 is not None:
            changes["delta0"] = float(delta0)
        if K0 is not None:
            changes["K0"] = float(K0)
        return dataclasses.replace(self, **changes)

    def on_boundary(self, q: Array, tol: Optional[float] = None) -> Array:
        tol = self.boundary_tol if tol is None else tol
        return np.abs(self.phi(q)) <= tol


def require_boundary(spec: DomainSpec, x: Array, tol: Optional[float] = None) -> Array:
    """Return x as an array, raising NotOnBoundary when |φ(x)| exceeds the tolerance"""
    x = np.asarray(x, dtype=float)
    tol = spec.boundary_tol if tol is None else tol
    value = float(spec.phi(x))
    if abs(value) > tol:
        raise NotOnBoundaryException(f"|phi| = {abs(value):.3e} at {x.tolist()} exceeds {tol:.1e}")
    return x


def radial_boundary_points(spec: DomainSpec, directions: Array, iterations: int = 80) -> Array:
    """Boundary points along rays from the star center, by vectorized bisection"""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    center = np.asarray(spec.center, dtype=float)
    scale = spec.field.chart_domain.scale
    lo = np.zeros(len(directions))
    hi = np.full(len(directions), np.nan)
    missing = np.zeros(len(directions), dtype=bool)
    step = scale / 256.0
    t = np.zeros(len(directions))
    for _ in range(4096):
        pending = np.isnan(hi)
        if not np.any(pending):
            break
        t = np.where(pending, t + step, t)
        points = center + t[:, None] * directions
        inside_chart = spec.field.chart_domain.contains(points)
        crossed = pending & inside_chart & (spec.phi(points) > 0.0)
        hi = np.where(crossed, t, hi)
        lo = np.where(pending & ~crossed & inside_chart, t, lo)
        lost = pending & ~inside_chart
        missing |= lost
        hi = np.where(lost, lo, hi)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        positive = spec.phi(center + mid[:, None] * directions) > 0.0
        hi = np.where(positive, mid, hi)
        lo = np.where(positive, lo, mid)
    points = center + (0.5 * (lo + hi))[:, None] * directions
    # rays without a crossing inside the chart
    points[missing] = np.nan
    return points


def boundary_directions(dim: int, count: int, seed: int = 0) -> Array:
    """Evenly spaced angles in 2-d, seeded Gaussian directions otherwise"""
    if dim == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(count, dim))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def boundary_tangent_basis(spec: DomainSpec, x: Array, rng: Optional[np.random.Generator] = None) -> Array:
    """g-orthonormal basis of the g-orthogonal complement of ∇φ(x), shape (N-1, N)"""
    x = np.asarray(x, dtype=float)
    g = spec.field.g(x)
    d = spec.dphi(x)
    grad = np.linalg.solve(g, d)
    if spec.dim == 2:
        t = np.array([-d[1], d[0]])
        return (t / np.sqrt(float(t @ g @ t)))[None]
    seeds = np.eye(spec.dim) if rng is None else rng.normal(size=(spec.dim, spec.dim))
    basis = []
    for e in seeds:
        w = e - (float(d @ e) / float(d @ grad)) * grad
        for b in basis:
            w = w - float(w @ g @ b) * b
        norm = np.sqrt(max(float(w @ g @ w), 0.0))
        if norm > 1e-10:
            basis.append(w / norm)
        if len(basis) == spec.dim - 1:
            break
    return np.array(basis)
