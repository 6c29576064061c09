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
Steepest descent of the energy inside a cone of variations.

The H¹ inner product of node fields on a sub-grid of m nodes is discretized as
⟨V, W⟩ = ½(½V₀·W₀ + ½V_m·W_m + n Σ ΔV·ΔW), a symmetric positive definite tridiagonal matrix K.
The steepest descent direction constrained by dφ_j·V_j ≥ 0 at contact nodes j is

    V = −K⁻¹G + Σ_j μ_j (K⁻¹e_j) ⊗ dφ_j,

with multipliers μ ≥ 0 solving a linear complementarity problem whose matrix is positive
semi-definite. The problem is handed to scipy's non-negative least squares through a Cholesky
factor.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import cholesky, solve_triangular, solveh_banded
from scipy.optimize import nnls

from chordflow.domain import DomainSpec
from chordflow.geometry import Array, discrete_energy_gradient
from chordflow.pathspace import DiscreteCurve
from chordflow.utils.exceptions import BadIntervalException

_logger_ = logging.getLogger(__name__)

RIDGE = 1e-14
ENDPOINT_TOL = 1e-6


def h1_banded(m: int, n: int, pinned: bool = False) -> Array:
    """Upper banded storage of K on m nodes; ``pinned`` drops both end nodes"""
    if pinned:
        size = m - 2
        ab = np.zeros((2, size))
        ab[1] = n
        ab[0, 1:] = -0.5 * n
        return ab
    ab = np.zeros((2, m))
    diag = np.full(m, n, dtype=float)
    diag[[0, -1]] = 0.5 * n + 0.25
    ab[1] = diag
    ab[0, 1:] = -0.5 * n
    return ab


def h1_apply(V: Array, n: int, pinned: bool = False) -> Array:
    """K·V for node fields V of shape (m, N)"""
    dV = np.diff(V, axis=0)
    out = np.zeros_like(V)
    out[:-1] -= dV
    out[1:] += dV
    out *= 0.5 * n
    if pinned:
        out[0] += 0.5 * n * V[0]
        out[-1] += 0.5 * n * V[-1]
    else:
        out[[0, -1]] += 0.25 * V[[0, -1]]
    return out


def h1_norm_field(V: Array, n: int, pinned: bool = False) -> float:
    """‖V‖ in the discrete H¹ inner product"""
    return float(np.sqrt(max(float(np.sum(V * h1_apply(V, n, pinned))), 0.0)))


@dataclass(frozen=True)
class ConeDescent:
    """Projected descent field, multipliers and the residual norm"""

    field: Array
    multipliers: Array
    residual: float
    first_variation: float


def project_descent(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    gradient: Array, ab: Array, active: Array, normals: Array, n: int, pinned: bool = False
) -> ConeDescent:
    """Steepest descent of the gradient in the cone {normals_j·V_active_j ≥ 0}"""
    V0 = -solveh_banded(ab, gradient)
    mu = np.zeros(len(active))
    V = V0
    if len(active):
        basis = np.zeros((len(gradient), len(active)))
        basis[active, np.arange(len(active))] = 1.0
        columns = solveh_banded(ab, basis)
        C = columns[active, :] * (normals @ normals.T)
        b = np.einsum("ka,ka->k", normals, V0[active])
        if np.any(b < 0.0):
            L = cholesky(C + RIDGE * max(1.0, float(np.max(np.abs(np.diag(C))))) * np.eye(len(active)), lower=True)
            target = -solve_triangular(L, b, lower=True)
            mu, _ = nnls(L.T, target)
            V = V0 + columns @ (mu[:, None] * normals)
    residual = h1_norm_field(V, n, pinned)
    return ConeDescent(V, mu, residual, float(np.sum(gradient * V)))


def _portion(
    x: DiscreteCurve, spec: DomainSpec, a: float, b: float, tol: float, require_ends: bool = True
) -> Tuple[int, int, Array]:
    i, j = x.span(a, b)
    nodes = x.nodes[i : j + 1]
    if np.max(np.abs(nodes - nodes[0])) == 0.0:
        raise BadIntervalException(f"x is constant on [{a}, {b}]")
    phi = spec.phi(nodes)
    off = abs(phi[0]) > max(tol, ENDPOINT_TOL) or abs(phi[-1]) > max(tol, ENDPOINT_TOL)
    if require_ends and off:
        raise BadIntervalException(f"[{a}, {b}] does not start and end on the boundary")
    if np.any(phi > max(tol, ENDPOINT_TOL)):
        raise BadIntervalException(f"x leaves the closed domain on [{a}, {b}]")
    return i, j, phi


def vplus_descent(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    x: DiscreteCurve,
    spec: DomainSpec,
    a: float,
    b: float,
    tol: Optional[float] = None,
    require_ends: bool = True,
) -> ConeDescent:
    """Steepest descent of f_{a,b} among fields pushing contact nodes outwards.

    With ``require_ends`` off the ends may sit just inside the domain; they stay active either way."""
    tol = spec.boundary_tol if tol is None else tol
    i, j, phi = _portion(x, spec, a, b, tol, require_ends)
    nodes = x.nodes[i : j + 1]
    gradient = discrete_energy_gradient(spec.field, nodes, x.n)
    contact = np.abs(phi) <= tol
    contact[[0, -1]] = True
    active = np.flatnonzero(contact)
    return project_descent(gradient, h1_banded(len(nodes), x.n), active, spec.dphi(nodes[active]), x.n)


def residual_vplus(x: DiscreteCurve, spec: DomainSpec, a: float, b: float, tol: Optional[float] = None) -> float:
    """H¹ norm of the 𝒱⁺-projected negative gradient of f_{a,b}; zero at critical portions"""
    return vplus_descent(x, spec, a, b, tol).residual


def delta_interval_descent(
    x: DiscreteCurve, spec: DomainSpec, alpha: float, beta: float, delta: float, tol: float = 1e-7
) -> Tuple[Array, float]:
    """Field V vanishing at α and β with g(∇φ, V) ≥ 0 where φ = −δ or φ = 0, and its first variation

    A negative value certifies that the energy can be decreased on the δ-interval."""
    i, j = x.span(alpha, beta)
    nodes = x.nodes[i : j + 1]
    if len(nodes) < 3:
        raise BadIntervalException(f"[{alpha}, {beta}] has no interior node")
    gradient = discrete_energy_gradient(spec.field, nodes, x.n)[1:-1]
    phi = spec.phi(nodes[1:-1])
    active = np.flatnonzero((np.abs(phi + delta) <= tol) | (np.abs(phi) <= tol))
    descent = project_descent(
        gradient, h1_banded(len(nodes), x.n, pinned=True), active, spec.dphi(nodes[1:-1][active]), x.n, pinned=True
    )
    V = np.zeros_like(x.nodes)
    V[i + 1 : j] = descent.field
    return V, descent.first_variation
