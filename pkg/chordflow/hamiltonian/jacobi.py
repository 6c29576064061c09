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
"""Jacobi metric of a natural Hamiltonian on a shrunk sublevel of the potential."""
import logging
from typing import Tuple

import numpy as np

from chordflow.domain import DomainSpec, boundary_directions, radial_boundary_points
from chordflow.geometry import Array, ChartDomain, MetricField
from chordflow.utils.exceptions import BadRhoException

from .system import NaturalHamiltonian

_logger_ = logging.getLogger(__name__)


def jacobi_metric(ham: NaturalHamiltonian, rho: float, rays: int = 16) -> Tuple[MetricField, DomainSpec]:
    """g_J = (E − V)·ℒ on {V < E} with the domain {V ≤ E − ρ}, φ = V − (E − ρ)"""
    if not 0.0 < rho < ham.E - ham.inf_V:
        raise BadRhoException(f"rho {rho} outside (0, {ham.E - ham.inf_V})")
    dim = ham.dim
    level = ham.E - rho

    def admissible(q: Array) -> Array:
        return ham.potential(q) < ham.E

    chart = ChartDomain(center=np.zeros(dim), radius=ham.chart_radius, admissible=admissible)
    if ham.constant_kinetic:
        upper = ham.a(np.zeros(dim))
        lower = np.linalg.inv(upper)
        eye = np.eye(dim)

        def g_eval(q: Array) -> Array:
            return (ham.E - ham.potential(q))[..., None, None] * lower

        def gamma_eval(q: Array) -> Array:
            # σ = ½ log(E − V); Γ^k_ij = δ_ik ∂_jσ + δ_jk ∂_iσ − ℒ_ij a^{kl} ∂_lσ
            ds = -0.5 * ham.grad_V(q) / (ham.E - ham.potential(q))[..., None]
            raised = np.einsum("kl,...l->...k", upper, ds)
            return (
                np.einsum("ik,...j->...kij", eye, ds)
                + np.einsum("jk,...i->...kij", eye, ds)
                - np.einsum("ij,...k->...kij", lower, raised)
            )

        field_ = MetricField(dim, chart, g_eval, analytic_christoffel=gamma_eval, name=f"jacobi_{ham.name}")
    else:

        def g_eval(q: Array) -> Array:
            return (ham.E - ham.potential(q))[..., None, None] * ham.a_lower(q)

        field_ = MetricField(dim, chart, g_eval, name=f"jacobi_{ham.name}")

    def phi(q: Array) -> Array:
        return ham.potential(q) - level

    spec = DomainSpec(
        field=field_,
        phi_eval=phi,
        dphi_eval=ham.grad_V,
        center=np.zeros(dim),
        name=f"jacobi_{ham.name}_rho{rho:g}",
        hess_eval=ham.hess_V,
    )
    points = radial_boundary_points(spec, boundary_directions(dim, rays))
    if not np.any(np.all(np.isfinite(points), axis=1)):
        raise BadRhoException(f"sublevel V <= {level:g} has no boundary inside the chart")
    _logger_.debug("jacobi metric of %s at rho %s", ham.name, rho)
    return field_, spec
