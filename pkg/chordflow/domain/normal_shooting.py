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
"""Unit-speed geodesics launched along the inward normal of the boundary."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from chordflow.geometry import Array, rk4_step
from chordflow.utils.exceptions import LeftChartException, NoConvergenceException

from .spec import DomainSpec, require_boundary

_logger_ = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormalShot:  # pylint: disable=too-many-instance-attributes
    """First exit of the inward normal geodesic from a boundary point"""

    launch: Array
    launch_velocity: Array
    exit_point: Array
    exit_velocity: Array
    length: float
    tangential_residual: float
    signed_residual: float
    max_interior_phi: float


def inward_normal(spec: DomainSpec, x: Array) -> Array:
    """−∇φ/|∇φ|_g"""
    grad = spec.grad_phi(x)
    return -grad / float(np.sqrt(spec.dphi(x) @ grad))


def tangential_part(spec: DomainSpec, x: Array, w: Array) -> Array:
    """Component of w g-orthogonal to ∇φ(x)"""
    grad = spec.grad_phi(x)
    d = spec.dphi(x)
    return w - (float(d @ w) / float(d @ grad)) * grad


def signed_tangential(spec: DomainSpec, x: Array, w: Array) -> float:
    """g(w, t) for the unit tangent t = (−∂₂φ, ∂₁φ) in two dimensions, |w_T|_g otherwise"""
    g = spec.field.g(x)
    if spec.dim == 2:
        d = spec.dphi(x)
        t = np.array([-d[1], d[0]])
        return float(w @ g @ t) / float(np.sqrt(t @ g @ t))
    part = tangential_part(spec, x, w)
    return float(np.sqrt(max(part @ g @ part, 0.0)))


def shoot_normal_geodesic(
    spec: DomainSpec, A: Array, step: float = 2e-3, max_length: float = 100.0
) -> NormalShot:
    """Integrate the inward normal geodesic from A until it crosses ∂Ω again"""
    A = require_boundary(spec, A, max(spec.boundary_tol, 1e-6))
    field_ = spec.field
    q = A.copy()
    v = inward_normal(spec, A)
    launch_velocity = v.copy()
    t = 0.0
    peak = -np.inf
    prev_phi = float(spec.phi(q))
    count = int(np.ceil(max_length / step))
    for i in range(count):
        q_next, v_next = rk4_step(field_, q, v, step)
        if not bool(field_.chart_domain.contains(q_next)) or not np.all(np.isfinite(q_next)):
            raise LeftChartException(f"normal geodesic from {A.tolist()} left the chart", t + step)
        value = float(spec.phi(q_next))
        if i > 0 and value > 0.0:

            def phi_after(s: float, q0: Array = q, v0: Array = v) -> float:
                return float(spec.phi(rk4_step(field_, q0, v0, s)[0]))

            s = brentq(phi_after, 0.0, step, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            exit_point, exit_velocity = rk4_step(field_, q, v, s)
            g = field_.g(exit_point)
            part = tangential_part(spec, exit_point, exit_velocity)
            return NormalShot(
                launch=A,
                launch_velocity=launch_velocity,
                exit_point=exit_point,
                exit_velocity=exit_velocity,
                length=t + s,
                tangential_residual=float(np.sqrt(max(part @ g @ part, 0.0))),
                signed_residual=signed_tangential(spec, exit_point, exit_velocity),
                max_interior_phi=float(peak),
            )
        if i > 0 and prev_phi > peak:
            peak = prev_phi
        prev_phi = value
        q, v = q_next, v_next
        t += step
    raise NoConvergenceException(f"normal geodesic from {A.tolist()} did not exit within length {max_length}")
