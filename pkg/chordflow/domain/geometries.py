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
"""Ready-made domains: the flat half-plane, the Euclidean disk and the spherical cap."""
import numpy as np

from chordflow.geometry import Array, euclidean_field, stereographic_sphere

from .spec import DomainSpec


def half_plane(scale: float = 1.0, half_width: float = 5.0) -> DomainSpec:
    """{q₂ < 0} with φ(q) = scale·q₂ on a flat box"""

    def phi(q: Array) -> Array:
        return scale * np.asarray(q)[..., 1]

    def dphi(q: Array) -> Array:
        q = np.asarray(q)
        out = np.zeros(q.shape)
        out[..., 1] = scale
        return out

    def hess(q: Array) -> Array:
        return np.zeros(np.shape(q) + (2,))

    return DomainSpec(
        field=euclidean_field(2, half_width),
        phi_eval=phi,
        dphi_eval=dphi,
        center=np.array([0.0, -1.0]),
        name="half_plane",
        hess_eval=hess,
    )


def euclidean_disk(radius: float = 1.0) -> DomainSpec:
    """Flat disk with φ(q) = |q| − R"""

    def phi(q: Array) -> Array:
        return np.linalg.norm(np.asarray(q), axis=-1) - radius

    def dphi(q: Array) -> Array:
        q = np.asarray(q)
        norm = np.linalg.norm(q, axis=-1, keepdims=True)
        return np.where(norm > 0.0, q / np.where(norm > 0.0, norm, 1.0), 0.0)

    return DomainSpec(
        field=euclidean_field(2, 3.0 * radius),
        phi_eval=phi,
        dphi_eval=dphi,
        center=np.zeros(2),
        name="euclidean_disk",
    )


def sphere_cap(cap_radius: float = 2.0 * np.pi / 3.0, chart_radius: float = 8.0) -> DomainSpec:
    """Geodesic ball of colatitude radius ``cap_radius`` around the north pole of the unit sphere.

    φ is the signed spherical distance to the boundary circle, 2·arctan|u| − r in the
    stereographic chart."""

    def phi(u: Array) -> Array:
        return 2.0 * np.arctan(np.linalg.norm(np.asarray(u), axis=-1)) - cap_radius

    def dphi(u: Array) -> Array:
        u = np.asarray(u)
        norm = np.linalg.norm(u, axis=-1, keepdims=True)
        safe = np.where(norm > 0.0, norm, 1.0)
        return np.where(norm > 0.0, 2.0 * u / (safe * (1.0 + norm**2)), 0.0)

    return DomainSpec(
        field=stereographic_sphere(chart_radius),
        phi_eval=phi,
        dphi_eval=dphi,
        center=np.zeros(2),
        name="sphere_cap",
    )
