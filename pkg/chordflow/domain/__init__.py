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
"""Boundary functions, concavity checks, η flows and the boundary projection"""
from .concavity import (
    ConcavityReport,
    boundary_sample,
    calibrate,
    check_strong_concavity,
    compute_K0,
    second_fundamental_form,
)
from .eta import flow_eta, flow_eta_batch, project_to_boundary
from .geometries import euclidean_disk, half_plane, sphere_cap
from .normal_shooting import (
    NormalShot,
    inward_normal,
    shoot_normal_geodesic,
    signed_tangential,
    tangential_part,
)
from .spec import (
    DomainSpec,
    boundary_directions,
    boundary_tangent_basis,
    radial_boundary_points,
    require_boundary,
)

__all__ = [
    "ConcavityReport",
    "DomainSpec",
    "NormalShot",
    "boundary_directions",
    "boundary_sample",
    "boundary_tangent_basis",
    "calibrate",
    "check_strong_concavity",
    "compute_K0",
    "euclidean_disk",
    "flow_eta",
    "flow_eta_batch",
    "half_plane",
    "inward_normal",
    "project_to_boundary",
    "radial_boundary_points",
    "require_boundary",
    "second_fundamental_form",
    "shoot_normal_geodesic",
    "signed_tangential",
    "sphere_cap",
    "tangential_part",
]
