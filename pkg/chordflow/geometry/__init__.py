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
"""Chart metrics, geodesics and discrete energies"""
from .charts import stereographic_sphere
from .discrete import discrete_energy, discrete_energy_gradient, relax_discrete_geodesic
from .geodesics import (
    GeodesicTrajectory,
    flow_endpoints,
    flow_samples,
    injectivity_radius_lower_bound,
    integrate_geodesic,
    minimal_geodesic,
    rk4_step,
    shoot_geodesics,
)
from .metric import (
    Array,
    ChartDomain,
    MetricField,
    christoffel_at,
    conformal_field,
    euclidean_field,
    metric_at,
    metric_derivative_at,
)

__all__ = [
    "Array",
    "ChartDomain",
    "GeodesicTrajectory",
    "MetricField",
    "christoffel_at",
    "conformal_field",
    "discrete_energy",
    "discrete_energy_gradient",
    "euclidean_field",
    "flow_endpoints",
    "flow_samples",
    "injectivity_radius_lower_bound",
    "integrate_geodesic",
    "metric_at",
    "metric_derivative_at",
    "minimal_geodesic",
    "relax_discrete_geodesic",
    "rk4_step",
    "shoot_geodesics",
    "stereographic_sphere",
]
