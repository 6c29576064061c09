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
"""Built-in charts."""
import math

import numpy as np

from .metric import Array, ChartDomain, MetricField, conformal_field


def stereographic_sphere(chart_radius: float = 8.0, analytic: bool = True) -> MetricField:
    """Unit sphere seen from its south pole: g = 4/(1+|u|²)² · I on a ball of ``chart_radius``.

    The origin is the north pole; the colatitude of u is 2·arctan|u|."""

    def log_factor(u: Array) -> Array:
        return math.log(2.0) - np.log1p(np.sum(np.asarray(u) ** 2, axis=-1))

    def log_factor_gradient(u: Array) -> Array:
        u = np.asarray(u)
        return -2.0 * u / (1.0 + np.sum(u**2, axis=-1, keepdims=True))

    return conformal_field(
        ChartDomain(center=np.zeros(2), radius=chart_radius),
        log_factor,
        log_factor_gradient,
        name="stereographic_sphere",
        analytic=analytic,
    )
