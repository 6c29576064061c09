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
"""Critical portions, cusps, δ-intervals and chord tests"""
from .chords import OGCCheck, WogcScan, detect_wogc, end_velocity, geodesic_residual, is_ogc, orthogonality_defect
from .closeness import (
    bending_and_proximity,
    delta_bar_close_intervals,
    delta_intervals,
    find_nonessential_intervals,
    is_delta_bar_close,
)
from .cone import (
    ConeDescent,
    delta_interval_descent,
    h1_apply,
    h1_banded,
    h1_norm_field,
    project_descent,
    residual_vplus,
    vplus_descent,
)
from .portions import (
    ANGLE_TOL,
    CRITICALITY_TOL,
    CriticalityReport,
    CuspInfo,
    classify_portion,
    constant_runs,
    contact_runs,
    cusp_angle,
    describe_cusp,
    minimum_cusp_angle,
)

__all__ = [
    "ANGLE_TOL",
    "CRITICALITY_TOL",
    "ConeDescent",
    "CriticalityReport",
    "CuspInfo",
    "OGCCheck",
    "WogcScan",
    "bending_and_proximity",
    "classify_portion",
    "constant_runs",
    "contact_runs",
    "cusp_angle",
    "delta_bar_close_intervals",
    "delta_interval_descent",
    "delta_intervals",
    "describe_cusp",
    "detect_wogc",
    "end_velocity",
    "find_nonessential_intervals",
    "geodesic_residual",
    "h1_apply",
    "h1_banded",
    "h1_norm_field",
    "is_delta_bar_close",
    "is_ogc",
    "minimum_cusp_angle",
    "orthogonality_defect",
    "project_descent",
    "residual_vplus",
    "vplus_descent",
]
