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
"""Deformation steps of type A, B and C and the first deformation"""
from .deformation import (
    ABORT_TOL,
    OGCReport,
    check_top_ogc,
    chord_residual,
    first_deformation,
    top_interval,
    top_portion,
)
from .descent import (
    DescentDirection,
    FlowStepResult,
    curve_F,
    cutoff_chi,
    descent_direction_vplus,
    field_norm,
    interval_products,
    nest_map,
    owned_weights,
    type_A_step,
)
from .ledger import ConstantsLedger, build_ledger, compute_lambda1, with_band
from .pushdown import find_nonessential, inward_field, type_C_step
from .reparam import (
    optimal_shift,
    reparam_energy,
    reparam_parameters,
    reparam_phi,
    reparam_slope,
    type_B_step,
)
from .state import HomotopyState, Key

__all__ = [
    "ABORT_TOL",
    "ConstantsLedger",
    "DescentDirection",
    "FlowStepResult",
    "HomotopyState",
    "Key",
    "OGCReport",
    "build_ledger",
    "check_top_ogc",
    "chord_residual",
    "compute_lambda1",
    "curve_F",
    "cutoff_chi",
    "descent_direction_vplus",
    "field_norm",
    "find_nonessential",
    "first_deformation",
    "interval_products",
    "inward_field",
    "nest_map",
    "optimal_shift",
    "owned_weights",
    "reparam_energy",
    "reparam_parameters",
    "reparam_phi",
    "reparam_slope",
    "top_interval",
    "top_portion",
    "type_A_step",
    "type_B_step",
    "type_C_step",
    "with_band",
]
