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
"""Natural Hamiltonians, their Jacobi metrics and brake orbits"""
from .brake import (
    BrakeOrbit,
    BrakePipelineReport,
    EllipsoidReference,
    RhoResult,
    brake_orbit_from_chord,
    brake_pipeline,
    brake_symmetry_defect,
    dedup_orbits,
    ellipsoid_reference,
    hausdorff,
    lift_to_energy,
    refine_brake_orbit,
    shoot_brake,
    turning_point,
)
from .jacobi import jacobi_metric
from .system import (
    HamiltonTrajectory,
    NaturalHamiltonian,
    hamilton_flow,
    hamilton_step,
    regular_value_check,
    rk4_hamilton_step,
    yoshida_step,
)

__all__ = [
    "BrakeOrbit",
    "BrakePipelineReport",
    "EllipsoidReference",
    "HamiltonTrajectory",
    "NaturalHamiltonian",
    "RhoResult",
    "brake_orbit_from_chord",
    "brake_pipeline",
    "brake_symmetry_defect",
    "dedup_orbits",
    "ellipsoid_reference",
    "hamilton_flow",
    "hamilton_step",
    "hausdorff",
    "jacobi_metric",
    "lift_to_energy",
    "refine_brake_orbit",
    "regular_value_check",
    "rk4_hamilton_step",
    "shoot_brake",
    "turning_point",
    "yoshida_step",
]
