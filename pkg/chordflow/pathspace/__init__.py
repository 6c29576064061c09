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
"""Discrete curves, maximal intervals and the generated path family"""
from .curve import (
    DiscreteCurve,
    constant_curve,
    constant_speed,
    discrete_geodesic,
    energy,
    energy_gradient,
    evaluate,
    h1_norm,
    resample,
    reverse,
    segment_curve,
    speed_integral,
    sup_norm,
)
from .family import (
    ChordGenerator,
    LengthBoundCheck,
    PathFamily,
    check_in_M0,
    chord_generator,
    compute_M0,
    depth_length_check,
    in_M,
)
from .intervals import (
    IntervalRecord,
    cell_crossings,
    maximal_intervals,
    node_runs,
    portion_curve,
    refine_crossings,
)

__all__ = [
    "ChordGenerator",
    "DiscreteCurve",
    "IntervalRecord",
    "LengthBoundCheck",
    "PathFamily",
    "cell_crossings",
    "check_in_M0",
    "chord_generator",
    "compute_M0",
    "constant_curve",
    "constant_speed",
    "depth_length_check",
    "discrete_geodesic",
    "energy",
    "energy_gradient",
    "evaluate",
    "h1_norm",
    "in_M",
    "maximal_intervals",
    "node_runs",
    "portion_curve",
    "refine_crossings",
    "resample",
    "reverse",
    "segment_curve",
    "speed_integral",
    "sup_norm",
]
