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
"""The functional over homotopy states, the level search and chord extraction"""
from chordflow.flows import HomotopyState

from .chords import (
    ChordResult,
    chord_distance,
    chord_from_report,
    chord_from_shot,
    dedup_chords,
    polish_chord,
    scan_normal_chords,
)
from .homotopy import (
    AdmissionCheck,
    StateTransition,
    concatenate,
    functional_F,
    h1_admissible,
    identity_transition,
    is_equivariant,
    same_state,
    transition,
)
from .solver import ExistenceReport, solve_existence

__all__ = [
    "AdmissionCheck",
    "ChordResult",
    "ExistenceReport",
    "HomotopyState",
    "StateTransition",
    "chord_distance",
    "chord_from_report",
    "chord_from_shot",
    "concatenate",
    "dedup_chords",
    "functional_F",
    "h1_admissible",
    "identity_transition",
    "is_equivariant",
    "polish_chord",
    "same_state",
    "scan_normal_chords",
    "solve_existence",
    "transition",
]
