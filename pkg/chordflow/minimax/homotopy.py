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
"""
State transitions between homotopy states and the admission checks of the deformation class.

A transition records its end states, the A/B/C segments it went through and its duration.
Concatenation runs the first transition on the first part of the unit interval and the second
one on the rest, in proportion to their durations.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from chordflow.criticality import bending_and_proximity
from chordflow.domain import DomainSpec
from chordflow.flows import ConstantsLedger, HomotopyState, curve_F, find_nonessential
from chordflow.pathspace import check_in_M0, energy, maximal_intervals
from chordflow.utils.exceptions import (
    CurveLeftMException,
    MismatchException,
    NotInM0Exception,
)

_logger_ = logging.getLogger(__name__)


@dataclass(frozen=True)
class StateTransition:
    initial: HomotopyState
    final: HomotopyState
    tags: Tuple[str, ...] = ()
    duration: float = 0.0
    junctions: Tuple[float, ...] = ()


def identity_transition(state: HomotopyState) -> StateTransition:
    return StateTransition(initial=state, final=state)


def transition(before: HomotopyState, after: HomotopyState, duration: Optional[float] = None) -> StateTransition:
    """Transition between two states of one deformation run, tags read off the tag log"""
    tags = tuple(after.tag_log[len(before.tag_log) :])
    if duration is None:
        duration = float(after.iterations - before.iterations)
    return StateTransition(initial=before, final=after, tags=tags, duration=duration)


def same_state(first: HomotopyState, second: HomotopyState) -> bool:
    if first is second:
        return True
    if set(first.current) != set(second.current):
        return False
    return all(np.array_equal(first.current[k].nodes, second.current[k].nodes) for k in first.current)


def concatenate(h1: StateTransition, h2: StateTransition) -> StateTransition:
    """h1 followed by h2 on one time interval"""
    if not same_state(h1.final, h2.initial):
        raise MismatchException("the first transition does not end where the second one starts")
    total = h1.duration + h2.duration
    if total == 0.0:
        return StateTransition(h1.initial, h2.final, h1.tags + h2.tags, 0.0, h1.junctions + h2.junctions)
    cut = h1.duration / total
    junctions = tuple(cut * t for t in h1.junctions)
    if h1.duration > 0.0 and h2.duration > 0.0:
        junctions += (cut,)
    junctions += tuple(cut + (1.0 - cut) * t for t in h2.junctions)
    return StateTransition(h1.initial, h2.final, h1.tags + h2.tags, total, junctions)


def is_equivariant(state: HomotopyState) -> bool:
    """Reversed seeds carry reversed curves and constant seeds carry constant curves"""
    for (i, j), curve in state.current.items():
        if i == j:
            if np.max(np.abs(curve.nodes - curve.nodes[0])) > 0.0:
                return False
            continue
        mirror = state.current.get((j, i))
        if mirror is None or not np.array_equal(mirror.nodes, curve.nodes[::-1]):
            return False
    return True


def functional_F(state: HomotopyState, spec: DomainSpec, M0: Optional[float] = None) -> float:
    """sup over seeds and maximal intervals of (b − a)·f_{a,b}; seeds are visited in sorted order"""
    best = 0.0
    for key in sorted(state.current):
        x = state.current[key]
        try:
            check_in_M0(x, spec)
            records = maximal_intervals(x, spec)
        except NotInM0Exception as e:
            raise CurveLeftMException(f"seed {key}: {e}") from e
        if M0 is not None:
            for record in records:
                value = energy(x, record.a, record.b, spec.field)
                if value >= M0:
                    raise CurveLeftMException(
                        f"seed {key}: energy {value:.6g} on [{record.a}, {record.b}] reached {M0:.6g}"
                    )
        best = max(best, curve_F(x, spec))
    return best


@dataclass(frozen=True)
class AdmissionCheck:
    constant_seeds_fixed: bool
    equivariant: bool
    nonessential_depth: bool

    @property
    def admissible(self) -> bool:
        return self.constant_seeds_fixed and self.equivariant and self.nonessential_depth


def h1_admissible(state: HomotopyState, spec: DomainSpec, ledger: ConstantsLedger) -> AdmissionCheck:
    """Constant seeds, equivariance and depth ≤ −σ₁/2 on every non-essential interval"""
    constant = all(
        np.array_equal(state.current[key].nodes, state.seeds.curves[key].nodes)
        for key in state.current
        if key[0] == key[1] and key in state.seeds.curves
    )
    depth_ok = True
    for key in state.evolving_keys():
        x = state.current[key]
        for record in find_nonessential(x, spec, ledger):
            _, proximity = bending_and_proximity(x, spec, record.a, record.b)
            if proximity > -0.5 * ledger.sigma1:
                _logger_.debug("seed %s has a non-essential interval at depth %s", key, proximity)
                depth_ok = False
                break
        if not depth_ok:
            break
    return AdmissionCheck(constant and state.constant_seeds_fixed, is_equivariant(state), depth_ok)
