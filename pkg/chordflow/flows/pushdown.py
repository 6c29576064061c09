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
"""Push-down steps (type C) clearing topologically non-essential intervals."""
import logging
from typing import List, Tuple

import numpy as np

from chordflow.criticality import find_nonessential_intervals
from chordflow.domain import DomainSpec
from chordflow.pathspace import DiscreteCurve, IntervalRecord
from chordflow.utils.exceptions import (
    NoNonessentialException,
    RejectedStepException,
    StalledException,
)
from chordflow.utils.retry import base_backtrack

from .descent import FlowStepResult, curve_F, field_norm
from .ledger import ConstantsLedger

_logger_ = logging.getLogger(__name__)

MAX_PUSHES = 400


def find_nonessential(x: DiscreteCurve, spec: DomainSpec, ledger: ConstantsLedger) -> List[IntervalRecord]:
    return find_nonessential_intervals(x, spec, ledger.delta_bar, ledger.sigma1, ledger.gamma_bar)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u**2)


def inward_field(x: DiscreteCurve, spec: DomainSpec, ledger: ConstantsLedger, mask: np.ndarray) -> np.ndarray:
    """−w(φ)·∇φ/|∇φ| on the masked nodes.

    w vanishes for φ ≤ −δ̄ + ε₀ and is 1 above −δ̄ + 2ε₀."""
    V = np.zeros_like(x.nodes)
    nodes = x.nodes[mask]
    if len(nodes) == 0:
        return V
    phi = spec.phi(nodes)
    weight = _smoothstep((phi + ledger.delta_bar - ledger.eps0) / ledger.eps0)
    unit = spec.unit_gradient(nodes)
    V[mask] = -weight[:, None] * unit
    return V


def type_C_step(  # pylint: disable=too-many-locals
    x: DiscreteCurve, spec: DomainSpec, ledger: ConstantsLedger, max_pushes: int = MAX_PUSHES
) -> FlowStepResult:
    """Push the nodes of every non-essential interval inwards until they sit below −σ₁/2"""
    records = find_nonessential(x, spec, ledger)
    if not records:
        raise NoNonessentialException("no topologically non-essential interval")
    mask = np.zeros(x.n + 1, dtype=bool)
    for record in records:
        mask[record.i + 1 : record.j] = True
    target = -0.5 * ledger.sigma1
    F_before = curve_F(x, spec)
    y, F_current, duration = x, F_before, 0.0
    for _ in range(max_pushes):
        if float(np.max(spec.phi(y.nodes[mask]))) <= target:
            break
        V = inward_field(y, spec, ledger, mask)
        size = field_norm(V, x.n)
        if size == 0.0:
            break
        V *= 0.5 * ledger.rho0 / size
        base = y

        def trial(
            step: float, base: DiscreteCurve = base, V: np.ndarray = V, F_ref: float = F_current
        ) -> Tuple[DiscreteCurve, float]:
            z = DiscreteCurve(base.nodes + step * V)
            if np.any(spec.phi(z.nodes[mask]) > spec.boundary_tol):
                raise RejectedStepException("a pushed node left the closed domain")
            F_after = curve_F(z, spec)
            if F_after > F_ref + 1e-12 * max(1.0, F_ref):
                raise RejectedStepException(f"F {F_after:.12g} increased")
            return z, F_after

        try:
            (y, F_current), step = base_backtrack(trial, 1.0, log_func=_logger_.debug)
        except RejectedStepException as e:
            raise StalledException(f"push-down stalled at phi {float(np.max(spec.phi(y.nodes[mask]))):.3e}", y) from e
        duration += step
    if float(np.max(spec.phi(y.nodes[mask]))) > target:
        raise StalledException(f"push-down did not reach {target:.3e} within {max_pushes} pushes", y)
    _logger_.debug("type C cleared %s intervals in duration %s", len(records), duration)
    return FlowStepResult(
        curve=y,
        F_before=F_before,
        F_after=F_current,
        step_kind="C",
        displacement_h1=field_norm(y.nodes - x.nodes, x.n),
        interval_map=[(k, k) for k in range(len(records))],
        tau=duration,
    )
