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
"""δ-intervals, δ̄-close intervals, the bending constant and non-essential intervals."""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from chordflow.domain import DomainSpec, project_to_boundary
from chordflow.pathspace import DiscreteCurve, IntervalRecord, evaluate, node_runs
from chordflow.utils.exceptions import BadDepthsException, NotDeltaBarCloseException

_logger_ = logging.getLogger(__name__)


def delta_intervals(
    x: DiscreteCurve, spec: DomainSpec, delta: float, d_small: float = 0.0, tol: float = 1e-7
) -> List[IntervalRecord]:
    """(δ, 𝔡)-intervals with node endpoints; ``minimal`` marks those containing no other one"""
    if not 0.0 < delta or (spec.delta0 > 0.0 and delta > spec.delta0 + tol):
        raise BadDepthsException(f"delta = {delta} outside (0, {spec.delta0}]")
    if not 0.0 <= d_small < delta:
        raise BadDepthsException(f"d_small = {d_small} outside [0, {delta})")
    phi = spec.phi(x.nodes)
    ends = np.flatnonzero(np.abs(phi + d_small) <= tol)
    found: List[Tuple[int, int]] = []
    for start in ends:
        lowest = phi[start]
        for k in range(start + 1, x.n + 1):
            if phi[k] < -delta - tol:
                break
            lowest = min(lowest, phi[k])
            if abs(phi[k] + d_small) <= tol and lowest <= -delta + tol:
                found.append((int(start), k))
    records = []
    for i, j in found:
        minimal = not any(i <= p and q <= j and (p, q) != (i, j) for p, q in found)
        records.append(
            IntervalRecord(
                a=i / x.n,
                b=j / x.n,
                i=i,
                j=j,
                kind="sub",
                boundary_flags=(bool(abs(phi[i]) <= tol), bool(abs(phi[j]) <= tol)),
                minimal=minimal,
            )
        )
    return records


def _level_crossing(phi_in: float, phi_out: float, level: float) -> float:
    return (phi_in - level) / (phi_in - phi_out)


def delta_bar_close_intervals(
    x: DiscreteCurve, spec: DomainSpec, delta_bar: float
) -> List[IntervalRecord]:
    """Minimal [α, β] with φ(x(α)) = φ(x(β)) = −δ̄ and φ > −δ̄ strictly between them.

    α and β are the linear crossings of −δ̄ inside the bounding cells."""
    phi = spec.phi(x.nodes)
    above = phi > -delta_bar
    records = []
    k = 0
    while k <= x.n:
        if not above[k]:
            k += 1
            continue
        first = k
        while k + 1 <= x.n and above[k + 1]:
            k += 1
        last = k
        k += 1
        if first == 0 or last == x.n:
            continue
        alpha = (first - 1 + _level_crossing(phi[first - 1], phi[first], -delta_bar)) / x.n
        beta = (last + 1 - _level_crossing(phi[last + 1], phi[last], -delta_bar)) / x.n
        records.append(
            IntervalRecord(a=alpha, b=beta, i=first - 1, j=last + 1, kind="sub", minimal=True)
        )
    return records


def is_delta_bar_close(
    x: DiscreteCurve, spec: DomainSpec, alpha: float, beta: float, delta_bar: float, tol: float = 1e-6
) -> bool:
    ends = spec.phi(evaluate(x, [alpha, beta]))
    inside = (x.grid > alpha) & (x.grid < beta)
    phi = spec.phi(x.nodes[inside])
    return bool(
        np.all(np.abs(ends + delta_bar) <= tol)
        and np.all(phi >= -delta_bar - tol)
        and np.any(phi > -delta_bar)
    )


def bending_and_proximity(
    x: DiscreteCurve,
    spec: DomainSpec,
    alpha: float,
    beta: float,
    delta_bar: Optional[float] = None,
) -> Tuple[float, float]:
    """(𝔟, 𝔭) on [α, β], Euclidean chart norms; 𝔟 = +∞ when x(α) = x(β)"""
    if delta_bar is not None and not is_delta_bar_close(x, spec, alpha, beta, delta_bar):
        raise NotDeltaBarCloseException(f"x is not {delta_bar}-close to the boundary on [{alpha}, {beta}]")
    xa, xb = evaluate(x, [alpha, beta])
    inside = (x.grid > alpha) & (x.grid < beta)
    proximity = float(np.max(spec.phi(np.vstack([xa[None], x.nodes[inside], xb[None]]))))
    if np.array_equal(xa, xb):
        return math.inf, proximity
    pa = project_to_boundary(spec, xa)
    pb = project_to_boundary(spec, xb)
    numerator = max(float(np.linalg.norm(xb - pa)), float(np.linalg.norm(xa - pb)))
    denominator = float(np.linalg.norm(pa - pb))
    if denominator == 0.0:
        return math.inf, proximity
    return numerator / denominator, proximity


def find_nonessential_intervals(
    x: DiscreteCurve,
    spec: DomainSpec,
    delta_bar: float,
    sigma1: float,
    gamma_bar: float,
) -> List[IntervalRecord]:
    """δ̄-close intervals inside a run of the closed domain with 𝔭 ≥ −σ₁ and 𝔟 ≥ 1 + 3γ̄/2"""
    phi = spec.phi(x.nodes)
    runs = node_runs(phi, spec.boundary_tol)
    out = []
    for record in delta_bar_close_intervals(x, spec, delta_bar):
        if not any(i <= record.i and record.j <= j for i, j in runs):
            continue
        bending, proximity = bending_and_proximity(x, spec, record.a, record.b)
        if proximity >= -sigma1 and bending >= 1.0 + 1.5 * gamma_bar:
            out.append(record)
    _logger_.debug("%s topologically non-essential intervals", len(out))
    return out
