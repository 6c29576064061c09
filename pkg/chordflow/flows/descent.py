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
Outward-pushing energy descent (type A steps).

Every maximal interval away from criticality contributes the steepest descent direction of its
energy inside the cone of outward contact variations, normalized to H¹ norm ½. Its nodes and the
nearer half of the outside runs next to it follow that direction. On top of it all nodes drift
along λ·χ(φ)·∇φ, which lifts every contact point off the boundary.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from chordflow.criticality import vplus_descent
from chordflow.domain import DomainSpec
from chordflow.geometry import Array, discrete_energy_gradient
from chordflow.pathspace import DiscreteCurve, IntervalRecord, energy, maximal_intervals
from chordflow.utils.exceptions import (
    BadIntervalException,
    LeftMException,
    PreconditionUnmetException,
    RejectedStepException,
    ShortIntervalException,
    TooCloseToCriticalException,
)
from chordflow.utils.retry import base_backtrack

from .ledger import ConstantsLedger

_logger_ = logging.getLogger(__name__)

ARMIJO = 1e-4
DIRECTION_NORM = 0.5
CHART_MARGIN = 1e-6


def cutoff_chi(t: Array, delta0: float) -> Array:
    """C² cutoff: 1 for t ≤ δ₀/2, 0 for t ≥ 3δ₀/4, quintic smoothstep in between"""
    u = np.clip((np.asarray(t, dtype=float) - 0.5 * delta0) / (0.25 * delta0), 0.0, 1.0)
    return 1.0 - u**3 * (10.0 - 15.0 * u + 6.0 * u**2)


def field_norm(V: Array, n: int) -> float:
    """‖V‖ = (½ max(|V_first|², |V_last|²) + ½∫|V'|²)^½ with Euclidean chart norms"""
    if len(V) < 2:
        return 0.0
    ends = max(float(V[0] @ V[0]), float(V[-1] @ V[-1]))
    kinetic = float(np.sum(np.diff(V, axis=0) ** 2)) * n
    return math.sqrt(0.5 * (ends + kinetic))


def interval_products(x: DiscreteCurve, spec: DomainSpec) -> List[Tuple[IntervalRecord, float]]:
    """Maximal intervals with their (b − a)·f_{a,b} values"""
    return [
        (record, record.length * energy(x, record.a, record.b, spec.field))
        for record in maximal_intervals(x, spec)
    ]


def curve_F(x: DiscreteCurve, spec: DomainSpec) -> float:
    """max over ℐ_x of (b − a)/2 ∫_a^b g(ẋ, ẋ); zero when x never enters the closed domain"""
    products = [p for _, p in interval_products(x, spec)]
    return max(products) if products else 0.0


@dataclass(frozen=True)
class DescentDirection:
    """V on the whole curve with the rates it achieves on its interval"""

    field: Array
    interval: Tuple[int, int]
    theta: float
    mu: float
    residual: float
    first_variation: float


def descent_direction_vplus(
    x: DiscreteCurve, spec: DomainSpec, ledger: ConstantsLedger, a: float, b: float
) -> DescentDirection:
    """Cone descent on [a, b] with an outward boost near the boundary, H¹ norm ½.

    Outside [a, b] the field is extended by its end values."""
    i, j = x.span(a, b)
    if (b - a) * energy(x, a, b, spec.field) < ledger.short_interval_floor:
        raise ShortIntervalException(f"[{a}, {b}] is below the level floor {ledger.short_interval_floor:.3e}")
    cone = vplus_descent(x, spec, a, b, require_ends=False)
    if cone.residual < ledger.r_band:
        raise TooCloseToCriticalException(f"residual {cone.residual:.3e} on [{a}, {b}] is inside the band")
    nodes = x.nodes[i : j + 1]
    gradient = discrete_energy_gradient(spec.field, nodes, x.n)
    unit = spec.unit_gradient(nodes)
    weight = np.clip(1.0 - np.abs(spec.phi(nodes)) / ledger.kappa_r, 0.0, 1.0)
    push = weight[:, None] * unit
    V = cone.field
    slope = float(np.sum(gradient * V))
    beta = field_norm(V, x.n)
    while beta > 1e-12 * field_norm(V, x.n):
        boosted = V + beta * push
        if float(np.sum(gradient * boosted)) <= 0.5 * slope:
            V = boosted
            break
        beta *= 0.5
    V = V * (DIRECTION_NORM / field_norm(V, x.n))
    first_variation = float(np.sum(gradient * V))
    near = (weight > 0.0) & (spec.grad_norm(nodes) > spec.gradient_floor)
    dphi = spec.dphi(nodes)
    theta = (
        float(np.min(np.einsum("ka,ka->k", dphi[near], V[near]) / spec.grad_norm(nodes[near])))
        / DIRECTION_NORM
        if np.any(near)
        else math.inf
    )
    full = np.empty_like(x.nodes)
    full[i : j + 1] = V
    full[:i] = V[0]
    full[j + 1 :] = V[-1]
    return DescentDirection(full, (i, j), theta, -first_variation / DIRECTION_NORM, cone.residual, first_variation)


@dataclass(frozen=True)
class FlowStepResult:  # pylint: disable=too-many-instance-attributes
    curve: DiscreteCurve
    F_before: float
    F_after: float
    step_kind: str
    displacement_h1: float
    interval_map: List[Tuple[int, int]] = field(default_factory=list)
    tau: float = 0.0
    truncated: bool = False


def owned_weights(records: List[IntervalRecord], n: int) -> List[Array]:
    """Per-interval node weights: 1 on the interval and the nearer half of adjacent outside runs"""
    weights = []
    for k, record in enumerate(records):
        w = np.zeros(n + 1)
        w[record.i : record.j + 1] = 1.0
        left = records[k - 1].j if k > 0 else None
        right = records[k + 1].i if k + 1 < len(records) else None
        for m in range(0, record.i):
            if left is None or m - left > record.i - m:
                w[m] = 1.0
            elif m - left == record.i - m:
                w[m] = 0.5
        for m in range(record.j + 1, n + 1):
            if right is None or right - m > m - record.j:
                w[m] = 1.0
            elif right - m == m - record.j:
                w[m] = 0.5
        weights.append(w)
    return weights


def nest_map(before: List[IntervalRecord], after: List[IntervalRecord]) -> Optional[List[Tuple[int, int]]]:
    """(before index, after index) pairs, None if some after-interval sticks out of every before-interval"""
    pairs = []
    for k, record in enumerate(after):
        host = [m for m, b in enumerate(before) if b.i <= record.i and record.j <= b.j]
        if not host:
            return None
        pairs.append((host[0], k))
    return pairs


def _check_growth(x: DiscreteCurve, spec: DomainSpec, ledger: ConstantsLedger) -> None:
    for record in maximal_intervals(x, spec):
        value = energy(x, record.a, record.b, spec.field)
        if value >= ledger.M0:
            raise LeftMException(f"energy {value:.6g} on [{record.a}, {record.b}] reached M0 = {ledger.M0:.6g}")


def type_A_step(  # pylint: disable=too-many-locals
    x: DiscreteCurve,
    spec: DomainSpec,
    ledger: ConstantsLedger,
    tau: float,
    level: Optional[float] = None,
) -> FlowStepResult:
    """One accepted step of x along W = ΣV + λ·χ(φ)·∇φ.

    Intervals with (b − a)·f below ``level`` only drift. The step is halved until F decreases
    by the Armijo margin, the intervals nest and every contact node moves outwards."""
    if not 0.0 < tau <= ledger.T_eps:
        raise PreconditionUnmetException(f"tau {tau} outside (0, {ledger.T_eps}]")
    products = interval_products(x, spec)
    records = [r for r, _ in products]
    F_before = max((p for _, p in products), default=0.0)
    W = np.zeros_like(x.nodes)
    top_slope = 0.0
    for (record, product), weight in zip(products, owned_weights(records, x.n)):
        if level is not None and product < level:
            continue
        try:
            direction = descent_direction_vplus(x, spec, ledger, record.a, record.b)
        except (ShortIntervalException, TooCloseToCriticalException, BadIntervalException) as e:
            _logger_.debug("no descent on [%s, %s]: %s", record.a, record.b, e)
            continue
        W += weight[:, None] * direction.field
        if product >= F_before - 1e-12:
            top_slope = min(top_slope, record.length * direction.first_variation)
    phi = spec.phi(x.nodes)
    W += ledger.lambda_ * cutoff_chi(phi, ledger.delta0)[:, None] * spec.grad_phi(x.nodes)
    size = field_norm(W, x.n)
    if size > 1.0:
        W /= size
    outside = ~spec.field.chart_domain.contains(x.nodes + tau * W, margin=CHART_MARGIN)
    truncated = bool(np.any(outside))
    if truncated:
        _logger_.warning("descent field truncated at %s nodes near the chart margin", int(np.sum(outside)))
        W[outside] = 0.0
    contact = np.abs(phi) <= spec.boundary_tol

    def trial(step: float) -> Tuple[DiscreteCurve, float, List[Tuple[int, int]]]:
        y = DiscreteCurve(x.nodes + step * W)
        after = maximal_intervals(y, spec)
        mapping = nest_map(records, after)
        if mapping is None:
            raise RejectedStepException("intervals do not nest")
        if np.any(spec.phi(y.nodes[contact]) <= phi[contact]):
            raise RejectedStepException("a contact node did not move outwards")
        F_after = curve_F(y, spec)
        if F_after > F_before + ARMIJO * step * top_slope + 1e-12 * max(1.0, F_before):
            raise RejectedStepException(f"F {F_after:.12g} above the Armijo bound")
        return y, F_after, mapping

    (y, F_after, mapping), accepted = base_backtrack(trial, tau, log_func=_logger_.debug)
    _check_growth(y, spec, ledger)
    return FlowStepResult(
        curve=y,
        F_before=F_before,
        F_after=F_after,
        step_kind="A",
        displacement_h1=field_norm(y.nodes - x.nodes, x.n),
        interval_map=mapping,
        tau=accepted,
        truncated=truncated,
    )
