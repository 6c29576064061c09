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
Reparameterization steps (type B) near portions with constant heads or tails.

For a < c < b the "−" map squeezes x on [a, c] onto [a, c − τ] and stretches x on [c, b] over
[c − τ, b]; the "+" map moves the split to c + τ instead. Both leave the image of the curve and
its values outside (a, b) unchanged. With I_L = ∫_a^c g(ẋ, ẋ) and I_R = ∫_c^b g(ẋ, ẋ) the energy
of the reparameterized curve on [a, b] is

    (c − a)/(2(c − a ± τ))·I_L + (b − c)/(2(b − c ∓ τ))·I_R.
"""
import logging
import math
from typing import List, Literal, Optional, Tuple

import numpy as np

from chordflow.criticality import classify_portion, constant_runs
from chordflow.domain import DomainSpec
from chordflow.geometry import Array, MetricField
from chordflow.pathspace import DiscreteCurve, IntervalRecord, evaluate, speed_integral
from chordflow.utils.exceptions import (
    BadIntervalException,
    DegenerateSplitException,
    NotSecondTypeException,
    RejectedStepException,
)
from chordflow.utils.retry import base_backtrack

from .descent import FlowStepResult, curve_F, field_norm, interval_products
from .ledger import ConstantsLedger

_logger_ = logging.getLogger(__name__)

Sign = Literal["-", "+"]

MIN_GAIN = 1e-12


def _orient(sign: Sign) -> float:
    if sign not in ("-", "+"):
        raise ValueError(f"sign must be '-' or '+', got {sign!r}")
    return -1.0 if sign == "-" else 1.0


def reparam_parameters(s: Array, a: float, c: float, b: float, tau: float, sign: Sign) -> Array:
    """φ_{x,±}(τ, s) on an array of parameters"""
    if not a < c < b:
        raise DegenerateSplitException(f"split {c} not inside ({a}, {b})")
    moved = c + _orient(sign) * tau
    if not a < moved < b:
        raise DegenerateSplitException(f"moved split {moved} not inside ({a}, {b})")
    s = np.asarray(s, dtype=float)
    out = s.copy()
    left = (s > a) & (s <= moved)
    right = (s > moved) & (s < b)
    out[left] = (c - a) / (moved - a) * (s[left] - a) + a
    out[right] = (b - c) / (b - moved) * (s[right] - moved) + c
    return out


def reparam_phi(x: DiscreteCurve, a: float, c: float, b: float, tau: float, sign: Sign) -> DiscreteCurve:
    """x ∘ φ_{x,±}(τ, ·) sampled back onto the uniform grid"""
    if tau == 0.0:
        reparam_parameters(x.grid, a, c, b, 0.0, sign)
        return x
    return DiscreteCurve(evaluate(x, reparam_parameters(x.grid, a, c, b, tau, sign)))


def _integrals(x: DiscreteCurve, a: float, c: float, b: float, field_: Optional[MetricField]) -> Tuple[float, float]:
    return speed_integral(x, a, c, field_), speed_integral(x, c, b, field_)


def reparam_energy(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    x: DiscreteCurve,
    a: float,
    c: float,
    b: float,
    tau: float,
    sign: Sign,
    field_: Optional[MetricField] = None,
) -> float:
    """Closed form energy on [a, b] of the reparameterized curve"""
    moved = c + _orient(sign) * tau
    if not a < c < b or not a < moved < b:
        raise DegenerateSplitException(f"split {c} moved to {moved} not inside ({a}, {b})")
    left, right = _integrals(x, a, c, b, field_)
    return (c - a) / (2.0 * (moved - a)) * left + (b - c) / (2.0 * (b - moved)) * right


def reparam_slope(
    x: DiscreteCurve, a: float, c: float, b: float, sign: Sign, field_: Optional[MetricField] = None
) -> float:
    """τ-derivative of the reparameterized energy at τ = 0"""
    if not a < c < b:
        raise DegenerateSplitException(f"split {c} not inside ({a}, {b})")
    left, right = _integrals(x, a, c, b, field_)
    return _orient(sign) * (-left / (2.0 * (c - a)) + right / (2.0 * (b - c)))


def optimal_shift(left: float, right: float, a: float, c: float, b: float, sign: Sign) -> float:
    """τ minimizing the closed form energy, clipped into the admissible range"""
    A = 0.5 * (c - a) * left
    B = 0.5 * (b - c) * right
    if A + B == 0.0:
        return 0.0
    ra, rb = math.sqrt(A), math.sqrt(B)
    # the minimizer of A/(c − a + t) + B/(b − c − t) over signed shifts t
    t = ((b - c) * ra - (c - a) * rb) / (ra + rb)
    t = _orient(sign) * t
    limit = (c - a) if sign == "-" else (b - c)
    return float(min(max(t, 0.0), 0.999 * limit))


def _candidates(
    x: DiscreteCurve, spec: DomainSpec, ledger: ConstantsLedger
) -> List[Tuple[IntervalRecord, float, float, Sign]]:
    """(interval, c, slope, sign) for every interval with a constant head or tail"""
    out = []
    offset = max(1, round(ledger.theta_ell * x.n))
    for record, _ in interval_products(x, spec):
        if record.j - record.i < 3:
            continue
        head, tail = constant_runs(x, record.i, record.j)
        if head == 0 and tail == 0 or head + tail >= record.j - record.i:
            continue
        try:
            report = classify_portion(
                x, spec, record.a, record.b, threshold=math.inf, strict=False, d0=ledger.d0
            )
            if report.classification == "irregular_first_type":
                continue
        except BadIntervalException:
            pass
        if head >= tail:
            k, sign = min(record.i + head + offset, record.j - 1), "-"
        else:
            k, sign = max(record.j - tail - offset, record.i + 1), "+"
        c = k / x.n
        out.append((record, c, reparam_slope(x, record.a, c, record.b, sign, spec.field), sign))
    return out


def type_B_step(x: DiscreteCurve, spec: DomainSpec, ledger: ConstantsLedger) -> FlowStepResult:
    """Reparameterize the top interval with a constant head or tail towards its cheaper side"""
    F_before = curve_F(x, spec)
    candidates = [item for item in _candidates(x, spec, ledger) if item[2] < -MIN_GAIN]
    if not candidates:
        raise NotSecondTypeException("no interval admits a reparameterization descent")
    record, c, slope, sign = max(
        candidates, key=lambda item: (item[0].length * speed_integral(x, item[0].a, item[0].b, spec.field), -item[2])
    )
    left, right = _integrals(x, record.a, c, record.b, spec.field)
    start = optimal_shift(left, right, record.a, c, record.b, sign)
    if start <= 0.0:
        raise NotSecondTypeException(f"zero gain at split {c} of [{record.a}, {record.b}]")
    before = record.length * 0.5 * (left + right)

    def trial(tau: float) -> Tuple[DiscreteCurve, float]:
        y = reparam_phi(x, record.a, c, record.b, tau, sign)
        after = record.length * 0.5 * speed_integral(y, record.a, record.b, spec.field)
        if after >= before + 1e-4 * tau * record.length * slope:
            raise RejectedStepException(f"interval product {after:.12g} did not decrease")
        F_after = curve_F(y, spec)
        if F_after > F_before + 1e-12 * max(1.0, F_before):
            raise RejectedStepException(f"F {F_after:.12g} increased")
        return y, F_after

    (y, F_after), tau = base_backtrack(trial, start, log_func=_logger_.debug)
    _logger_.debug("type B on [%s, %s], split %s, sign %s, tau %s", record.a, record.b, c, sign, tau)
    return FlowStepResult(
        curve=y,
        F_before=F_before,
        F_after=F_after,
        step_kind="B",
        displacement_h1=field_norm(y.nodes - x.nodes, x.n),
        interval_map=[(k, k) for k in range(len(interval_products(y, spec)))],
        tau=tau,
    )
