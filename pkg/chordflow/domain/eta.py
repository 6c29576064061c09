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
Normalized gradient flows of φ and the projection onto the boundary.

Along dη/dτ = ±∇φ/|∇φ|² the boundary function changes at unit rate, so φ(η(τ)) = φ(x) ± τ.
"""
import logging
import math
from typing import Literal

import numpy as np

from chordflow.geometry import Array
from chordflow.utils.exceptions import LeftShellException, OutOfShellException

from .spec import DomainSpec

_logger_ = logging.getLogger(__name__)

Direction = Literal["+", "-"]

MAX_FLOW_STEP = 5e-3
SHELL_SLACK = 1e-9


def _velocity(spec: DomainSpec, q: Array) -> Array:
    grad = spec.grad_phi(q)
    sq = np.einsum("...i,...i->...", spec.dphi(q), grad)
    sq = np.where(sq > spec.gradient_floor**2, sq, np.nan)
    return grad / sq[..., None]


def _rk4(spec: DomainSpec, q: Array, h: Array) -> Array:
    k1 = _velocity(spec, q)
    k2 = _velocity(spec, q + 0.5 * h * k1)
    k3 = _velocity(spec, q + 0.5 * h * k2)
    k4 = _velocity(spec, q + h * k3)
    return q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _sign(direction: Direction) -> float:
    if direction == "+":
        return 1.0
    if direction == "-":
        return -1.0
    raise ValueError(f"direction must be '+' or '-', got {direction!r}")


def flow_eta(spec: DomainSpec, x: Array, tau: float, direction: Direction = "+") -> Array:
    """η±(τ, x) by fixed-step RK4.

    When the domain carries a shell depth the trajectory must stay in {|φ| ≤ δ₀}; otherwise
    LeftShellException reports the last τ inside."""
    signed = _sign(direction) * float(tau)
    q = np.array(x, dtype=float)
    if signed == 0.0:
        return q
    count = max(int(math.ceil(abs(signed) / MAX_FLOW_STEP)), 1)
    h = signed / count
    shell = spec.delta0 + SHELL_SLACK if spec.delta0 > 0.0 else math.inf
    if abs(float(spec.phi(q))) > shell:
        raise LeftShellException(f"start point has phi = {float(spec.phi(q)):.6g} outside the shell", 0.0)
    for i in range(count):
        nxt = _rk4(spec, q, np.asarray(h))
        if not np.all(np.isfinite(nxt)) or not bool(spec.field.chart_domain.contains(nxt)):
            raise LeftShellException(f"eta flow degenerated after tau = {i * abs(h):.6g}", i * abs(h))
        if abs(float(spec.phi(nxt))) > shell:
            raise LeftShellException(f"eta flow left the shell at tau = {(i + 1) * abs(h):.6g}", (i + 1) * abs(h))
        q = nxt
    return q


def flow_eta_batch(spec: DomainSpec, X: Array, taus: Array) -> Array:
    """Signed η flow of every row of X by its own τ; no shell check, failed rows become NaN.

    Rows with τ = 0 are returned untouched, even where ∇φ vanishes."""
    q = np.array(X, dtype=float)
    taus = np.asarray(taus, dtype=float)
    finite = np.isfinite(taus)
    q[~finite] = np.nan
    moving = finite & (taus != 0.0)
    if not np.any(moving):
        return q
    count = max(int(math.ceil(float(np.max(np.abs(taus[moving]))) / MAX_FLOW_STEP)), 1)
    rows = q[moving]
    h = (taus[moving] / count)[:, None]
    alive = np.ones(len(rows), dtype=bool)
    for _ in range(count):
        nxt = _rk4(spec, rows, h)
        ok = np.all(np.isfinite(nxt), axis=1)
        ok[ok] = spec.field.chart_domain.contains(nxt[ok])
        alive &= ok
        rows = np.where(alive[:, None], nxt, rows)
    rows[~alive] = np.nan
    q[moving] = rows
    return q


def _polish(spec: DomainSpec, q: Array, tol: float = 1e-12) -> Array:
    for _ in range(8):
        value = float(spec.phi(q))
        if abs(value) < tol:
            break
        grad = spec.grad_phi(q)
        q = q - value * grad / float(spec.dphi(q) @ grad)
    return q


def project_to_boundary(spec: DomainSpec, x: Array) -> Array:
    """π(x) = η⁺(−φ(x), x), polished by Newton steps along ∇φ"""
    x = np.asarray(x, dtype=float)
    value = float(spec.phi(x))
    if spec.delta0 > 0.0:
        if abs(value) > spec.delta0 + SHELL_SLACK:
            raise OutOfShellException(f"phi = {value:.6g} outside [-{spec.delta0:.6g}, {spec.delta0:.6g}]")
    elif value > spec.boundary_tol:
        raise OutOfShellException(f"phi = {value:.6g} is outside the domain")
    if abs(value) < 1e-12:
        return x.copy()
    try:
        q = flow_eta(spec, x, -value, "+")
    except LeftShellException as e:
        raise OutOfShellException(f"projection of {x.tolist()} failed: {e}") from e
    return _polish(spec, q)
