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
Natural Hamiltonians H(q, p) = ½ a^{ij}(q) p_i p_j + V(q) and their flows.

With a constant kinetic matrix the flow is integrated by the fourth order Yoshida composition
of leapfrog steps; otherwise by classical RK4. Both report the energy drift along the run.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from chordflow.geometry import Array
from chordflow.utils.exceptions import EnergyDriftException, ZeroLambdaException

_logger_ = logging.getLogger(__name__)

BatchMap = Callable[[Array], Array]

DRIFT_TOL = 1e-7
A_STEP = 1e-6

_CBRT2 = 2.0 ** (1.0 / 3.0)
_W1 = 1.0 / (2.0 - _CBRT2)
_W0 = -_CBRT2 / (2.0 - _CBRT2)
YOSHIDA_DRIFTS = (0.5 * _W1, 0.5 * (_W0 + _W1), 0.5 * (_W0 + _W1), 0.5 * _W1)
YOSHIDA_KICKS = (_W1, _W0, _W1)


@dataclass(frozen=True)
class NaturalHamiltonian:  # pylint: disable=too-many-instance-attributes
    """Kinetic matrix a^{ij} (constant ``a_matrix`` or position dependent ``a_upper``) and potential V"""

    dim: int
    V_eval: BatchMap
    dV_eval: BatchMap
    E: float
    a_matrix: Optional[Array] = None
    a_upper: Optional[BatchMap] = None
    hess_V_eval: Optional[BatchMap] = None
    inf_V: float = 0.0
    chart_radius: float = 10.0
    name: str = "natural"

    @property
    def constant_kinetic(self) -> bool:
        return self.a_upper is None

    def a(self, q: Array) -> Array:
        q = np.asarray(q, dtype=float)
        if self.a_upper is not None:
            return np.asarray(self.a_upper(q), dtype=float)
        base = np.eye(self.dim) if self.a_matrix is None else np.asarray(self.a_matrix, dtype=float)
        return np.broadcast_to(base, q.shape[:-1] + (self.dim, self.dim)).copy()

    def a_lower(self, q: Array) -> Array:
        """ℒ(q), the inverse of a(q)"""
        return np.linalg.inv(self.a(q))

    def potential(self, q: Array) -> Array:
        return np.asarray(self.V_eval(np.asarray(q, dtype=float)), dtype=float)

    def grad_V(self, q: Array) -> Array:
        return np.asarray(self.dV_eval(np.asarray(q, dtype=float)), dtype=float)

    def hess_V(self, q: Array) -> Array:
        q = np.asarray(q, dtype=float)
        if self.hess_V_eval is not None:
            return np.asarray(self.hess_V_eval(q), dtype=float)
        h = 1e-6 * self.chart_radius
        cols = []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = h
            cols.append((self.grad_V(q + e) - self.grad_V(q - e)) / (2.0 * h))
        return np.stack(cols, axis=-1)

    def kinetic(self, q: Array, p: Array) -> Array:
        return 0.5 * np.einsum("...i,...ij,...j->...", p, self.a(q), p)

    def energy(self, q: Array, p: Array) -> Array:
        return self.kinetic(q, p) + self.potential(q)

    def velocity(self, q: Array, p: Array) -> Array:
        """q̇ = a(q) p"""
        return np.einsum("...ij,...j->...i", self.a(q), p)

    def momentum(self, q: Array, qdot: Array) -> Array:
        """p = ℒ(q) q̇"""
        return np.einsum("...ij,...j->...i", self.a_lower(q), qdot)

    def force(self, q: Array, p: Array) -> Array:
        """ṗ = −∂H/∂q"""
        out = -self.grad_V(q)
        if self.a_upper is None:
            return out
        h = A_STEP * self.chart_radius
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = h
            da = (self.a(q + e) - self.a(q - e)) / (2.0 * h)
            out[..., k] -= 0.5 * np.einsum("...i,...ij,...j->...", p, da, p)
        return out

    @staticmethod
    def ellipsoid(lambdas: Sequence[float], E: float, quartic: float = 0.0) -> "NaturalHamiltonian":
        """½|p|² + Σ λ_i² q_i² + β|q|⁴"""
        lam = np.asarray(lambdas, dtype=float)
        if np.any(lam == 0.0):
            raise ZeroLambdaException(f"zero frequency in {lam.tolist()}")
        weights = lam**2

        def V(q: Array) -> Array:
            r2 = np.sum(q**2, axis=-1)
            return np.sum(weights * q**2, axis=-1) + quartic * r2**2

        def dV(q: Array) -> Array:
            r2 = np.sum(q**2, axis=-1, keepdims=True)
            return 2.0 * weights * q + 4.0 * quartic * r2 * q

        def hess(q: Array) -> Array:
            r2 = np.sum(q**2, axis=-1)[..., None, None]
            eye = np.eye(len(lam))
            outer = np.einsum("...i,...j->...ij", q, q)
            return 2.0 * np.diag(weights) + 4.0 * quartic * (r2 * eye + 2.0 * outer)

        reach = math.sqrt(max(E, 0.0)) / float(np.min(np.abs(lam)))
        return NaturalHamiltonian(
            dim=len(lam),
            V_eval=V,
            dV_eval=dV,
            E=E,
            hess_V_eval=hess,
            chart_radius=max(1.5 * reach, 1.0),
            name="ellipsoid",
        )


def regular_value_check(ham: NaturalHamiltonian, count: int = 64, floor: float = 1e-8, seed: int = 0) -> bool:
    """|∇V| > floor on points of V⁻¹(E) found along rays from the origin"""
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(count, ham.dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    lo = np.zeros(count)
    hi = np.full(count, ham.chart_radius)
    if np.any(ham.potential(hi[:, None] * directions) < ham.E):
        return False
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        above = ham.potential(mid[:, None] * directions) >= ham.E
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    points = hi[:, None] * directions
    return bool(np.all(np.linalg.norm(ham.grad_V(points), axis=-1) > floor))


@dataclass(frozen=True)
class HamiltonTrajectory:
    times: Array
    q: Array
    p: Array
    drift: float


def yoshida_step(ham: NaturalHamiltonian, q: Array, p: Array, h: float) -> Tuple[Array, Array]:
    a = ham.a(q)
    for k, c in enumerate(YOSHIDA_DRIFTS):
        q = q + c * h * (a @ p)
        if k < 3:
            p = p + YOSHIDA_KICKS[k] * h * ham.force(q, p)
    return q, p


def rk4_hamilton_step(ham: NaturalHamiltonian, q: Array, p: Array, h: float) -> Tuple[Array, Array]:
    def rhs(q_: Array, p_: Array) -> Tuple[Array, Array]:
        return ham.velocity(q_, p_), ham.force(q_, p_)

    k1q, k1p = rhs(q, p)
    k2q, k2p = rhs(q + 0.5 * h * k1q, p + 0.5 * h * k1p)
    k3q, k3p = rhs(q + 0.5 * h * k2q, p + 0.5 * h * k2p)
    k4q, k4p = rhs(q + h * k3q, p + h * k3p)
    return (
        q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
        p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )


def hamilton_step(ham: NaturalHamiltonian, q: Array, p: Array, h: float) -> Tuple[Array, Array]:
    if ham.constant_kinetic:
        return yoshida_step(ham, q, p, h)
    return rk4_hamilton_step(ham, q, p, h)


def hamilton_flow(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    ham: NaturalHamiltonian,
    q0: Array,
    p0: Array,
    T: float,
    step: float = 1e-3,
    drift_tol: float = DRIFT_TOL,
) -> HamiltonTrajectory:
    """Fixed step flow on [0, T]; EnergyDriftException when |H − H₀| exceeds drift_tol per unit time"""
    q = np.array(q0, dtype=float)
    p = np.array(p0, dtype=float)
    count = max(1, int(math.ceil(abs(T) / step)))
    h = T / count
    H0 = float(ham.energy(q, p))
    qs: List[Array] = [q.copy()]
    ps: List[Array] = [p.copy()]
    drift = 0.0
    for _ in range(count):
        q, p = hamilton_step(ham, q, p, h)
        if not np.all(np.isfinite(q)) or not np.all(np.isfinite(p)):
            raise EnergyDriftException("the flow left the finite range")
        drift = max(drift, abs(float(ham.energy(q, p)) - H0))
        qs.append(q.copy())
        ps.append(p.copy())
    if drift > drift_tol * max(1.0, abs(T)):
        raise EnergyDriftException(f"energy drift {drift:.3e} over time {T} above {drift_tol:.1e} per unit time")
    return HamiltonTrajectory(np.linspace(0.0, T, count + 1), np.array(qs), np.array(ps), drift)
