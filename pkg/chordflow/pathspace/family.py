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
This module contains the ChordGenerator and PathFamily classes.

The generator maps a pair of boundary points to a curve in the closed domain:

1. the radial image of the straight segment between ψ(A) and ψ(B), where ψ normalizes the
   chart radially so that the boundary becomes the unit sphere,
2. a broken geodesic through N₀ + 1 samples of it, N₀ sized by the injectivity bound,
3. the clamp η⁻(max(0, φ)) onto the closed domain,
4. the push η⁻(s(1 − s)·max(0, δ₀/2 + φ)) into the interior.

Pairs are generated in a canonical order and the reversed pair is the reversed curve, so the
family is equivariant under reversal node for node.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from chordflow.domain import (
    DomainSpec,
    boundary_directions,
    flow_eta_batch,
    radial_boundary_points,
    require_boundary,
)
from chordflow.geometry import (
    Array,
    flow_endpoints,
    injectivity_radius_lower_bound,
    shoot_geodesics,
)
from chordflow.geometry.geodesics import chart_segment_length
from chordflow.utils.exceptions import (
    EmptyFamilyException,
    NotInM0Exception,
    PreconditionUnmetException,
)

from .curve import DiscreteCurve, constant_curve, energy, reverse, speed_integral
from .intervals import maximal_intervals

_logger_ = logging.getLogger(__name__)

INJECTIVITY_FRACTION = 0.8
SHELL_SLACK = 1.1
SHOOTING_STEPS = 32


class ChordGenerator:
    """G(A, B) for a calibrated domain"""

    def __init__(
        self,
        spec: DomainSpec,
        n: int = 128,
        injectivity_bound: Optional[float] = None,
        seed: int = 0,
    ) -> None:
        if spec.delta0 <= 0.0:
            raise PreconditionUnmetException(f"{spec.name} has no shell depth; calibrate it first")
        self.spec = spec
        self.n = n
        self.seed = seed
        self._injectivity_bound = injectivity_bound

    @property
    def injectivity_bound(self) -> float:
        if self._injectivity_bound is None:
            rng = np.random.default_rng(self.seed)
            region = self.spec.field.chart_domain.sample(rng, 256)
            region = region[self.spec.phi(region) <= self.spec.delta0]
            self._injectivity_bound = injectivity_radius_lower_bound(
                self.spec.field, region, cap=self.spec.field.chart_domain.scale, seed=self.seed
            )
        return self._injectivity_bound

    def radial_image(self, A: Array, B: Array, s: Array) -> Array:
        """c_{A,B}(s) = ψ⁻¹((1 − s)ψ(A) + sψ(B))"""
        center = np.asarray(self.spec.center, dtype=float)
        ends = np.stack([A, B]) - center
        radii = np.linalg.norm(ends, axis=1)
        directions = ends / radii[:, None]
        # ψ(A), ψ(B) are unit vectors since A and B lie on the boundary
        y = (1.0 - s)[:, None] * directions[0] + s[:, None] * directions[1]
        length = np.linalg.norm(y, axis=1)
        out = np.repeat(center[None], len(s), axis=0)
        moving = length > 1e-14
        if np.any(moving):
            unit = y[moving] / length[moving, None]
            rim = radial_boundary_points(self.spec, unit)
            out[moving] = center + length[moving, None] * (rim - center)
        return out

    def _pieces(self, A: Array, B: Array) -> int:
        """Smallest power of two N₀ whose samples are within the uniqueness radius"""
        bound = INJECTIVITY_FRACTION * self.injectivity_bound
        pieces = 1
        while pieces < self.n:
            samples = self.radial_image(A, B, np.linspace(0.0, 1.0, pieces + 1))
            longest = max(
                chart_segment_length(self.spec.field, samples[k], samples[k + 1]) for k in range(pieces)
            )
            if longest <= bound:
                break
            pieces *= 2
        return pieces

    def broken_geodesic(self, A: Array, B: Array) -> Array:
        """Nodes of γ_{A,B} on the uniform grid"""
        pieces = self._pieces(A, B)
        spec = self.spec
        while True:
            anchors = self.radial_image(A, B, np.linspace(0.0, 1.0, pieces + 1))
            V, converged, err = shoot_geodesics(spec.field, anchors[:-1], anchors[1:], steps=SHOOTING_STEPS)
            s = np.linspace(0.0, 1.0, self.n + 1)
            piece = np.minimum(np.floor(s * pieces).astype(int), pieces - 1)
            local = s * pieces - piece
            nodes, _ = flow_endpoints(spec.field, anchors[piece], local[:, None] * V[piece], SHOOTING_STEPS)
            nodes[0], nodes[-1] = A, B
            ok = bool(np.all(converged)) and bool(np.all(np.isfinite(nodes)))
            if ok and float(np.max(spec.phi(nodes))) < spec.delta0 / SHELL_SLACK:
                return nodes
            if pieces >= self.n:
                if not ok:
                    raise PreconditionUnmetException(
                        f"broken geodesic shooting failed, worst error {float(np.max(err)):.3e}"
                    )
                return nodes
            pieces *= 2

    def generate(self, A: Array, B: Array) -> DiscreteCurve:
        spec = self.spec
        A = require_boundary(spec, A)
        B = require_boundary(spec, B)
        if np.array_equal(A, B):
            return constant_curve(A, self.n)
        if tuple(A) > tuple(B):
            return reverse(self.generate(B, A))
        gamma = self.broken_geodesic(A, B)
        clamped = flow_eta_batch(spec, gamma, -np.maximum(0.0, spec.phi(gamma)))
        s = np.linspace(0.0, 1.0, self.n + 1)
        push = s * (1.0 - s) * np.maximum(0.0, 0.5 * spec.delta0 + spec.phi(clamped))
        nodes = flow_eta_batch(spec, clamped, -push)
        nodes[0], nodes[-1] = A, B
        if not np.all(np.isfinite(nodes)):
            raise PreconditionUnmetException(f"eta flow degenerated while generating a chord of {spec.name}")
        return DiscreteCurve(nodes)

    def __call__(self, A: Array, B: Array) -> DiscreteCurve:
        return self.generate(A, B)


def chord_generator(spec: DomainSpec, A: Array, B: Array, n: int = 128) -> DiscreteCurve:
    """G(A, B) with a fresh generator"""
    return ChordGenerator(spec, n).generate(A, B)


@dataclass
class PathFamily:
    """Generated curves G(A_i, A_j) over a boundary grid"""

    grid: Array
    curves: Dict[Tuple[int, int], DiscreteCurve] = field(default_factory=dict)
    M0: Optional[float] = None

    @property
    def grid_A(self) -> Array:
        return self.grid

    @property
    def grid_B(self) -> Array:
        return self.grid

    def curve(self, i: int, j: int) -> DiscreteCurve:
        return self.curves[(i, j)]

    def pairs(self) -> List[Tuple[int, int]]:
        return sorted(self.curves)

    @staticmethod
    def build(
        generator: ChordGenerator,
        count: int,
        seed: int = 0,
        grid: Optional[Array] = None,
    ) -> "PathFamily":
        """Populate every ordered pair of a boundary grid and set M₀"""
        spec = generator.spec
        if grid is None:
            grid = radial_boundary_points(spec, boundary_directions(spec.dim, count, seed))
            grid = grid[np.all(np.isfinite(grid), axis=1)]
        family = PathFamily(grid=np.asarray(grid, dtype=float))
        for i in range(len(family.grid)):
            for j in range(i, len(family.grid)):
                curve = generator.generate(family.grid[i], family.grid[j])
                family.curves[(i, j)] = curve
                if i != j:
                    family.curves[(j, i)] = reverse(curve)
        compute_M0(family, spec)
        _logger_.info("path family of %s curves on %s, M0 = %s", len(family.curves), spec.name, family.M0)
        return family


def compute_M0(family: PathFamily, spec: Optional[DomainSpec] = None) -> float:
    """M₀ = max over the family of ∫₀¹ g(ẋ, ẋ)"""
    if not family.curves:
        raise EmptyFamilyException("path family has no curves")
    field_ = None if spec is None else spec.field
    family.M0 = max(speed_integral(curve, 0.0, 1.0, field_) for curve in family.curves.values())
    return family.M0


def in_M(x: DiscreteCurve, family: PathFamily, spec: DomainSpec) -> bool:
    """Every maximal interval has f_{a,b}(x) < M₀"""
    if family.M0 is None:
        compute_M0(family, spec)
    return all(
        energy(x, r.a, r.b, spec.field) < family.M0 for r in maximal_intervals(x, spec)
    )


@dataclass(frozen=True)
class LengthBoundCheck:
    """Lower bound for the length of an interval reaching depth δ"""

    lhs: float
    rhs: float
    holds: bool


def depth_length_check(
    x: DiscreteCurve,
    spec: DomainSpec,
    a: float,
    b: float,
    delta: float,
    K0: Optional[float] = None,
) -> LengthBoundCheck:
    """b − a ≥ δ²/K₀² · (∫_a^b g(ẋ, ẋ))⁻¹ for an interval starting on the boundary"""
    i, j = x.span(a, b)
    K0 = spec.K0 if K0 is None else K0
    phi = spec.phi(x.nodes[i : j + 1])
    if not np.any(phi <= -delta):
        raise PreconditionUnmetException(f"no node of [{a}, {b}] reaches phi <= {-delta}")
    lhs = b - a
    if delta == 0.0:
        return LengthBoundCheck(lhs, 0.0, True)
    if K0 <= 0.0:
        raise PreconditionUnmetException("K0 is not set")
    integral = speed_integral(x, a, b, spec.field)
    rhs = delta**2 / K0**2 / integral if integral > 0.0 else float("inf")
    return LengthBoundCheck(lhs, rhs, lhs >= rhs - 1e-12)


def check_in_M0(x: DiscreteCurve, spec: DomainSpec, tol: Optional[float] = None) -> None:
    tol = spec.boundary_tol if tol is None else tol
    ends = spec.phi(x.nodes[[0, -1]])
    if np.any(ends < -tol):
        raise NotInM0Exception(f"endpoint phi values {ends.tolist()} below -{tol:.1e}")

