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
This module contains the DiscreteCurve class and the functionals defined on it.

A discrete curve is the polyline through n + 1 chart points on the uniform grid s_i = i/n. Its
derivative is constant on every cell, ẋ = n·(x_{i+1} − x_i), so integrals over cells are exact
sums.
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from chordflow.geometry import (
    Array,
    MetricField,
    discrete_energy,
    discrete_energy_gradient,
    relax_discrete_geodesic,
)
from chordflow.utils.exceptions import EmptyIntervalException

GRID_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """Polyline on [0, 1] with ``nodes`` of shape (n + 1, N)"""

    nodes: Array

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or len(nodes) < 3:
            raise ValueError(f"a discrete curve needs at least 3 nodes, got shape {nodes.shape}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n(self) -> int:
        return len(self.nodes) - 1

    @property
    def dim(self) -> int:
        return int(self.nodes.shape[1])

    @property
    def grid(self) -> Array:
        return np.linspace(0.0, 1.0, self.n + 1)

    def velocity(self) -> Array:
        """ẋ on each of the n cells"""
        return self.n * np.diff(self.nodes, axis=0)

    def index(self, s: float) -> int:
        """Grid index of a grid-aligned parameter"""
        i = int(round(s * self.n))
        if abs(s * self.n - i) > GRID_TOL * self.n or i < 0 or i > self.n:
            raise ValueError(f"parameter {s} is not on the grid of {self.n} cells")
        return i

    def span(self, a: float, b: float) -> Tuple[int, int]:
        if a >= b:
            raise EmptyIntervalException(f"empty interval [{a}, {b}]")
        return self.index(a), self.index(b)

    def with_nodes(self, nodes: Array) -> "DiscreteCurve":
        return DiscreteCurve(nodes)

    def is_constant(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.nodes - self.nodes[0])) <= tol)

    def to_list(self) -> list:
        """Flat numeric form: n, then the coordinates of every node"""
        return [self.n] + [float(c) for c in self.nodes.reshape(-1)]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DiscreteCurve) and np.array_equal(self.nodes, other.nodes)

    def __hash__(self) -> int:
        return hash(self.nodes.tobytes())


def constant_curve(point: Array, n: int = 128) -> DiscreteCurve:
    return DiscreteCurve(np.repeat(np.asarray(point, dtype=float)[None], n + 1, axis=0))


def segment_curve(p: Array, q: Array, n: int = 128) -> DiscreteCurve:
    """Chart-affine segment from p to q"""
    s = np.linspace(0.0, 1.0, n + 1)[:, None]
    p = np.asarray(p, dtype=float)
    return DiscreteCurve(p + s * (np.asarray(q, dtype=float) - p))


def h1_norm(x: DiscreteCurve, a: float = 0.0, b: float = 1.0) -> float:
    """(1/√2)·(max(|x(a)|², |x(b)|²) + ∫_a^b |ẋ|²)^½ with Euclidean chart norms"""
    i, j = x.span(a, b)
    ends = max(float(x.nodes[i] @ x.nodes[i]), float(x.nodes[j] @ x.nodes[j]))
    velocity = x.velocity()[i:j]
    kinetic = float(np.sum(velocity**2)) / x.n
    return math.sqrt(ends + kinetic) / math.sqrt(2.0)


def sup_norm(x: DiscreteCurve, a: float = 0.0, b: float = 1.0) -> float:
    i, j = x.span(a, b)
    return float(np.max(np.linalg.norm(x.nodes[i : j + 1], axis=1)))


def energy(x: DiscreteCurve, a: float = 0.0, b: float = 1.0, field_: Optional[MetricField] = None) -> float:
    """f_{a,b}(x) = ½∫_a^b g(ẋ, ẋ), the metric taken at cell midpoints; Euclidean without a field"""
    i, j = x.span(a, b)
    if field_ is None:
        velocity = x.velocity()[i:j]
        return 0.5 * float(np.sum(velocity**2)) / x.n
    return discrete_energy(field_, x.nodes[i : j + 1], x.n)


def speed_integral(x: DiscreteCurve, a: float = 0.0, b: float = 1.0, field_: Optional[MetricField] = None) -> float:
    """∫_a^b g(ẋ, ẋ)"""
    return 2.0 * energy(x, a, b, field_)


def energy_gradient(
    x: DiscreteCurve, a: float = 0.0, b: float = 1.0, field_: Optional[MetricField] = None
) -> Array:
    """Node gradient of f_{a,b}, zero outside [a, b]"""
    i, j = x.span(a, b)
    grad = np.zeros_like(x.nodes)
    if field_ is None:
        delta = np.diff(x.nodes[i : j + 1], axis=0) * x.n
        grad[i + 1 : j + 1] += delta
        grad[i:j] -= delta
        return grad
    grad[i : j + 1] = discrete_energy_gradient(field_, x.nodes[i : j + 1], x.n)
    return grad


def reverse(x: DiscreteCurve) -> DiscreteCurve:
    """ℛx(s) = x(1 − s)"""
    return DiscreteCurve(x.nodes[::-1])


def evaluate(x: DiscreteCurve, parameters: Sequence[float]) -> Array:
    """Polyline values at arbitrary parameters in [0, 1]"""
    parameters = np.clip(np.asarray(parameters, dtype=float), 0.0, 1.0)
    return np.stack([np.interp(parameters, x.grid, x.nodes[:, k]) for k in range(x.dim)], axis=1)


def resample(x: DiscreteCurve, parameters: Sequence[float]) -> DiscreteCurve:
    """Curve whose node i is x(parameters[i])"""
    return DiscreteCurve(evaluate(x, parameters))


def constant_speed(x: DiscreteCurve, field_: Optional[MetricField] = None) -> DiscreteCurve:
    """x resampled at uniform arc length, g-arc length with a field; constant curves come back as is"""
    delta = np.diff(x.nodes, axis=0)
    if field_ is None:
        cells = np.linalg.norm(delta, axis=1)
    else:
        mid = 0.5 * (x.nodes[1:] + x.nodes[:-1])
        cells = np.sqrt(np.maximum(np.einsum("ca,cab,cb->c", delta, field_.g(mid), delta), 0.0))
    total = float(np.sum(cells))
    if not total > 0.0:
        return x
    arc = np.concatenate([[0.0], np.cumsum(cells)]) / total
    return resample(x, np.interp(x.grid, arc, x.grid))


def discrete_geodesic(field_: MetricField, p: Array, q: Array, n: int = 128) -> DiscreteCurve:
    """Critical point of the discrete energy with endpoints p and q"""
    return DiscreteCurve(relax_discrete_geodesic(field_, p, q, n))
