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
Chart based Riemannian metrics.

A :class:`MetricField` evaluates g on batches of chart points, shape ``(..., N)`` to
``(..., N, N)``. Christoffel symbols come from an analytic override when one is given, otherwise
from Richardson-extrapolated central differences of g. All arrays follow the index convention
``gamma[..., k, i, j] = Γ^k_ij`` and ``dg[..., k, a, b] = ∂_k g_ab``.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from chordflow.utils.exceptions import NotPositiveDefiniteException, OutOfChartException

Array = np.ndarray
BatchMap = Callable[[Array], Array]


@dataclass(frozen=True)
class ChartDomain:
    """Open ball (``radius``) or open box (``half_widths``) around ``center``.

    ``admissible`` optionally restricts the chart further, e.g. to the region where a Jacobi
    metric is non-degenerate."""

    center: Array
    radius: Optional[float] = None
    half_widths: Optional[Array] = None
    admissible: Optional[BatchMap] = None

    def __post_init__(self) -> None:
        if (self.radius is None) == (self.half_widths is None):
            raise ValueError("ChartDomain needs exactly one of radius or half_widths")

    @property
    def dim(self) -> int:
        return int(np.asarray(self.center).shape[-1])

    @property
    def scale(self) -> float:
        """Characteristic chart length"""
        if self.radius is not None:
            return float(self.radius)
        return float(np.max(np.asarray(self.half_widths)))

    def contains(self, q: Array, margin: float = 0.0) -> Array:
        """Boolean mask over a batch of points"""
        q = np.asarray(q, dtype=float)
        offset = q - self.center
        if self.radius is not None:
            inside = np.linalg.norm(offset, axis=-1) < self.radius - margin
        else:
            inside = np.all(np.abs(offset) < np.asarray(self.half_widths) - margin, axis=-1)
        if self.admissible is not None:
            inside = inside & np.asarray(self.admissible(q), dtype=bool)
        return inside

    def sample(self, rng: np.random.Generator, count: int, shrink: float = 1.0) -> Array:
        """Uniform samples from the chart, rejected against ``admissible``"""
        dim = self.dim
        batches = []
        found = 0
        for _ in range(200):
            if self.radius is not None:
                directions = rng.normal(size=(count, dim))
                directions /= np.linalg.norm(directions, axis=1, keepdims=True)
                radii = self.radius * shrink * rng.uniform(size=(count, 1)) ** (1.0 / dim)
                points = self.center + directions * radii
            else:
                widths = np.asarray(self.half_widths) * shrink
                points = self.center + rng.uniform(-1.0, 1.0, size=(count, dim)) * widths
            points = points[self.contains(points)]
            batches.append(points)
            found += len(points)
            if found >= count:
                break
        if not batches:
            return np.zeros((0, dim))
        return np.concatenate(batches)[:count]


@dataclass(frozen=True)
class MetricField:
    """Metric tensor on a single chart"""

    dim: int
    chart_domain: ChartDomain
    g_eval: BatchMap
    derivative_step: float = 1e-5
    analytic_christoffel: Optional[BatchMap] = None
    name: str = field(default="metric")

    def g(self, q: Array) -> Array:
        """Symmetrized metric on a batch, no checks"""
        m = np.asarray(self.g_eval(np.asarray(q, dtype=float)), dtype=float)
        return 0.5 * (m + np.swapaxes(m, -1, -2))

    def dg(self, q: Array) -> Array:
        """Partial derivatives of g, from the connection when it is analytic"""
        q = np.asarray(q, dtype=float)
        if self.analytic_christoffel is not None:
            return _metric_derivative_from_gamma(self.g(q), self.christoffel(q))
        return self._finite_difference_dg(q)

    def christoffel(self, q: Array) -> Array:
        """Γ^k_ij on a batch, symmetric in the lower indices"""
        q = np.asarray(q, dtype=float)
        if self.analytic_christoffel is not None:
            gamma = np.asarray(self.analytic_christoffel(q), dtype=float)
        else:
            dg = self._finite_difference_dg(q)
            g_inv = np.linalg.inv(self.g(q))
            # t[..., l, i, j] = ∂_i g_lj + ∂_j g_li − ∂_l g_ij
            t = (
                np.einsum("...ilj->...lij", dg)
                + np.einsum("...jli->...lij", dg)
                - dg
            )
            gamma = 0.5 * np.einsum("...kl,...lij->...kij", g_inv, t)
        return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))

    def _finite_difference_dg(self, q: Array) -> Array:
        h = self.derivative_step * self.chart_domain.scale
        parts = []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = 1.0
            coarse = (self.g(q + h * e) - self.g(q - h * e)) / (2.0 * h)
            fine = (self.g(q + 0.5 * h * e) - self.g(q - 0.5 * h * e)) / h
            parts.append((4.0 * fine - coarse) / 3.0)
        return np.stack(parts, axis=-3)


def _metric_derivative_from_gamma(g: Array, gamma: Array) -> Array:
    # ∂_k g_ab = Γ^l_ka g_lb + Γ^l_kb g_al
    first = np.einsum("...lka,...lb->...kab", gamma, g)
    return first + np.swapaxes(first, -1, -2)


def _check_inside(field_: MetricField, q: Array, margin: float = 0.0) -> Array:
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != field_.dim:
        raise OutOfChartException(f"point of dimension {q.shape[-1]} for a {field_.dim}-d chart")
    if not np.all(field_.chart_domain.contains(q, margin)):
        raise OutOfChartException(f"point {q.tolist()} outside chart domain of {field_.name}")
    return q


def metric_at(field_: MetricField, q: Array) -> Array:
    """g(q), symmetrized, after chart and positivity checks"""
    q = _check_inside(field_, q)
    m = field_.g(q)
    eigenvalues = np.linalg.eigvalsh(m)
    if np.any(eigenvalues <= 0.0):
        raise NotPositiveDefiniteException(
            f"metric {field_.name} not positive definite at {q.tolist()}: "
            f"eigenvalues {eigenvalues.tolist()}"
        )
    return m


def christoffel_at(field_: MetricField, q: Array) -> Array:
    """Γ^k_ij(q) with index order [k, i, j]"""
    margin = 0.0 if field_.analytic_christoffel is not None else field_.derivative_step
    q = _check_inside(field_, q, margin * field_.chart_domain.scale)
    return field_.christoffel(q)


def metric_derivative_at(field_: MetricField, q: Array) -> Array:
    """∂_k g_ab(q) with index order [k, a, b]"""
    q = _check_inside(field_, q)
    return field_.dg(q)


def euclidean_field(dim: int = 2, half_width: float = 10.0) -> MetricField:
    """Flat metric on a box"""
    eye = np.eye(dim)

    def g_eval(q: Array) -> Array:
        return np.broadcast_to(eye, np.shape(q)[:-1] + (dim, dim)).copy()

    def gamma_eval(q: Array) -> Array:
        return np.zeros(np.shape(q)[:-1] + (dim, dim, dim))

    return MetricField(
        dim=dim,
        chart_domain=ChartDomain(center=np.zeros(dim), half_widths=np.full(dim, half_width)),
        g_eval=g_eval,
        analytic_christoffel=gamma_eval,
        name="euclidean",
    )


def conformal_field(
    chart_domain: ChartDomain,
    log_factor: BatchMap,
    log_factor_gradient: BatchMap,
    name: str = "conformal",
    analytic: bool = True,
) -> MetricField:
    """Metric e^{2σ(q)}·I with Γ^k_ij = δ_ik ∂_jσ + δ_jk ∂_iσ − δ_ij ∂_kσ"""
    dim = chart_domain.dim
    eye = np.eye(dim)

    def g_eval(q: Array) -> Array:
        factor = np.exp(2.0 * np.asarray(log_factor(q)))
        return factor[..., None, None] * eye

    def gamma_eval(q: Array) -> Array:
        ds = np.asarray(log_factor_gradient(q))
        return (
            np.einsum("ik,...j->...kij", eye, ds)
            + np.einsum("jk,...i->...kij", eye, ds)
            - np.einsum("ij,...k->...kij", eye, ds)
        )

    return MetricField(
        dim=dim,
        chart_domain=chart_domain,
        g_eval=g_eval,
        analytic_christoffel=gamma_eval if analytic else None,
        name=name,
    )
