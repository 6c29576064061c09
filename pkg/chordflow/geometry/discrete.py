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
"""Discrete energy of node arrays and its critical points with fixed endpoints."""
import logging

import numpy as np
from scipy.linalg import solve_banded

from chordflow.utils.exceptions import RejectedStepException
from chordflow.utils.retry import base_backtrack

from .metric import Array, MetricField

_logger_ = logging.getLogger(__name__)


def discrete_energy(field_: MetricField, nodes: Array, n: int) -> float:
    """½ Σ n Δᵀ g(mid) Δ over the cells of ``nodes`` on a grid of spacing 1/n"""
    nodes = np.asarray(nodes, dtype=float)
    if len(nodes) < 2:
        return 0.0
    delta = np.diff(nodes, axis=0)
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    quad = np.einsum("ca,cab,cb->c", delta, field_.g(mid), delta)
    return 0.5 * n * float(np.sum(quad))


def discrete_energy_gradient(field_: MetricField, nodes: Array, n: int) -> Array:
    """Gradient of :func:`discrete_energy` with respect to every node"""
    nodes = np.asarray(nodes, dtype=float)
    grad = np.zeros_like(nodes)
    if len(nodes) < 2:
        return grad
    delta = np.diff(nodes, axis=0)
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    w = n * np.einsum("cab,cb->ca", field_.g(mid), delta)
    s = 0.25 * n * np.einsum("ckab,ca,cb->ck", field_.dg(mid), delta, delta)
    grad[1:] += w + s
    grad[:-1] += -w + s
    return grad


def _banded_hessian(field_: MetricField, nodes: Array, n: int, eps: float) -> Array:
    """Finite-difference Hessian of the interior gradient in banded storage"""
    count = len(nodes) - 2
    dim = nodes.shape[1]
    size = count * dim
    half = 2 * dim - 1
    ab = np.zeros((2 * half + 1, size))
    for color in range(3):
        members = np.arange(1 + color, count + 1, 3)
        if len(members) == 0:
            continue
        for k in range(dim):
            plus = nodes.copy()
            minus = nodes.copy()
            plus[members, k] += eps
            minus[members, k] -= eps
            diff = (
                discrete_energy_gradient(field_, plus, n)
                - discrete_energy_gradient(field_, minus, n)
            ) / (2.0 * eps)
            for j in members:
                col = (j - 1) * dim + k
                for i in (j - 1, j, j + 1):
                    if i < 1 or i > count:
                        continue
                    for a in range(dim):
                        row = (i - 1) * dim + a
                        ab[half + row - col, col] = diff[i, a]
    return ab


def relax_discrete_geodesic(
    field_: MetricField, p: Array, q: Array, n: int, tol: float = 1e-11, max_iter: int = 30
) -> Array:
    """Newton iteration for a critical point of the discrete energy with endpoints p and q.

    Returns the n + 1 nodes; starts from the straight chart segment."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    s = np.linspace(0.0, 1.0, n + 1)[:, None]
    nodes = p + s * (q - p)
    if n < 2 or np.array_equal(p, q):
        return nodes
    dim = len(p)
    half = 2 * dim - 1
    eps = 1e-6 * max(1.0, float(np.max(np.abs(nodes))))

    def interior_norm(x: Array) -> float:
        return float(np.max(np.abs(discrete_energy_gradient(field_, x, n)[1:-1])))

    for _ in range(max_iter):
        grad = discrete_energy_gradient(field_, nodes, n)[1:-1]
        norm = float(np.max(np.abs(grad)))
        if norm < tol:
            break
        ab = _banded_hessian(field_, nodes, n, eps)
        direction = solve_banded((half, half), ab, -grad.reshape(-1)).reshape(-1, dim)

        def trial(step: float, base: Array = nodes, d: Array = direction, ref: float = norm) -> Array:
            candidate = base.copy()
            candidate[1:-1] += step * d
            if not np.all(field_.chart_domain.contains(candidate)):
                raise RejectedStepException("left chart")
            if interior_norm(candidate) >= ref:
                raise RejectedStepException("no gradient decrease")
            return candidate

        try:
            nodes, _ = base_backtrack(trial, 1.0, max_halvings=20, log_func=_logger_.debug)
        except RejectedStepException:
            break
    return nodes
