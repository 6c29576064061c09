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
"""SVG drawing of a domain chart with its boundary, the inner shell level and chords."""
import logging
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # pylint: disable=wrong-import-position
import numpy as np  # pylint: disable=wrong-import-position

from chordflow.domain import DomainSpec  # pylint: disable=wrong-import-position

_logger_ = logging.getLogger(__name__)

GRID = 241


def plot_domain(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    spec: DomainSpec,
    path: str,
    chords: Optional[List[np.ndarray]] = None,
    delta0: Optional[float] = None,
    extent: Optional[float] = None,
    title: Optional[str] = None,
) -> str:
    """Chart boundary, φ = 0 and φ = −δ₀ level sets and chord polylines; two dimensional specs only"""
    if spec.dim != 2:
        raise ValueError(f"plots need a two dimensional chart, got dimension {spec.dim}")
    plt.rcParams["svg.hashsalt"] = "chordflow"
    chart = spec.field.chart_domain
    center = np.asarray(chart.center, dtype=float)
    reach = chart.scale if extent is None else extent
    xs = np.linspace(center[0] - reach, center[0] + reach, GRID)
    ys = np.linspace(center[1] - reach, center[1] + reach, GRID)
    X, Y = np.meshgrid(xs, ys)
    points = np.stack([X, Y], axis=-1)
    inside = chart.contains(points)
    values = np.where(inside, spec.phi(np.where(inside[..., None], points, center)), np.nan)

    fig, ax = plt.subplots(figsize=(6, 6))
    if chart.radius is not None:
        ax.add_patch(plt.Circle(tuple(center), chart.radius, fill=False, color="0.6", linestyle=":"))
    else:
        w = np.asarray(chart.half_widths, dtype=float)
        ax.add_patch(plt.Rectangle(tuple(center - w), 2 * w[0], 2 * w[1], fill=False, color="0.6", linestyle=":"))
    levels = sorted({0.0} | ({-float(delta0)} if delta0 else set()))
    ax.contour(X, Y, values, levels=levels, colors=["tab:orange", "black"][-len(levels) :])
    for nodes in chords or []:
        nodes = np.asarray(nodes, dtype=float)
        ax.plot(nodes[:, 0], nodes[:, 1], color="tab:blue", linewidth=1.2)
    ax.set_aspect("equal")
    ax.set_xlim(xs[0], xs[-1])
    ax.set_ylim(ys[0], ys[-1])
    ax.set_title(title or spec.name)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    _logger_.debug("wrote %s", path)
    return path
