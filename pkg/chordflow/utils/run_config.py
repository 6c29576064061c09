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
"""Validated run configuration.

The YAML file is read with :class:`chordflow.utils.config.Config` and checked against the
pydantic models below. Unknown keys are rejected and every validation failure is reported with
the dotted path of the offending field.
"""
import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .config import Config, ConfigException


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GeometryConfig(_Strict):
    """Domain selection and per-kind parameters"""

    kind: Literal["half_plane", "euclidean_disk", "sphere_cap", "jacobi_well"]
    cap_radius: float = Field(default=2.0 * math.pi / 3.0, gt=0.0, lt=math.pi)
    disk_radius: float = Field(default=1.0, gt=0.0)
    chart_radius: float = Field(default=8.0, gt=0.0)
    box_half_width: float = Field(default=5.0, gt=0.0)


class HamiltonianConfig(_Strict):
    """Natural Hamiltonian H = 1/2 |p|^2 + sum lambda_i^2 q_i^2 + quartic |q|^4"""

    potential: Literal["ellipsoid"] = "ellipsoid"
    lambdas: List[float] = Field(default_factory=lambda: [1.0, math.sqrt(2.0)], min_length=1)
    quartic: float = Field(default=0.0, ge=0.0)
    energy: float = 1.0
    rho: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05], min_length=1)

    @model_validator(mode="after")
    def _check_levels(self) -> "HamiltonianConfig":
        # inf V = 0 for every supported potential
        if self.energy <= 0.0:
            raise ValueError(f"energy {self.energy} must exceed inf V = 0")
        for rho in self.rho:
            if not 0.0 < rho < self.energy:
                raise ValueError(f"rho {rho} must lie in (0, energy)")
        return self


class DiscretizationConfig(_Strict):
    """Grids and integrator steps"""

    nodes: int = 128
    integrator_step: float = Field(default=1e-3, gt=0.0)
    boundary_grid: int = Field(default=32, ge=4)
    concavity_samples: int = Field(default=200, ge=100)
    polish_substeps: int = Field(default=32, ge=4)

    @field_validator("nodes")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value < 32 or value > 2048 or value & (value - 1) != 0:
            raise ValueError(f"nodes must be a power of two in [32, 2048], got {value}")
        return value


class ConstantsConfig(_Strict):
    """Optional overrides of the constants ledger"""

    delta_bar: Optional[float] = Field(default=None, gt=0.0)
    gamma_bar: Optional[float] = Field(default=None, gt=0.0)
    sigma0: Optional[float] = Field(default=None, gt=0.0)
    theta0: Optional[float] = Field(default=None, gt=0.0)
    rho0: Optional[float] = Field(default=None, gt=0.0)
    eps0: Optional[float] = Field(default=None, gt=0.0)
    d0: Optional[float] = Field(default=None, gt=0.0)
    lambda_fraction: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    T_eps: Optional[float] = Field(default=None, gt=0.0)
    kappa_r: Optional[float] = Field(default=None, gt=0.0)
    delta_max: Optional[float] = Field(default=None, gt=0.0)


class TolerancesConfig(_Strict):
    """Numerical tolerances"""

    boundary: float = Field(default=1e-7, gt=0.0)
    criticality: float = Field(default=1e-5, gt=0.0)
    angle: float = Field(default=1e-3, gt=0.0)
    abort_ogc: float = Field(default=5e-2, gt=0.0)
    dedup_energy: float = Field(default=0.05, gt=0.0)
    dedup_shape: float = Field(default=1e-3, gt=0.0)


class BudgetsConfig(_Strict):
    """Iteration and wall-clock caps"""

    max_iterations: int = Field(default=4000, gt=0)
    sweeps_per_rung: int = Field(default=400, gt=0)
    wall_clock_seconds: float = Field(default=60.0, gt=0.0)


class OutputsConfig(_Strict):
    """Artifact directory and plot toggle"""

    directory: str = "out"
    plot: bool = False


class RunConfig(_Strict):
    """Root of the run configuration"""

    geometry: GeometryConfig
    hamiltonian: Optional[HamiltonianConfig] = None
    discretization: DiscretizationConfig = Field(default_factory=DiscretizationConfig)
    constants: ConstantsConfig = Field(default_factory=ConstantsConfig)
    tolerances: TolerancesConfig = Field(default_factory=TolerancesConfig)
    budgets: BudgetsConfig = Field(default_factory=BudgetsConfig)
    outputs: OutputsConfig = Field(default_factory=OutputsConfig)
    seed: int = 0

    @model_validator(mode="after")
    def _jacobi_needs_hamiltonian(self) -> "RunConfig":
        if self.geometry.kind == "jacobi_well" and self.hamiltonian is None:
            raise ValueError("geometry kind jacobi_well needs a hamiltonian block")
        return self


def format_validation_error(error: ValidationError) -> str:
    """One line per error, each starting with the dotted field path"""
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return "; ".join(lines)


def run_config_from_dict(data: Dict[str, Any]) -> RunConfig:
    """Validate a raw mapping"""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigException(f"invalid run config: {format_validation_error(e)}") from e


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """Load and validate a run config; falls back to CONFIG_PATH when no path is given"""
    config = Config(path) if path is not None else Config.from_env()
    return run_config_from_dict(config.data)
