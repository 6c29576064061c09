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
The constants ledger.

Every threshold the deformation steps rely on lives here, either measured on samples of the
working region {φ ≤ δ₀} or derived from the measured ones. The rates θ_r, μ_r, κ_r and ρ_r are
starting values only; descent steps report the rates they actually achieve.
"""
import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Mapping, Union

import numpy as np
from scipy.linalg import eigh

from chordflow.domain import DomainSpec, boundary_sample
from chordflow.utils.exceptions import PreconditionUnmetException
from chordflow.utils.run_config import ConstantsConfig

_logger_ = logging.getLogger(__name__)

LAMBDA_FRACTION = 0.5
GAMMA_BAR = 0.1
THETA0 = 0.5
MU0 = 0.25
RHO0 = 0.5
D0 = 0.1
T_EPS = 0.05
R_BAND = 1e-5
THETA_ELL = 1.0 / 32.0


@dataclass(frozen=True)
class ConstantsLedger:  # pylint: disable=too-many-instance-attributes
    delta0: float
    K0: float
    M0: float
    ell0: float
    L0: float
    L1: float
    G0: float
    N0_hess: float
    lambda1: float
    lambda_: float
    E_r: float
    theta_r: float
    mu_r: float
    kappa_r: float
    rho_r: float
    r_band: float
    delta_bar: float
    gamma_bar: float
    sigma0: float
    sigma1: float
    theta0: float
    mu0: float
    rho0: float
    eps0: float
    d0: float
    T_eps: float
    theta_ell: float = THETA_ELL

    @property
    def c1_lower_bound(self) -> float:
        """½(3δ₀/(4K₀))², below every critical level"""
        return 0.5 * (3.0 * self.delta0 / (4.0 * self.K0)) ** 2

    @property
    def short_interval_floor(self) -> float:
        """¼(3δ₀/(4K₀))², the least (b − a)·energy of an interval reaching the inner shell"""
        return 0.25 * (3.0 * self.delta0 / (4.0 * self.K0)) ** 2

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["lambda"] = out.pop("lambda_")
        out["c1_lower_bound"] = self.c1_lower_bound
        return out


def compute_lambda1(ell0: float, K0: float, M0: float, N0: float) -> float:
    """Largest admissible weight of the outward push"""
    return min(
        math.sqrt(ell0) / (2.0 * K0),
        math.sqrt(ell0) / math.sqrt(2.0 * K0**2 + 4.0 * M0 * N0**2),
    )


def _working_region(spec: DomainSpec, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    points = spec.field.chart_domain.sample(rng, samples)
    points = points[spec.phi(points) <= spec.delta0]
    boundary = boundary_sample(spec, max(samples, 100), seed)
    if len(points) == 0:
        return boundary
    return np.concatenate([points, boundary])


def _overrides(overrides: Union[ConstantsConfig, Mapping[str, Any], None]) -> Dict[str, Any]:
    if overrides is None:
        return {}
    if isinstance(overrides, ConstantsConfig):
        return {k: v for k, v in overrides.model_dump().items() if v is not None}
    return {k: v for k, v in overrides.items() if v is not None}


def build_ledger(  # pylint: disable=too-many-locals
    spec: DomainSpec,
    M0: float,
    overrides: Union[ConstantsConfig, Mapping[str, Any], None] = None,
    samples: int = 256,
    seed: int = 0,
) -> ConstantsLedger:
    """Measure the metric bounds on {φ ≤ δ₀} and derive the flow constants"""
    if spec.delta0 <= 0.0 or spec.K0 <= 0.0:
        raise PreconditionUnmetException(f"{spec.name} is not calibrated: delta0 {spec.delta0}, K0 {spec.K0}")
    if M0 <= 0.0:
        raise PreconditionUnmetException(f"M0 must be positive, got {M0}")
    extra = _overrides(overrides)
    region = _working_region(spec, samples, seed)
    g = spec.field.g(region)
    eigenvalues = np.linalg.eigvalsh(g)
    ell0 = float(np.min(eigenvalues))
    L0 = float(np.max(eigenvalues))
    gamma = spec.field.christoffel(region)
    gamma_norm = float(np.max(np.sqrt(np.sum(gamma**2, axis=(-3, -2, -1)))))
    L1 = 1.0 + gamma_norm * math.sqrt(2.0 * M0 / ell0)
    G0 = float(np.max(np.sqrt(np.sum(spec.field.dg(region) ** 2, axis=(-3, -2, -1)))))
    hess = spec.hess_phi(region)
    N0 = max(float(np.max(np.abs(eigh(h, m, eigvals_only=True)))) for h, m in zip(hess, g))
    lambda1 = compute_lambda1(ell0, spec.K0, M0, N0)
    lambda_ = extra.get("lambda_fraction", LAMBDA_FRACTION) * lambda1

    delta_bar = extra.get("delta_bar", 0.25 * spec.delta0)
    if delta_bar > spec.delta0:
        raise PreconditionUnmetException(f"delta_bar {delta_bar} exceeds delta0 {spec.delta0}")
    theta0 = extra.get("theta0", THETA0)
    rho0 = extra.get("rho0", RHO0)
    sigma0 = extra.get("sigma0", delta_bar / 8.0)
    sigma1 = min(0.5 * sigma0, 2.0 / 7.0 * rho0 * theta0)
    mu_r = MU0
    ledger = ConstantsLedger(
        delta0=spec.delta0,
        K0=spec.K0,
        M0=M0,
        ell0=ell0,
        L0=L0,
        L1=L1,
        G0=G0,
        N0_hess=N0,
        lambda1=lambda1,
        lambda_=lambda_,
        E_r=mu_r**2 / (32.0 * L1**2 * L0),
        theta_r=theta0,
        mu_r=mu_r,
        kappa_r=extra.get("kappa_r", 0.5 * delta_bar),
        rho_r=rho0,
        r_band=R_BAND,
        delta_bar=delta_bar,
        gamma_bar=extra.get("gamma_bar", GAMMA_BAR),
        sigma0=sigma0,
        sigma1=sigma1,
        theta0=theta0,
        mu0=MU0,
        rho0=rho0,
        eps0=extra.get("eps0", 0.25 * delta_bar),
        d0=extra.get("d0", D0),
        T_eps=extra.get("T_eps", T_EPS),
    )
    _logger_.info(
        "ledger for %s: delta0 %s, K0 %s, M0 %s, lambda1 %s, c1 lower bound %s",
        spec.name,
        ledger.delta0,
        ledger.K0,
        ledger.M0,
        ledger.lambda1,
        ledger.c1_lower_bound,
    )
    return ledger


def with_band(ledger: ConstantsLedger, r_band: float) -> ConstantsLedger:
    return replace(ledger, r_band=r_band)
