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
"""ChordFlow exceptions."""
from typing import Any, List, Optional


class ChordFlowException(Exception):
    """Base exception for every chordflow error"""


class RejectedStepException(ChordFlowException):
    """A trial step was not acceptable; the caller should shrink it"""


# geometry


class OutOfChartException(ChordFlowException):
    """Point outside the chart domain"""


class NotPositiveDefiniteException(ChordFlowException):
    """Metric matrix with a non-positive eigenvalue"""


class LeftChartException(ChordFlowException):
    """Geodesic left the chart domain"""

    def __init__(self, message: str, exit_time: float) -> None:
        super().__init__(message)
        self.exit_time = exit_time


class StepTooLargeException(ChordFlowException):
    """Integrator energy drift above the accepted level"""


class NoConvergenceException(ChordFlowException):
    """An iteration did not converge within its budget"""

    def __init__(self, message: str, best: Optional[Any] = None) -> None:
        super().__init__(message)
        self.best = best


class TooFarApartException(ChordFlowException):
    """Endpoints farther apart than the uniqueness radius allows"""


class DegenerateRegionException(ChordFlowException):
    """Sample region empty or injectivity bound below its floor"""


# domain


class NotOnBoundaryException(ChordFlowException):
    """Point not on the boundary within tolerance"""


class NotTangentException(ChordFlowException):
    """Vector not tangent to the boundary within tolerance"""


class LeftShellException(ChordFlowException):
    """Gradient flow left the concavity shell"""

    def __init__(self, message: str, exit_tau: float) -> None:
        super().__init__(message)
        self.exit_tau = exit_tau


class OutOfShellException(ChordFlowException):
    """Point outside the inner half of the shell"""


# pathspace


class EmptyIntervalException(ChordFlowException):
    """Interval with a >= b"""


class NotInM0Exception(ChordFlowException):
    """Curve endpoints strictly inside the domain"""


class EmptyFamilyException(ChordFlowException):
    """Path family without curves"""


class PreconditionUnmetException(ChordFlowException):
    """Operation precondition does not hold"""


# criticality


class BadIntervalException(ChordFlowException):
    """Interval is not a usable maximal interval"""


class NotCriticalException(ChordFlowException):
    """Portion residual above the criticality threshold"""


class NotACuspException(ChordFlowException):
    """Contact run without a velocity jump"""


class BadDepthsException(ChordFlowException):
    """Depth parameters out of order"""


class NotDeltaBarCloseException(ChordFlowException):
    """Sub-interval is not close to the boundary"""


# flows


class TooCloseToCriticalException(ChordFlowException):
    """Projected gradient inside the criticality band"""


class ShortIntervalException(ChordFlowException):
    """Interval energy product below the level lower bound"""


class LeftMException(ChordFlowException):
    """An interval energy reached the family bound"""


class DegenerateSplitException(ChordFlowException):
    """Reparameterization split point out of range"""


class NotSecondTypeException(ChordFlowException):
    """No portion admits a reparameterization descent"""


class NoNonessentialException(ChordFlowException):
    """No topologically non-essential interval to clear"""


class StalledException(ChordFlowException):
    """Deformation budget exhausted without reaching the target level"""

    def __init__(self, message: str, state: Optional[Any] = None) -> None:
        super().__init__(message)
        self.state = state


class OGCDetectedException(ChordFlowException):
    """Deformation aborted on an orthogonal geodesic chord"""

    def __init__(self, message: str, report: Any) -> None:
        super().__init__(message)
        self.report = report


# minimax


class CurveLeftMException(ChordFlowException):
    """A current curve is outside the admissible set"""


class MismatchException(ChordFlowException):
    """Concatenated transitions do not share their junction state"""


class NotConcaveException(ChordFlowException):
    """Domain failed the strong concavity gate"""

    def __init__(self, message: str, witnesses: Optional[List[Any]] = None) -> None:
        super().__init__(message)
        self.witnesses = witnesses or []


# hamiltonian


class EnergyDriftException(ChordFlowException):
    """Hamiltonian drift above the accepted level"""


class BadRhoException(ChordFlowException):
    """Shrink parameter out of range or degenerate domain"""


class ShootingDivergedException(ChordFlowException):
    """Brake orbit shooting did not converge"""


class ZeroLambdaException(ChordFlowException):
    """Zero frequency in the ellipsoid well"""
