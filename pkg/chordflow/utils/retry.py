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
"""Backtracking utilities for step trials that may be rejected."""
from typing import Any, Callable, Dict, Optional, Tuple, Union

from .exceptions import RejectedStepException


def base_backtrack(  # pylint: disable=too-many-arguments, too-many-positional-arguments
    func: Callable[..., Any],
    step: float,
    args: Optional[Tuple[Any, ...]] = None,
    kwargs: Optional[Dict[str, Any]] = None,
    max_halvings: int = 30,
    factor: float = 0.5,
    exceptions: Union[
        Tuple[type[BaseException], ...], type[BaseException]
    ] = RejectedStepException,
    log_func: Optional[Callable[[str], None]] = None,
) -> Tuple[Any, float]:
    """Call ``func(step, *args, **kwargs)``, shrinking the step on rejection.

    Args:
        func (callable): The trial function; raises one of ``exceptions`` to reject a step.
        step (float): The first step to try.
        args (tuple): Extra positional arguments for the function.
        kwargs (dict): The keyword arguments for the function.
        max_halvings (int): The maximum number of step reductions.
        factor (float): The reduction factor applied after each rejection.
        exceptions (Union[List[Exception], Exception]): The exceptions that reject a step.
        log_func (callable): The function to use for logging.

    Returns:
        The function result and the accepted step."""
    if args is None:
        args = ()
    if kwargs is None:
        kwargs = {}
    f_name = getattr(func, "__qualname__", getattr(func, "__name__", "func"))
    attempt = 0
    while True:
        try:
            return func(step, *args, **kwargs), step
        except exceptions as e:
            attempt += 1
            next_step = step * factor
            if attempt <= max_halvings:
                if log_func is not None:
                    log_func(
                        f"Attempt #{attempt} of function {f_name} rejected step {step:.3e} ({e}). "
                        f"Trying again with step {next_step:.3e}."
                    )
                step = next_step
                continue
            if log_func is not None:
                log_func(f"Function {f_name} failed after {attempt} attempts.")
            raise e
