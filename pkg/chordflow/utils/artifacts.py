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
Result files of a run.

JSON is written with sorted keys and Python's shortest round-trip float repr, so a fixed config
and seed give identical bytes. Non-finite floats become null.
"""
import json
import logging
import math
import os
from typing import Any, Dict, List

import numpy as np

_logger_ = logging.getLogger(__name__)

CHORDS_FILE = "chords.json"
ORBITS_FILE = "orbits.json"
CONSTANTS_FILE = "constants.json"
TRACE_FILE = "trace.csv"
PLOT_FILE = "plot.svg"


def to_jsonable(value: Any) -> Any:
    """Plain Python data from numpy values, tuples and nested containers"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(directory: str, name: str, payload: Any) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(payload))
    _logger_.debug("wrote %s", path)
    return path


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_chords(directory: str, chords: List[Dict[str, Any]]) -> str:
    return write_json(directory, CHORDS_FILE, chords)


def write_orbits(directory: str, payload: Dict[str, Any]) -> str:
    return write_json(directory, ORBITS_FILE, payload)


def write_constants(directory: str, payload: Dict[str, Any]) -> str:
    return write_json(directory, CONSTANTS_FILE, payload)
