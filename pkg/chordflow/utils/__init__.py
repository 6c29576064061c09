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
"""This module contains utilities for chordflow"""
from .config import Config, ConfigException
from .retry import base_backtrack
from .run_config import RunConfig, load_run_config, run_config_from_dict
from .trace_logger import CsvTraceLogger, NullTraceLogger, TraceLogger, TraceRow

__all__ = [
    "Config",
    "ConfigException",
    "CsvTraceLogger",
    "NullTraceLogger",
    "RunConfig",
    "TraceLogger",
    "TraceRow",
    "base_backtrack",
    "load_run_config",
    "run_config_from_dict",
]
