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
This module reads a yaml run config file into a plain mapping; run_config validates it.
"""
import os
from typing import Any, Dict

import yaml


class ConfigException(BaseException):
    """Base exception for the config class"""


class Config:
    """Config Class"""

    def __init__(self, filepath: str) -> None:
        """Initialize config with YAML file path."""
        try:
            with open(filepath, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except OSError as e:
            raise ConfigException(f"cannot read config file {filepath}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigException(f"config file {filepath} is not valid YAML: {e}") from e
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigException(f"config file {filepath} must hold a mapping at the top level")
        self.filepath = filepath
        self.data: Dict[str, Any] = data

    @staticmethod
    def from_env() -> "Config":
        """Static method to get config from environment variable"""
        config_path = os.getenv("CONFIG_PATH")
        if config_path is None:
            raise ConfigException("CONFIG_PATH environment variable not set")

        return Config(config_path)
