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
Command line entry point.

    chordflow solve|check|brake [--config PATH] [--out DIR] [--plot] [--seed N] [--log-level LEVEL]

Without ``--config`` the path is read from CONFIG_PATH, which a ``.env`` file may provide.
Exit codes: 0 success, 1 invalid input or a domain that fails the concavity test, 2 stalled or
unconverged runs.
"""
import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional

from dotenv import find_dotenv, load_dotenv

from chordflow.orchestrators import RunOrchestrator, RunReport
from chordflow.orchestrators.run_orchestrator import EXIT_INVALID
from chordflow.utils.artifacts import dumps
from chordflow.utils.config import ConfigException
from chordflow.utils.run_config import load_run_config

_logger_ = logging.getLogger(__name__)

COMMANDS = ("solve", "check", "brake")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chordflow", description="Orthogonal geodesic chords and brake orbits")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="run config YAML (default: $CONFIG_PATH)")
    parser.add_argument("--out", default=None, help="artifact directory (default: outputs.directory)")
    parser.add_argument("--plot", action="store_true", default=None, help="write plot.svg")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--log-level", default=None, help="logging level (default: $CHORDFLOW_LOG_LEVEL or INFO)")
    return parser


def _configure_logging(level: Optional[str]) -> None:
    name = (level or os.getenv("CHORDFLOW_LOG_LEVEL") or "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _run(
    command: str,
    config_path: Optional[str],
    out: Optional[str],
    plot: Optional[bool],
    seed: Optional[int],
) -> int:
    try:
        config = load_run_config(config_path)
    except ConfigException as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_INVALID
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    orchestrator = RunOrchestrator.from_config(config, out_dir=out, plot=plot)
    runners: Dict[str, Callable[[], RunReport]] = {
        "solve": orchestrator.run_solve,
        "check": orchestrator.run_check,
        "brake": orchestrator.run_brake,
    }
    try:
        report = runners[command]()
    except ConfigException as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(dumps(report.summary))
    for path in report.artifacts:
        _logger_.info("wrote %s", path)
    return report.exit_code


def cmd_solve(
    config_path: Optional[str],
    out: Optional[str] = None,
    plot: Optional[bool] = None,
    seed: Optional[int] = None,
) -> int:
    return _run("solve", config_path, out, plot, seed)


def cmd_check(config_path: Optional[str], out: Optional[str] = None, seed: Optional[int] = None) -> int:
    return _run("check", config_path, out, None, seed)


def cmd_brake(config_path: Optional[str], out: Optional[str] = None, seed: Optional[int] = None) -> int:
    return _run("brake", config_path, out, None, seed)


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv(find_dotenv(usecwd=True))
    args = build_parser().parse_args(argv)
    _configure_logging(args.log_level)
    return _run(args.command, args.config, args.out, args.plot, args.seed)


if __name__ == "__main__":
    sys.exit(main())
