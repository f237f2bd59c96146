#
# Copyright (c) 2026 The qcivet Authors. All Rights Reserved.
# This file is a part of the qcivet project.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""``qcivet`` command-line entry point.

Every command writes its data files and a ``<command>-manifest.json`` under
the output directory (``--out``, overridden by ``QCIVET_OUT``).
"""
import argparse
import math
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import yaml

from qcivet import envs
from qcivet.auditchain import SCENARIO_KINDS
from qcivet.contracts import DEFAULT_DELTA, DEFAULT_THETA
from qcivet.experiments import (RunManifest, run_bench, run_chain_demo,
                                run_demo_command, run_exp1, run_exp2,
                                run_exp3, run_exp4, run_exp5, run_exp6,
                                run_probe, run_theorems, run_window,
                                verify_artifacts)
from qcivet.logger import init_logger
from qcivet.pipelines import DOMAINS, SCENARIOS
from qcivet.sampling import (DEFAULT_DELTA_VALUES, DEFAULT_P_VALUES,
                             DEFAULT_SHOTS, DEFAULT_TRIALS, ShotConfig)

logger = init_logger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED_OUTCOME = 1
EXIT_VIOLATION = 2

# Built-in values for the global options; --config and flags override.
GLOBAL_DEFAULTS: Dict[str, Any] = {
    "seed": 0,
    "out": "out",
    "shots": DEFAULT_SHOTS,
    "trials": DEFAULT_TRIALS,
    "p_list": list(DEFAULT_P_VALUES),
    "delta_list": list(DEFAULT_DELTA_VALUES),
    "theta": DEFAULT_THETA,
    "delta": DEFAULT_DELTA,
}


def _float_list(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}") from e
    if not values or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(
            f"expected finite comma-separated numbers, got {text!r}")
    return values


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"expected an integer, got {text!r}") from e
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected >= 0, got {value}")
    return value


def _global_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("global options")
    group.add_argument("--seed", type=int, default=None,
                       help="root seed for every random stream (default 0)")
    group.add_argument("--out", default=None,
                       help="output directory (default ./out; QCIVET_OUT "
                       "overrides)")
    group.add_argument("--shots", type=int, default=None,
                       help="shots per measurement (default 4096)")
    group.add_argument("--trials", type=int, default=None,
                       help="independent trials per sweep point (default 20)")
    group.add_argument("--p-list", type=_float_list, default=None,
                       help="comma-separated depolarizing probabilities")
    group.add_argument("--delta-list", type=_float_list, default=None,
                       help="comma-separated rotation offsets (radians)")
    group.add_argument("--theta", type=float, default=None,
                       help="reference rotation angle (default 2*pi/5)")
    group.add_argument("--delta", type=float, default=None,
                       help="offset of the bad candidate (default 0.4)")
    group.add_argument("--config", default=None,
                       help="YAML file with defaults for these options")
    return parent


def make_parser() -> argparse.ArgumentParser:
    parent = _global_options()
    parser = argparse.ArgumentParser(
        prog="qcivet",
        description="Contract-based integrity verification for staged "
        "hybrid pipelines.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, parents=[parent])

    add("exp1", "ideal separation table and per-cell grid")
    add("exp2", "partial-trace oracle on random a|00> + b|11>")
    add("exp3", "depolarizing noise sweep")
    add("exp4", "rotation-offset sweep")
    add("exp5", "per-input calibration on the device proxies")
    add("exp6", "noisy candidate separation on the device proxies")
    add("window", "calibration window overlay")
    add("probe", "empirical diamond/observable constant")
    add("theorems", "seeded property sweeps of the contract bounds")
    chain = add("chain-demo", "hash-chain attack scenario")
    chain.add_argument("kind", choices=SCENARIO_KINDS)
    demo = add("demo", "run a six-stage demonstration pipeline")
    demo.add_argument("domain", choices=DOMAINS)
    demo.add_argument("scenario", choices=SCENARIOS)
    bench = add("bench", "commit latency benchmark")
    bench.add_argument("--reps", type=_non_negative_int, default=10000)
    bench.add_argument("--stages", type=_non_negative_int, default=6)
    verify = add("verify", "replay an exported audit log")
    verify.add_argument("log", help="audit log (one JSON record per line)")
    verify.add_argument("--anchor", default=None, help="anchor file")
    return parser


def load_config(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ValueError(f"Config {path} must be a mapping.")
    config = {}
    for key, value in data.items():
        dest = str(key).replace("-", "_")
        if dest not in GLOBAL_DEFAULTS:
            raise ValueError(f"Unknown config key {key!r} in {path}.")
        if dest in ("p_list", "delta_list") and isinstance(value, str):
            value = _float_list(value)
        config[dest] = value
    return config


def resolve_options(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags win over the config file, which wins over built-ins."""
    config = load_config(args.config)
    options = {}
    for key, default in GLOBAL_DEFAULTS.items():
        explicit = getattr(args, key)
        options[key] = explicit if explicit is not None else config.get(
            key, default)
    if envs.QCIVET_OUT:
        options["out"] = envs.QCIVET_OUT
    return options


def _relative(paths: Sequence[str], out_dir: str) -> List[str]:
    return [os.path.relpath(p, out_dir) for p in paths]


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args)
        cfg = ShotConfig(shots=opts["shots"],
                         trials=opts["trials"],
                         seed=opts["seed"])
    except ValueError as e:
        parser.error(str(e))
    out = opts["out"]
    theta, delta = float(opts["theta"]), float(opts["delta"])
    p_list, delta_list = opts["p_list"], opts["delta_list"]
    exit_code = EXIT_OK

    commands: Dict[str, Callable[[], List[str]]] = {
        "exp1": lambda: run_exp1(out, theta, delta),
        "exp2": lambda: run_exp2(out, cfg.seed),
        "exp3": lambda: run_exp3(out, p_list, cfg, theta),
        "exp4": lambda: run_exp4(out, delta_list, theta),
        "exp5": lambda: run_exp5(out, cfg, theta),
        "exp6": lambda: run_exp6(out, cfg, theta, delta),
        "window": lambda: run_window(out, p_list, delta_list, cfg, theta),
        "probe": lambda: run_probe(out, theta, delta),
        "theorems": lambda: run_theorems(out, cfg.seed),
    }
    params: Dict[str, Any] = {
        "exp1": {"theta": theta, "delta": delta},
        "exp3": {"theta": theta, "p_list": p_list, "shots": cfg.shots,
                 "trials": cfg.trials},
        "exp4": {"theta": theta, "delta_list": delta_list},
        "exp5": {"theta": theta, "shots": cfg.shots, "trials": cfg.trials},
        "exp6": {"theta": theta, "delta": delta, "shots": cfg.shots,
                 "trials": cfg.trials},
        "window": {"theta": theta, "p_list": p_list,
                   "delta_list": delta_list, "shots": cfg.shots,
                   "trials": cfg.trials},
        "probe": {"theta": theta, "delta": delta},
    }.get(args.command, {})

    command = args.command
    if command in commands:
        paths = commands[command]()
    elif command == "chain-demo":
        params = {"kind": args.kind}
        paths = run_chain_demo(out, args.kind)
        command = f"chain-demo-{args.kind}"
    elif command == "demo":
        params = {"domain": args.domain, "scenario": args.scenario,
                  "shots": cfg.shots}
        paths, expected = run_demo_command(out, args.domain, args.scenario,
                                           cfg.seed, cfg.shots)
        command = f"demo-{args.domain}-{args.scenario}"
        if not expected:
            logger.error("%s/%s was not caught by the expected mechanism",
                         args.domain, args.scenario)
            exit_code = EXIT_UNEXPECTED_OUTCOME
    elif command == "bench":
        params = {"reps": args.reps, "stages": args.stages}
        paths = run_bench(out, args.reps, args.stages)
    else:
        message = verify_artifacts(args.log, args.anchor)
        if message is not None:
            print(message, file=sys.stderr)
            logger.error("%s", message)
            return EXIT_VIOLATION
        print("ok")
        return EXIT_OK

    manifest = RunManifest(command, cfg.seed, params, _relative(paths, out))
    manifest.write(out)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
