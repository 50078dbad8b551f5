"""
Command line entry point: ``slicewise {solve,train,evaluate,profile}``.
"""

import argparse
import logging
from pathlib import Path
import sys
from typing import List, Optional

from slicewise.env.scenario import generate_scenario, load_scenario
from slicewise.env.types import Scenario, SliceType
from slicewise.experiments import (
    ALGORITHMS,
    ExperimentSpec,
    emit_report,
    run_algorithm,
    run_experiment,
)
from slicewise.rl import MissingCheckpointError
from slicewise.scheduler import (
    ALL_KEYS,
    TYPE_KEYS,
    TrainingDivergedError,
    default_configs,
    load_bundle,
    save_bundle,
    train,
)
from slicewise.traffic import TraceFormatError, load_trace, profile_to_frame, profile_trace

logger = logging.getLogger(__name__)


def _scenario(args) -> Scenario:
    if args.scenario is not None:
        return load_scenario(args.scenario, args.seed)
    return generate_scenario(args.slices, 0 if args.seed is None else args.seed)


def solve(args) -> int:
    scenario = _scenario(args)
    bundle = None
    if args.algorithm in ("marl", "mono"):
        if args.checkpoints is None:
            logger.error("--algorithm %s needs --checkpoints", args.algorithm)
            return 2
        keys = list(TYPE_KEYS.values()) if args.algorithm == "marl" else ["monolithic"]
        try:
            bundle = load_bundle(args.checkpoints, keys)
        except MissingCheckpointError as e:
            logger.error("%s", e)
            return 2
    spec = ExperimentSpec(algorithms=(args.algorithm,), exact_time_limit=args.time_limit)
    result = run_algorithm(args.algorithm, scenario, spec, bundle)

    frame = result.to_frame(scenario)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.out, index=False)
    else:
        print(frame.to_string(index=False))
    print(f"algorithm: {result.algorithm}")
    print(f"cost_per_hour: {result.cost!r}")
    print(f"wall_time_s: {result.wall_time:.6f}")
    if result.rejected:
        print(f"rejected: {','.join(result.rejected)}")
    if args.algorithm == "exact":
        print(f"nodes_explored: {result.nodes_explored}")
        print(f"optimal: {result.optimal}")
    return 0 if result.placed else 1


def train_agents(args) -> int:
    keys = list(ALL_KEYS) if args.agent == "all" else [args.agent]
    overrides = {}
    if args.optimizer is not None:
        overrides["optimizer"] = args.optimizer
    configs = default_configs(keys, seed=args.seed, **overrides)
    try:
        bundle, report = train(
            configs,
            episodes=args.episodes,
            seed=args.seed,
            checkpoint_dir=args.out,
            threads=args.threads,
            progress=not args.quiet,
        )
    except TrainingDivergedError as e:
        logger.error("%s", e)
        return 1
    for path in save_bundle(bundle, args.out):
        print(path)
    report.to_csv(args.out / "training.csv", index=False)
    return 0


def evaluate(args) -> int:
    spec = ExperimentSpec.from_file(args.spec) if args.spec else ExperimentSpec()
    try:
        rows = run_experiment(spec, args.checkpoints, progress=not args.quiet)
    except MissingCheckpointError as e:
        logger.error("%s", e)
        return 1
    expected = len(spec.algorithms) * len(spec.slice_counts) * spec.trials
    for path in emit_report(rows, args.out):
        print(path)
    return 0 if len(rows) == expected else 1


def profile(args) -> int:
    try:
        records = load_trace(args.trace)
        slice_type = SliceType.parse(args.slice_type) if args.slice_type else None
        traffic = profile_trace(records, args.window, slice_type)
    except (TraceFormatError, ValueError) as e:
        logger.error("%s", e)
        return 1
    frame = profile_to_frame(traffic)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.out, index=False)
    print(traffic.summary().to_string())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slicewise", description="Network slice VNF placement"
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("solve", help="place one scenario")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="exact")
    p.add_argument("--scenario", type=Path, help="JSON scenario file")
    p.add_argument("--slices", type=int, default=5, help="slices without --scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--checkpoints", type=Path)
    p.add_argument("--time-limit", type=float, dest="time_limit")
    p.add_argument("--out", type=Path, help="placement CSV")
    p.set_defaults(run=solve)

    p = commands.add_parser("train", help="train placement agents")
    p.add_argument("--agent", choices=list(ALL_KEYS) + ["all"], default="all")
    p.add_argument("--episodes", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--optimizer", choices=["sgd", "adam"])
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=Path, required=True, help="checkpoint directory")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(run=train_agents)

    p = commands.add_parser("evaluate", help="run an experiment matrix")
    p.add_argument("--spec", type=Path, help="JSON experiment spec")
    p.add_argument("--checkpoints", type=Path)
    p.add_argument("--out", type=Path, required=True, help="report directory")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(run=evaluate)

    p = commands.add_parser("profile", help="profile a packet trace")
    p.add_argument("--trace", type=Path, required=True)
    p.add_argument("--window", type=float, default=1.0, help="seconds")
    p.add_argument("--slice-type", dest="slice_type")
    p.add_argument("--out", type=Path, help="per-window profile CSV")
    p.set_defaults(run=profile)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main())
