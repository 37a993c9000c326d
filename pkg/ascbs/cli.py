"""
Command-line front end: solve, validate, bench and compare-cbs.

Exit codes: 0 solved or valid, 2 unsolvable, 3 timeout, 1 for errors and invalid solutions.
"""

import sys
import argparse
from typing import List, Optional

import pandas as pd

from ascbs.grid import load_map
from ascbs.instance import PathError, load_instance, load_scen, load_solution, save_solution
from ascbs.constraints import InconsistentConstraintsError
from ascbs.search.high_level import Outcome, SolverConfig, VARIANTS, solve
from ascbs.simulator import validate
from ascbs.baseline import compare
from ascbs.bench import BenchExperiment
from ascbs.utils.logging import configure_from_env, get_logger


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSOLVABLE = 2
EXIT_TIMEOUT = 3

OUTCOME_EXIT_CODES = {
    Outcome.SOLVED: EXIT_OK,
    Outcome.UNSOLVABLE: EXIT_UNSOLVABLE,
    Outcome.TIMEOUT: EXIT_TIMEOUT,
}


class CLIArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _variant_list(text: str) -> List[str]:
    if text == "all":
        return list(VARIANTS)
    variants = [part.strip() for part in text.split(",") if part.strip()]
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown or not variants:
        raise argparse.ArgumentTypeError(f"unknown variants {unknown}; choose from {sorted(VARIANTS)} or 'all'")
    return variants


def _load_problem(args):
    if args.instance:
        return load_instance(args.instance)
    missing = [flag for flag, value in (("--map", args.map), ("--scen", args.scen),
                                        ("--streams", args.streams), ("--cycle", args.cycle))
               if value is None]
    if missing:
        raise ValueError(f"either --instance or all of {', '.join(missing)} are required")
    m = load_map(args.map)
    return load_scen(args.scen, m, args.streams, args.cycle, args.seed)


def cmd_solve(args) -> int:
    inst = _load_problem(args)
    cfg = SolverConfig.from_variant(args.variant, timeout=args.timeout, rng_seed=args.seed,
                                    cost_upper_bound=args.cost_upper_bound)
    report = solve(inst, cfg)

    if args.log_events:
        get_logger().save_events(args.log_events)

    soc = report.soc if report.soc is not None else "-"
    print(f"variant={cfg.name} outcome={report.outcome.value} soc={soc} "
          f"runtime_ms={report.elapsed * 1000:.3f} ct_expanded={report.ct_expanded} "
          f"ct_generated={report.ct_generated} low_level_expansions={report.low_level_expansions}")
    if report.solved and args.out:
        save_solution(args.out, inst, report.solution)
        print(f"solution written to {args.out}")
    return OUTCOME_EXIT_CODES[report.outcome]


def cmd_validate(args) -> int:
    inst = load_instance(args.instance)
    try:
        sol = load_solution(args.solution, inst)
    except PathError as e:
        print(f"structural: {e}")
        return EXIT_ERROR

    ok, report = validate(inst, sol, args.horizon)
    for problem in report.structural_errors:
        print(f"structural: {problem}")
    for event in report.events:
        print(str(event))
    if ok:
        print(f"valid (horizon {report.horizon})")
        return EXIT_OK
    if report.horizon_capped:
        print("note: horizon period capped")
    if report.events:
        print(f"invalid: {len(report.events)} collision(s) within horizon {report.horizon}")
    return EXIT_ERROR


def cmd_bench(args) -> int:
    experiment = BenchExperiment(
        map_path=args.map,
        scen_path=args.scen,
        streams_list=args.streams_list,
        cycle_list=args.cycle_list,
        seeds=args.seeds,
        base_seed=args.base_seed,
        variants=args.variants,
        timeout=args.timeout,
        jobs=args.jobs,
        deterministic=args.deterministic,
    )
    experiment.run_experiments()
    if args.csv:
        experiment.save(args.csv)
    print(experiment.summary().to_string(index=False))
    return EXIT_OK


def cmd_compare(args) -> int:
    inst = load_instance(args.instance)
    cfg = SolverConfig.from_variant(args.variant, timeout=args.timeout, rng_seed=args.seed)
    report = solve(inst, cfg)
    if not report.solved:
        print(f"ascbs outcome={report.outcome.value}; nothing to compare")
        return OUTCOME_EXIT_CODES[report.outcome]

    records = [compare(inst, report, horizon, args.timeout) for horizon in args.horizons]
    df = pd.DataFrame([record.as_row() for record in records])
    df["cbs_soc"] = df["cbs_soc"].astype("Int64")
    if args.csv:
        df.to_csv(args.csv, index=False, lineterminator="\n")
    print(df.to_string(index=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = CLIArgumentParser(prog="ascbs", description="Agent stream conflict-based search")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Solve one instance")
    p.add_argument("--map", help="Benchmark map file")
    p.add_argument("--scen", help="Benchmark scenario file")
    p.add_argument("--streams", type=int, help="Number of streams taken from the scenario")
    p.add_argument("--cycle", type=int, help="Cycle time")
    p.add_argument("--seed", type=int, default=0, help="Seed for start times and splitting")
    p.add_argument("--instance", help="Instance JSON file (instead of --map/--scen)")
    p.add_argument("--variant", choices=sorted(VARIANTS), default="a-nd")
    p.add_argument("--timeout", type=float, default=60.0, help="Budget in seconds")
    p.add_argument("--cost-upper-bound", type=int, default=None)
    p.add_argument("--out", help="Write the solution JSON here")
    p.add_argument("--log-events", help="Write the solver event log JSON here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="Check a solution by simulation")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="Run a seeded sweep and write CSV")
    p.add_argument("--map", required=True)
    p.add_argument("--scen", required=True)
    p.add_argument("--streams-list", type=_int_list, required=True)
    p.add_argument("--cycle-list", type=_int_list, required=True)
    p.add_argument("--seeds", type=int, default=4)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--variants", type=_variant_list, default=list(VARIANTS))
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--csv")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--deterministic", action="store_true", help="Zero the runtime column")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compare-cbs", help="Compare against unrolled CBS")
    p.add_argument("--instance", required=True)
    p.add_argument("--horizons", type=_int_list, default=[3, 9, 18])
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--variant", choices=sorted(VARIANTS), default="a-nd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logger = configure_from_env()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, InconsistentConstraintsError) as e:
        logger.debug(f"{args.command} failed: {e!r}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
