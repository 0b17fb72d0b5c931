import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config import configure_logging
from const import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_TOLERANCE
from errors import ScenarioValidationError, SimulationError
from outputs import write_outputs
from runners import run_scenario, summarize
from scenario import check_seed, load_scenario
from schemas import RunSummary

logger = logging.getLogger(__name__)

SUBCOMMANDS = {
    "simulate-diffusion": "diffusion",
    "solve-fp": "fokker-planck",
    "evolve-quantum": "quantum",
    "mixture": "mixture",
    "bridge": "bridge",
}
FORMATS = ("csv", "json-summary")


def _add_run_flags(parser: argparse.ArgumentParser, scenario: bool = True) -> None:
    if scenario:
        parser.add_argument("--scenario", required=True, type=Path,
                            help="Scenario JSON document")
    parser.add_argument("--seed", type=int, default=None,
                        help="Override the scenario seed")
    parser.add_argument("--out", type=Path, default=None,
                        help="Output directory (default: the scenario's output.directory)")
    parser.add_argument("--threads", type=int, default=1,
                        help="Worker processes for trajectory ensembles")
    parser.add_argument("--format", dest="formats", action="append", choices=FORMATS,
                        default=None, help="Output format; repeat for several (default: both)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reduction-lab",
        description="Stochastic state-reduction simulations: norm diffusion, Fokker-Planck, "
                    "track-pattern quantum dynamics and their bridges.",
    )
    parser.add_argument("--log-level", default=None, help="Overrides REDUCTION_LAB_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, kind in SUBCOMMANDS.items():
        _add_run_flags(commands.add_parser(name, help=f"Run a {kind} scenario"))

    verify = commands.add_parser("verify", help="Run the full acceptance suite")
    _add_run_flags(verify, scenario=False)
    verify.add_argument("--quick", action="store_true",
                        help="Use one tenth of the trajectory counts")

    commands.add_parser("schema", help="Print the JSON schema of run summaries")
    return parser


def _run_command(args: argparse.Namespace) -> RunSummary:
    scenario = load_scenario(args.scenario)
    expected = SUBCOMMANDS[args.command]
    if scenario.kind != expected:
        raise ScenarioValidationError(
            f"'{args.command}' runs {expected} scenarios, got kind '{scenario.kind}'",
            field="kind",
        )
    if args.seed is not None:
        scenario = scenario.model_copy(update={"seed": check_seed(args.seed)})
    return run_scenario(scenario, out_dir=args.out, formats=args.formats, workers=args.threads)


def _verify_command(args: argparse.Namespace) -> RunSummary:
    from runners import verify_runner

    seed = 0 if args.seed is None else check_seed(args.seed)
    result = verify_runner.run(seed=seed, quick=args.quick, workers=args.threads)
    summary = summarize("verify", seed, {"suite": "acceptance", "quick": args.quick}, result)
    directory = args.out if args.out is not None else Path("out") / "verify"
    write_outputs(summary, result.tables, directory, args.formats or FORMATS)
    return summary


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "schema":
        print(json.dumps(RunSummary.model_json_schema(), indent=2))
        return EXIT_OK

    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "verify":
            summary = _verify_command(args)
        else:
            summary = _run_command(args)
    except SimulationError as exc:
        field = getattr(exc, "field", None)
        where = f" (field {field})" if field else ""
        logger.error(f"{type(exc).__name__}{where}: {exc.detail}")
        return exc.exit_code
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_RUNTIME

    if not summary.passed:
        failed = [check.name for check in summary.checks if not check.passed]
        logger.warning(f"{len(failed)} tolerance check(s) failed: {', '.join(failed)}")
        return EXIT_TOLERANCE
    logger.info("All declared checks passed")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
