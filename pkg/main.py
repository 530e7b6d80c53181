#!/usr/bin/env python3
"""
Rendezvous & Docking MPC Simulator - Main Entry Point

Command-line surface for closed-loop runs, sampling-versus-standard
comparisons and scenario validation.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from config import settings
from core.errors import DynamicsError, QpInfeasible, RvdError, ScenarioError
from core.metrics import compare, metrics
from core.scenario import load_scenario, validation_report
from core.simulator import run_closed_loop, run_seeds
from models import RunMode
from utils.exporter import LogExporter, SUPPORTED_FORMATS, emit
from utils.logger import setup_logger

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_ABORTED = 3
EXIT_INFEASIBLE = 4


def setup_application() -> None:
    """Setup logging from the settings."""
    setup_logger(
        log_level=settings.get('logging.level', 'INFO'),
        log_to_file=bool(settings.get('logging.to_file', True)),
        log_dir=settings.get_log_dir(),
    )


def _override(value: str) -> Tuple[str, Any]:
    """Parse KEY=VALUE; the value is read as JSON when it parses, else kept as text."""
    key, sep, raw = value.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got '{value}'")
    try:
        return key.strip(), json.loads(raw)
    except json.JSONDecodeError:
        return key.strip(), raw


def apply_overrides(log_level: Optional[str], overrides: Sequence[Tuple[str, Any]]) -> None:
    """Push command-line overrides into the in-memory settings."""
    for key, value in overrides:
        settings.set(key, value)
    if log_level is not None:
        settings.set('logging.level', log_level)


def _formats(value: str) -> List[str]:
    formats = [item.strip() for item in value.split(",") if item.strip()]
    unknown = [item for item in formats if item not in SUPPORTED_FORMATS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unsupported format(s) {unknown}; choose from {list(SUPPORTED_FORMATS)}")
    return formats


def build_parser() -> argparse.ArgumentParser:
    """Command-line parser with the run, compare and validate commands."""
    parser = argparse.ArgumentParser(
        prog="rvd-mpc",
        description="Sampling-based PWA MPC for 6-DOF rendezvous and docking with a tumbling target.",
    )
    parser.add_argument("--log-level", default=None, help="Override logging.level from the settings file.")
    parser.add_argument("--set", dest="overrides", type=_override, action="append", default=[], metavar="KEY=VALUE",
                        help="Override a setting for this invocation, e.g. solver.max_iter=400.")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one closed-loop simulation.")
    run.add_argument("--scenario", required=True, type=Path, help="Scenario JSON file.")
    run.add_argument("--mode", choices=[m.value for m in RunMode], default=None,
                     help="Controller variant; overrides run.mode.")
    run.add_argument("--seed", type=int, default=None, help="Random seed; overrides run.seed.")
    run.add_argument("--out", type=Path, default=None, help="Output directory.")
    run.add_argument("--duration", type=float, default=None, help="Simulated time (s); overrides run.duration.")
    run.add_argument("--format", type=_formats, default=None, help="Comma-separated output formats: csv,json.")
    run.add_argument("--dump-qp", type=Path, default=None, help="Write the first step's QP problems here.")

    cmp = commands.add_parser("compare", help="Compare sampling and standard modes over several seeds.")
    cmp.add_argument("--scenario", required=True, type=Path, help="Scenario JSON file.")
    cmp.add_argument("--seeds", type=int, default=10, help="Number of seeds (0 .. N-1).")
    cmp.add_argument("--out", type=Path, default=None, help="Output directory.")
    cmp.add_argument("--duration", type=float, default=None, help="Simulated time (s); overrides run.duration.")
    cmp.add_argument("--jobs", type=int, default=1, help="Worker processes.")
    cmp.add_argument("--format", type=_formats, default=None, help="Formats of the per-run logs.")

    val = commands.add_parser("validate", help="Load and validate a scenario file.")
    val.add_argument("--scenario", required=True, type=Path, help="Scenario JSON file.")
    return parser


def _output_formats(args) -> List[str]:
    return args.format if args.format is not None else list(settings.get('output.formats', ["csv", "json"]))


def cmd_run(args) -> int:
    logger = logging.getLogger(__name__)
    scenario = load_scenario(args.scenario)
    if args.mode is not None:
        scenario = scenario.with_mode(RunMode(args.mode))
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    if args.duration is not None:
        scenario = scenario.with_duration(args.duration)

    out_dir = args.out or settings.get_output_path() / f"{args.scenario.stem}_{scenario.mode.value}_seed{scenario.seed}"
    log = run_closed_loop(scenario, dump_dir=args.dump_qp)
    summary = metrics(log)
    paths = emit(log, out_dir, _output_formats(args), summary=summary)

    logger.info(f"Run complete: {len(log)} steps written to {out_dir}")
    print(f"{len(log)} steps, {summary.reset_count} wrap resets, {summary.relaxed_steps} relaxed steps")
    for channel, value in summary.convergence_time.items():
        converged = "never" if value is None else f"{value:.1f} s"
        print(f"  {channel:>6}: converged {converged}, steady RMS {summary.steady_state_rms[channel]:.3e}")
    print(f"  lvlh steady RMS {summary.steady_state_rms['lvlh']:.3e} m")
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.duration is not None:
        scenario = scenario.with_duration(args.duration)
    seeds = list(range(args.seeds))
    out_dir = args.out or settings.get_output_path() / f"{args.scenario.stem}_compare"

    runs = run_seeds(scenario, seeds, modes=(RunMode.SAMPLING, RunMode.STANDARD), jobs=max(1, args.jobs))
    formats = _output_formats(args)
    for mode, logs in runs.items():
        for seed, log in zip(seeds, logs):
            emit(log, Path(out_dir) / f"{mode.value}_seed{seed}", formats)

    report = compare(runs[RunMode.SAMPLING], runs[RunMode.STANDARD], seeds)
    paths = LogExporter(out_dir).write_report(report)

    print(f"{'metric':<18}{'channel':<8}{report.mode_a:>14}{report.mode_b:>14}  winner")
    for row in report.rows:
        mean_a = "n/a" if row.mean_a is None else f"{row.mean_a:.4e}"
        mean_b = "n/a" if row.mean_b is None else f"{row.mean_b:.4e}"
        print(f"{row.metric:<18}{row.channel:<8}{mean_a:>14}{mean_b:>14}  {row.winner}")
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    print(f"{args.scenario}: valid")
    for line in validation_report(scenario):
        print(f"  {line}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "validate": cmd_validate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point."""
    args = build_parser().parse_args(argv)
    try:
        apply_overrides(args.log_level, args.overrides)
    except KeyError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    setup_application()
    logger = logging.getLogger(__name__)

    try:
        return COMMANDS[args.command](args)
    except ScenarioError as e:
        logger.error(f"Invalid scenario: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except DynamicsError as e:
        logger.error(f"Run aborted: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ABORTED
    except QpInfeasible as e:
        logger.error(f"Run aborted: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except RvdError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
