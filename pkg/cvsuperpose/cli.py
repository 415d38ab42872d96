"""
Command-line interface.

Usage:
    python -m cvsuperpose figure 2 --grid 101x101
    python -m cvsuperpose eval epr --s 0.5 --strategy tmss
    python -m cvsuperpose threshold --metric epr --strategy coherent_AB --r 1 --bracket 0.2 0.6
    python -m cvsuperpose crossover --metric fidelity --strategy addsub_AB --versus sub_AB --bracket 0.3 0.6
    python -m cvsuperpose validate
    python -m cvsuperpose state --strategy coherent_AB --s 0.3 --r 0.5

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical failure.
"""

import argparse
import math
import sys
from typing import List, Optional

from cvsuperpose.config import RunConfig, load_run_config
from cvsuperpose.errors import CvSimError
from cvsuperpose.fock_core import SuperpositionOp, build_reference_state, frame_reference_state, state_table
from cvsuperpose.sweep import (
    COHERENT_STRATEGIES,
    FIGURES,
    METRICS,
    STRATEGIES,
    STRATEGY_STATES,
    ThresholdQuery,
    evaluate,
    find_crossover,
    find_threshold,
    optimize_r,
    run_figure_sweep,
    write_figure,
)
from cvsuperpose.validation import CheckResult, run_validation

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

DEFAULT_TARGETS = {"epr": 2.0, "fidelity": 0.5}


def _settings_parser() -> argparse.ArgumentParser:
    """Flags shared by every subcommand."""
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("run settings (flags > --config file > environment > defaults)")
    group.add_argument("--n-max", type=int, help="Fock cutoff per mode (default 60)")
    group.add_argument("--tail-tol", type=float, help="truncated probability mass allowed (default 1e-12)")
    group.add_argument("--quad-order", type=int, dest="quadrature_order",
                       help="Gauss-Hermite order per axis (default 40)")
    group.add_argument("--grid", help='sweep grid density, "S" or "SxR" (default 51x101)')
    group.add_argument("--s-max", type=float, help="upper end of squeezing sweeps (default 1.0)")
    group.add_argument("--out-dir", help="directory for CSV output (default results)")
    group.add_argument("--workers", type=int, help="worker processes for sweeps (default 1)")
    group.add_argument("--config", dest="config_file", help="key=value settings file")
    return parent


def build_parser() -> argparse.ArgumentParser:
    settings = _settings_parser()
    parser = argparse.ArgumentParser(
        prog="cvsuperpose",
        description="Coherent photon subtraction/addition on two-mode squeezed states: "
                    "entanglement, EPR correlation and teleportation fidelity.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    figure = commands.add_parser("figure", parents=[settings], help="write the CSV data of one figure")
    figure.add_argument("figure_id", choices=FIGURES)

    ev = commands.add_parser("eval", parents=[settings], help="evaluate one metric at one point")
    ev.add_argument("metric", choices=METRICS)
    ev.add_argument("--s", type=float, required=True)
    ev.add_argument("--r", type=float, help="addition amplitude (coherent strategies)")
    ev.add_argument("--r-b", type=float, help="mode-B amplitude for an asymmetric coherent_AB")
    ev.add_argument("--strategy", choices=STRATEGIES, default="coherent_AB")
    ev.add_argument("--optimize-r", action="store_true", help="optimize r instead of fixing it")

    threshold = commands.add_parser("threshold", parents=[settings], help="squeezing where a metric hits its bound")
    threshold.add_argument("--metric", choices=("epr", "fidelity"), required=True)
    threshold.add_argument("--strategy", choices=STRATEGIES, default="coherent_AB")
    threshold.add_argument("--r", type=float)
    threshold.add_argument("--optimize-r", action="store_true")
    threshold.add_argument("--target", type=float, help="default 2 for epr, 0.5 for fidelity")
    threshold.add_argument("--bracket", type=float, nargs=2, metavar=("S_LO", "S_HI"), default=(0.0, 1.0))

    crossover = commands.add_parser("crossover", parents=[settings], help="squeezing where two strategies swap order")
    crossover.add_argument("--metric", choices=METRICS, required=True)
    crossover.add_argument("--strategy", choices=STRATEGIES, required=True)
    crossover.add_argument("--versus", choices=STRATEGIES, required=True)
    crossover.add_argument("--bracket", type=float, nargs=2, metavar=("S_LO", "S_HI"), required=True)

    commands.add_parser("validate", parents=[settings], help="run every cross-check")

    state = commands.add_parser("state", parents=[settings], help="dump a reference state as CSV")
    state.add_argument("--strategy", choices=STRATEGIES, required=True)
    state.add_argument("--s", type=float, required=True)
    state.add_argument("--r", type=float)
    state.add_argument("--frame", action="store_true", help="dump the squeezed-frame state instead")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return load_run_config(
        args.config_file,
        n_max=args.n_max,
        tail_tol=args.tail_tol,
        quadrature_order=args.quadrature_order,
        grid=args.grid,
        s_max=args.s_max,
        out_dir=args.out_dir,
        workers=args.workers,
    )


def _fmt(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:.12g}"


def cmd_figure(args: argparse.Namespace, config: RunConfig) -> int:
    out_dir = config.ensure_out_dir()
    print("=" * 70)
    print(f"FIGURE {args.figure_id}: grid {config.grid_s}x{config.grid_r}, s in [0, {config.s_max}]")
    print("=" * 70)

    def progress(done: int, total: int) -> None:
        if done == total or done % max(1, total // 10) == 0:
            print(f"  [{done}/{total}] points evaluated")

    records = run_figure_sweep(args.figure_id, config, progress)
    for path in write_figure(args.figure_id, records, out_dir):
        print(f"✓ Wrote {path}")
    print(f"\n✓ {len(records)} rows total")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, config: RunConfig) -> int:
    r = args.r
    if args.optimize_r:
        r, value = optimize_r(args.metric, args.s, args.strategy, config)
    else:
        value = evaluate(args.metric, args.strategy, args.s, r, config, r_b=args.r_b)
    print(",".join([_fmt(args.s), _fmt(r), args.strategy, args.metric, _fmt(value)]))
    return EXIT_OK


def cmd_threshold(args: argparse.Namespace, config: RunConfig) -> int:
    query = ThresholdQuery(
        metric=args.metric,
        strategy=args.strategy,
        target=args.target if args.target is not None else DEFAULT_TARGETS[args.metric],
        bracket=tuple(args.bracket),
        r=args.r,
        optimize_r=args.optimize_r,
    )
    print(_fmt(find_threshold(query, config)))
    return EXIT_OK


def cmd_crossover(args: argparse.Namespace, config: RunConfig) -> int:
    print(_fmt(find_crossover(args.metric, args.strategy, args.versus, tuple(args.bracket), config)))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, config: RunConfig) -> int:
    print("=" * 70)
    print("CROSS-VALIDATION")
    print("=" * 70)

    def report(result: CheckResult) -> None:
        mark = "✓" if result.passed else "✗"
        detail = result.error or f"max |delta| = {result.discrepancy:.3e} (tol {result.tolerance:.0e})"
        print(f"{mark} {result.name}: {detail}")

    results = run_validation(config, report)
    failed = [r.name for r in results if not r.passed]
    print("\n" + "=" * 70)
    if failed:
        print(f"✗ {len(failed)} of {len(results)} checks failed: {', '.join(failed)}")
        return EXIT_VALIDATION
    print(f"✓ All {len(results)} checks passed")
    return EXIT_OK


def cmd_state(args: argparse.Namespace, config: RunConfig) -> int:
    name = STRATEGY_STATES[args.strategy]
    if args.strategy in COHERENT_STRATEGIES and args.r is None:
        raise ValueError(f"{args.strategy} needs --r")
    op = SuperpositionOp.from_r(args.r) if args.strategy in COHERENT_STRATEGIES else None
    if args.frame:
        state = frame_reference_state(name, args.s, op)
    else:
        state = build_reference_state(name, args.s, op, config.policy())
    state_table(state).to_csv(sys.stdout, index=False, float_format="%.12g", lineterminator="\n")
    return EXIT_OK


COMMANDS = {
    "figure": cmd_figure,
    "eval": cmd_eval,
    "threshold": cmd_threshold,
    "crossover": cmd_crossover,
    "validate": cmd_validate,
    "state": cmd_state,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        config = _config_from_args(args)
        return COMMANDS[args.command](args, config)
    except ValueError as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_USAGE
    except CvSimError as e:
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
