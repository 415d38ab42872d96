#!/usr/bin/env python3
"""
Reproduce every figure dataset, threshold and crossover in one run.

Writes the figure CSVs plus summary.csv into the output directory. Each
summary row holds the located s, the value this code is expected to give,
the value reported from plotted curves and whether s landed within
tolerance of the expected value. A miss counts as a failure.

Usage:
    python scripts/reproduce_figures.py
    python scripts/reproduce_figures.py --grid 21x21 --out-dir quick --skip-figures
"""

import argparse
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import pandas as pd

sys.path.append(str(Path(__file__).parent.parent))

from cvsuperpose.config import RunConfig, load_run_config  # noqa: E402
from cvsuperpose.errors import CvSimError  # noqa: E402
from cvsuperpose.sweep import (  # noqa: E402
    FIGURES,
    ThresholdQuery,
    find_crossover,
    find_threshold,
    run_figure_sweep,
    write_csv_atomic,
    write_figure,
)

SUMMARY_COLUMNS = ["quantity", "metric", "strategy", "versus", "s", "expected", "reported", "tolerance", "passed"]
DEFAULT_TOLERANCE = 5e-3


@dataclass(frozen=True)
class QuotedNumber:
    quantity: str
    metric: str
    strategy: str
    versus: str
    bracket: Tuple[float, float]
    expected: float
    reported: float
    tolerance: float = DEFAULT_TOLERANCE


QUOTED = [
    QuotedNumber("threshold", "epr", "coherent_AB", "", (0.2, 0.6), 0.3782, 0.378, 1e-3),
    QuotedNumber("threshold", "fidelity", "coherent_AB", "", (0.1, 0.6), 0.3047, 0.305, 1e-3),
    QuotedNumber("crossover", "epr", "coherent_AB", "addsub_AB", (0.02, 0.1), 0.055, 0.055),
    QuotedNumber("crossover", "epr", "addsub_AB", "sub_AB", (0.2, 0.5), 0.324, 0.324),
    # tangential merges: the curves are indistinguishable on a plot before they cross
    QuotedNumber("crossover", "epr", "coherent_AB", "sub_AB", (0.05, 0.3), 0.1474, 0.135),
    QuotedNumber("crossover", "fidelity", "coherent_AB", "addsub_AB", (0.02, 0.2), 0.075, 0.075),
    QuotedNumber("crossover", "fidelity", "addsub_AB", "sub_AB", (0.3, 0.6), 0.4445, 0.417),
    QuotedNumber("crossover", "fidelity", "coherent_AB", "sub_AB", (0.05, 0.4), 0.1856, 0.17),
    QuotedNumber("crossover", "entropy", "coherent_AB", "sub_AB", (0.2, 0.8), 0.3178, 0.44, 1e-2),
]

TARGETS = {"epr": 2.0, "fidelity": 0.5}


class Reproducer:
    """Run the figure sweeps and the quoted searches with one RunConfig."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.out_dir = config.ensure_out_dir()
        self.failures: List[str] = []

    def run_figures(self, figures: List[str]) -> None:
        for figure_id in figures:
            print("=" * 70)
            print(f"FIGURE {figure_id}")
            print("=" * 70)
            start = time.time()
            try:
                records = run_figure_sweep(figure_id, self.config)
                for path in write_figure(figure_id, records, self.out_dir):
                    print(f"✓ Wrote {path}")
                print(f"✓ {len(records)} rows in {time.time() - start:.1f}s\n")
            except CvSimError as e:
                print(f"✗ Figure {figure_id} failed: {e}\n")
                self.failures.append(f"figure {figure_id}")

    def locate(self, quoted: QuotedNumber) -> float:
        if quoted.quantity == "threshold":
            query = ThresholdQuery(quoted.metric, quoted.strategy, TARGETS[quoted.metric], quoted.bracket, r=1.0)
            return find_threshold(query, self.config)
        return find_crossover(quoted.metric, quoted.strategy, quoted.versus, quoted.bracket, self.config)

    def run_summary(self) -> pd.DataFrame:
        print("=" * 70)
        print("THRESHOLDS AND CROSSOVERS")
        print("=" * 70)
        rows = []
        for quoted in QUOTED:
            label = f"{quoted.quantity} {quoted.metric} {quoted.strategy}"
            if quoted.versus:
                label += f" vs {quoted.versus}"
            try:
                s = self.locate(quoted)
            except CvSimError as e:
                s = float("nan")
                print(f"✗ {label}: {e}")
            passed = abs(s - quoted.expected) <= quoted.tolerance
            if passed:
                print(f"✓ {label}: s = {s:.4f} (expected {quoted.expected}, reported {quoted.reported})")
            else:
                if not math.isnan(s):
                    print(f"✗ {label}: s = {s:.4f} outside {quoted.expected} +/- {quoted.tolerance:g}")
                self.failures.append(label)
            rows.append([quoted.quantity, quoted.metric, quoted.strategy, quoted.versus, s,
                         quoted.expected, quoted.reported, quoted.tolerance, passed])

        summary = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
        path = write_csv_atomic(summary, self.out_dir / "summary.csv")
        print(f"\n✓ Wrote {path}")
        return summary


def main():
    parser = argparse.ArgumentParser(description="Reproduce all figure data and quoted numbers")
    parser.add_argument("--grid", help='sweep grid density, "S" or "SxR"')
    parser.add_argument("--out-dir", help="output directory")
    parser.add_argument("--workers", type=int, help="worker processes for sweeps")
    parser.add_argument("--config", dest="config_file", help="key=value settings file")
    parser.add_argument("--figures", nargs="*", choices=FIGURES, default=list(FIGURES))
    parser.add_argument("--skip-figures", action="store_true")
    args = parser.parse_args()

    config = load_run_config(args.config_file, grid=args.grid, out_dir=args.out_dir, workers=args.workers)

    print("=" * 70)
    print("cvsuperpose - FULL REPRODUCTION")
    print("=" * 70)
    print(f"✓ Output: {config.out_dir}")
    print(f"✓ Grid: {config.grid_s}x{config.grid_r}, s in [0, {config.s_max}]")
    print(f"✓ Workers: {config.workers}\n")

    reproducer = Reproducer(config)
    if not args.skip_figures:
        reproducer.run_figures(args.figures)
    reproducer.run_summary()

    print("\n" + "=" * 70)
    if reproducer.failures:
        print(f"✗ {len(reproducer.failures)} step(s) failed: {', '.join(reproducer.failures)}")
        sys.exit(3)
    print("✓ All steps completed")
    print("=" * 70)


if __name__ == "__main__":
    main()
