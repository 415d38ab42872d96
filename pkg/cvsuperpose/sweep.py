"""
Parameter sweeps, optimization over r, thresholds and crossovers.

Every figure dataset and quoted threshold is produced here. EPR is
minimized; entropy and fidelity are maximized.
"""

import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from cvsuperpose.config import RunConfig
from cvsuperpose.entanglement import entanglement_entropy
from cvsuperpose.epr import epr_closed_form, epr_frame_value, pnes_optimize
from cvsuperpose.errors import BracketError, ZeroStateError
from cvsuperpose.fock_core import SuperpositionOp, build_reference_state, frame_reference_state
from cvsuperpose.teleport import average_fidelity, average_fidelity_frame

METRICS = ("entropy", "epr", "fidelity")
MAXIMIZED = ("entropy", "fidelity")

# Strategy name -> reference state built for it
STRATEGY_STATES = {
    "tmss": "tmss",
    "sub_A": "sub_A",
    "sub_AB": "sub_AB",
    "addsub_AB": "addsub_addsub_AB",
    "add_AB": "add_AB",
    "coherent_A": "coherent_A",
    "coherent_AB": "coherent_AB",
}
STRATEGIES = tuple(STRATEGY_STATES)
COHERENT_STRATEGIES = ("coherent_A", "coherent_AB")

FIGURES = ("1a", "1b", "2", "3a", "3b", "4", "5", "6a", "6b")
SWEEP_COLUMNS = ["s", "r", "strategy", "metric", "value"]
PNES_COLUMNS = ["kind", "N", "metric", "value"]

# s used in place of 0 when the operated state vanishes there
S_ZERO_LIMIT = 1e-6
SCAN_POINTS = 101
R_TOL = 1e-6
THRESHOLD_TOL = 1e-5
CROSSOVER_TOL = 1e-4
CROSSOVER_MARGIN = 1e-12
ENDPOINT_TOL = 1e-6
MONOTONE_SAMPLES = 11

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


@dataclass(frozen=True)
class SweepRecord:
    """One evaluated (s, r) point; r is NaN when the strategy has no r."""

    s: float
    r: float
    strategy: str
    metric: str
    value: float

    def __post_init__(self):
        if self.strategy not in STRATEGY_STATES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite value for {self.strategy}/{self.metric} at s={self.s}")

    def sort_key(self) -> Tuple[float, float, str]:
        return self.s, (-1.0 if math.isnan(self.r) else self.r), self.strategy


@dataclass(frozen=True)
class PnesRecord:
    kind: str
    N: int
    metric: str
    value: float


@dataclass(frozen=True)
class ThresholdQuery:
    """Where does metric(strategy) cross target inside bracket?"""

    metric: str
    strategy: str
    target: float
    bracket: Tuple[float, float]
    r: Optional[float] = None
    optimize_r: bool = False

    def __post_init__(self):
        _check_names(self.metric, self.strategy)
        lo, hi = self.bracket
        if not 0.0 <= lo < hi:
            raise ValueError(f"bracket must satisfy 0 <= lo < hi, got {self.bracket}")
        if self.strategy in COHERENT_STRATEGIES and (self.r is None) == (not self.optimize_r):
            raise ValueError("coherent strategies need exactly one of r or optimize_r")


@dataclass(frozen=True)
class SweepTask:
    metric: str
    strategy: str
    s: float
    r: Optional[float] = None
    optimize: bool = False


# ---------------------------------------------------------------------------
# Single-point evaluation
# ---------------------------------------------------------------------------

def _check_names(metric: str, strategy: str) -> None:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r} (expected one of {', '.join(METRICS)})")
    if strategy not in STRATEGY_STATES:
        raise ValueError(f"unknown strategy {strategy!r} (expected one of {', '.join(STRATEGIES)})")


def _evaluate_exact(metric: str, strategy: str, s: float, op: Optional[SuperpositionOp],
                    op_b: Optional[SuperpositionOp], config: RunConfig) -> float:
    name = STRATEGY_STATES[strategy]

    if metric == "entropy":
        return entanglement_entropy(build_reference_state(name, s, op, config.policy(), op_b))

    if strategy == "coherent_AB":
        if metric == "epr":
            return epr_closed_form(s, op, op_b or op)
        return average_fidelity(s, op, op_b or op, order=config.quadrature_order).fidelity

    phi = frame_reference_state(name, s, op, op_b)
    if metric == "epr":
        return epr_frame_value(phi, s)
    return average_fidelity_frame(phi, s, order=config.quadrature_order).fidelity


def evaluate(metric: str, strategy: str, s: float, r: Optional[float] = None,
             config: Optional[RunConfig] = None, r_b: Optional[float] = None) -> float:
    """
    Metric value of one strategy at one point.

    Args:
        metric: entropy, epr or fidelity
        strategy: One of STRATEGIES
        s: Squeezing parameter
        r: Addition amplitude (coherent strategies only)
        config: Run settings (truncation, quadrature order)
        r_b: Mode-B amplitude for an asymmetric coherent_AB operation

    Returns:
        The metric value; at s = 0 a vanishing state is replaced by its
        s -> 0+ limit
    """
    _check_names(metric, strategy)
    config = config or RunConfig()
    if strategy in COHERENT_STRATEGIES:
        if r is None:
            raise ValueError(f"{strategy} needs r")
        op = SuperpositionOp.from_r(r)
        op_b = SuperpositionOp.from_r(r_b) if r_b is not None else None
    else:
        op = op_b = None

    try:
        return _evaluate_exact(metric, strategy, s, op, op_b, config)
    except ZeroStateError:
        if s != 0.0:
            raise
        return _evaluate_exact(metric, strategy, S_ZERO_LIMIT, op, op_b, config)


# ---------------------------------------------------------------------------
# Optimization over r
# ---------------------------------------------------------------------------

def golden_section_max(f: Callable[[float], float], a: float, b: float,
                       tol: float = R_TOL) -> Tuple[float, float]:
    """
    Golden-section search for a maximum of f on [a, b].

    Ties move toward a.

    Returns:
        (best evaluated x, f(x)) with the final interval narrower than tol
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    # Required steps to achieve tolerance
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(n - 1):
        if yc >= yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    return (c, yc) if yc >= yd else (d, yd)


def optimize_r(metric: str, s: float, strategy: str, config: Optional[RunConfig] = None,
               scan_points: int = SCAN_POINTS, tol: float = R_TOL) -> Tuple[float, float]:
    """
    Best r in [0, 1] for a coherent strategy.

    A uniform scan picks the best grid point (first one on ties); golden
    section then refines inside its two neighbouring cells. Points where the
    state vanishes count as worst.

    Returns:
        (r*, metric value at r*)
    """
    _check_names(metric, strategy)
    if strategy not in COHERENT_STRATEGIES:
        raise ValueError(f"optimize_r needs a coherent strategy, got {strategy!r}")
    config = config or RunConfig()
    sign = 1.0 if metric in MAXIMIZED else -1.0

    def score(r: float) -> float:
        try:
            return sign * evaluate(metric, strategy, s, r, config)
        except ZeroStateError:
            return -math.inf

    grid = np.linspace(0.0, 1.0, scan_points)
    scores = np.array([score(r) for r in grid])
    if not np.any(np.isfinite(scores)):
        raise ZeroStateError(0.0, config.policy().zero_tol)
    best = int(np.argmax(scores))

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, scan_points - 1)]
    r_refined, refined = golden_section_max(score, lo, hi, tol)

    if refined > scores[best]:
        return float(r_refined), sign * refined
    return float(grid[best]), sign * float(scores[best])


def best_value(metric: str, strategy: str, s: float, config: Optional[RunConfig] = None) -> float:
    """Strategy value at s, optimized over r when the strategy has one."""
    if strategy in COHERENT_STRATEGIES:
        return optimize_r(metric, s, strategy, config)[1]
    return evaluate(metric, strategy, s, config=config)


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def _bisect(g: Callable[[float], float], lo: float, hi: float, g_lo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_threshold(q: ThresholdQuery, config: Optional[RunConfig] = None, tol: float = THRESHOLD_TOL) -> float:
    """
    Squeezing at which metric(strategy) reaches q.target.

    Raises:
        BracketError: the bracket does not straddle the target or the
            sampled segment is not monotone
    """
    config = config or RunConfig()

    def g(s: float) -> float:
        if q.optimize_r:
            return best_value(q.metric, q.strategy, s, config) - q.target
        return evaluate(q.metric, q.strategy, s, q.r, config) - q.target

    lo, hi = q.bracket
    g_lo, g_hi = g(lo), g(hi)
    if abs(g_lo) <= ENDPOINT_TOL:
        return lo
    if abs(g_hi) <= ENDPOINT_TOL:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise BracketError(
            f"{q.metric} - {q.target} has the same sign at s={lo} and s={hi}", g_lo, g_hi
        )

    samples = [g(s) for s in np.linspace(lo, hi, MONOTONE_SAMPLES)]
    steps = np.diff(samples)
    if not (np.all(steps >= -1e-12) or np.all(steps <= 1e-12)):
        raise BracketError(f"{q.metric} is not monotone on [{lo}, {hi}]", g_lo, g_hi)

    return _bisect(g, lo, hi, g_lo, tol)


def improvement(metric: str, strategy_a: str, strategy_b: str, s: float,
                config: Optional[RunConfig] = None) -> float:
    """How much strategy_a beats strategy_b at s (positive when a is better)."""
    difference = best_value(metric, strategy_a, s, config) - best_value(metric, strategy_b, s, config)
    return difference if metric in MAXIMIZED else -difference


def find_crossover(metric: str, strategy_a: str, strategy_b: str, bracket: Tuple[float, float],
                   config: Optional[RunConfig] = None, tol: float = CROSSOVER_TOL,
                   margin: float = CROSSOVER_MARGIN) -> float:
    """
    Squeezing where strategy_a stops beating strategy_b.

    The root of improvement - margin is located, which also finds crossings
    where the optimized coherent curve merges into the plain one.
    """
    _check_names(metric, strategy_a)
    _check_names(metric, strategy_b)
    lo, hi = bracket
    if not 0.0 <= lo < hi:
        raise ValueError(f"bracket must satisfy 0 <= lo < hi, got {bracket}")

    def g(s: float) -> float:
        return improvement(metric, strategy_a, strategy_b, s, config) - margin

    g_lo, g_hi = g(lo), g(hi)
    if (g_lo > 0) == (g_hi > 0):
        raise BracketError(
            f"{strategy_a} vs {strategy_b} ({metric}) does not change order on [{lo}, {hi}]", g_lo, g_hi
        )
    return _bisect(g, lo, hi, g_lo, tol)


# ---------------------------------------------------------------------------
# Figure sweeps
# ---------------------------------------------------------------------------

CURVE_STRATEGIES = {
    "1a": ("entropy", ("tmss", "sub_A", "sub_AB", "addsub_AB", "coherent_A", "coherent_AB")),
    "3a": ("epr", ("tmss", "sub_A", "sub_AB", "addsub_AB", "coherent_AB")),
    "6a": ("fidelity", ("tmss", "sub_A", "sub_AB", "addsub_AB", "coherent_AB")),
}
# metric, squeezing values, curves over r, reference strategies
R_CURVES = {
    "1b": ("entropy", (0.1,), ("coherent_A", "coherent_AB"), ("tmss", "sub_A", "sub_AB", "addsub_AB")),
    "3b": ("epr", (0.01, 0.06), ("coherent_AB",), ()),
    "6b": ("fidelity", (0.01,), ("coherent_AB",), ("tmss", "sub_A", "sub_AB", "addsub_AB")),
}
SURFACES = {"2": "epr", "5": "fidelity"}
PNES_MAX_N = 8


def figure_tasks(figure_id: str, config: RunConfig) -> List[SweepTask]:
    """Independent evaluations making up one figure (not figure 4)."""
    s_grid = np.linspace(0.0, config.s_max, config.grid_s)
    r_grid = np.linspace(0.0, 1.0, config.grid_r)

    if figure_id in CURVE_STRATEGIES:
        metric, strategies = CURVE_STRATEGIES[figure_id]
        return [
            SweepTask(metric, strategy, float(s), optimize=strategy in COHERENT_STRATEGIES)
            for strategy in strategies for s in s_grid
        ]
    if figure_id in R_CURVES:
        metric, s_values, curves, references = R_CURVES[figure_id]
        tasks = [SweepTask(metric, strategy, s, float(r)) for s in s_values for strategy in curves for r in r_grid]
        tasks += [SweepTask(metric, strategy, s) for s in s_values for strategy in references]
        return tasks
    if figure_id in SURFACES:
        return [SweepTask(SURFACES[figure_id], "coherent_AB", float(s), float(r)) for s in s_grid for r in r_grid]
    raise ValueError(f"unknown figure {figure_id!r} (expected one of {', '.join(FIGURES)})")


def run_task(task: SweepTask, config: RunConfig) -> SweepRecord:
    if task.optimize:
        r, value = optimize_r(task.metric, task.s, task.strategy, config)
    else:
        r, value = task.r, evaluate(task.metric, task.strategy, task.s, task.r, config)
    return SweepRecord(s=task.s, r=float("nan") if r is None else r, strategy=task.strategy,
                       metric=task.metric, value=value)


def pnes_records(max_n: int = PNES_MAX_N) -> List[PnesRecord]:
    """Optimal EPR correlation of both PNES classes for N = 0..max_n."""
    return [
        PnesRecord(kind=kind, N=N, metric="epr", value=pnes_optimize(kind, N)[1])
        for kind in ("diagonal", "ladder") for N in range(max_n + 1)
    ]


def run_figure_sweep(figure_id: str, config: Optional[RunConfig] = None,
                     progress: Optional[Callable[[int, int], None]] = None) -> List[Union[SweepRecord, PnesRecord]]:
    """
    All records of one figure, in deterministic (s, r, strategy) order.

    Args:
        figure_id: One of FIGURES
        config: Grid, truncation and worker settings
        progress: Called with (done, total) as tasks finish

    Returns:
        SweepRecords (PnesRecords for figure 4)
    """
    config = config or RunConfig()
    if figure_id == "4":
        return pnes_records()

    tasks = figure_tasks(figure_id, config)
    records = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            for record in executor.map(run_task, tasks, [config] * len(tasks), chunksize=8):
                records.append(record)
                if progress:
                    progress(len(records), len(tasks))
    else:
        for task in tasks:
            records.append(run_task(task, config))
            if progress:
                progress(len(records), len(tasks))

    return sorted(records, key=SweepRecord.sort_key)


def records_frame(records: Sequence[Union[SweepRecord, PnesRecord]]) -> pd.DataFrame:
    if records and isinstance(records[0], PnesRecord):
        return pd.DataFrame([[r.kind, r.N, r.metric, r.value] for r in records], columns=PNES_COLUMNS)
    return pd.DataFrame([[r.s, r.r, r.strategy, r.metric, r.value] for r in records], columns=SWEEP_COLUMNS)


def figure_curves(figure_id: str, records: Sequence[Union[SweepRecord, PnesRecord]]) -> Dict[str, pd.DataFrame]:
    """
    Split a figure's records into one table per curve or surface.

    Returns:
        file stem -> DataFrame, in a fixed order
    """
    frame = records_frame(records)
    curves: Dict[str, pd.DataFrame] = {}
    if figure_id == "4":
        for kind in ("diagonal", "ladder"):
            curves[f"fig4_{kind}"] = frame[frame["kind"] == kind].reset_index(drop=True)
    elif figure_id in SURFACES:
        curves[f"fig{figure_id}"] = frame
    elif figure_id in R_CURVES:
        for (strategy, s), part in frame.groupby(["strategy", "s"], sort=True):
            curves[f"fig{figure_id}_{strategy}_s{s:g}"] = part.reset_index(drop=True)
    else:
        for strategy, part in frame.groupby("strategy", sort=True):
            curves[f"fig{figure_id}_{strategy}"] = part.reset_index(drop=True)
    return curves


def write_csv_atomic(frame: pd.DataFrame, path: Path) -> Path:
    """Write a CSV with fixed formatting via a temp file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            frame.to_csv(handle, index=False, float_format="%.12g", lineterminator="\n", na_rep="nan")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_figure(figure_id: str, records: Sequence[Union[SweepRecord, PnesRecord]], out_dir: Path) -> List[Path]:
    return [
        write_csv_atomic(frame, Path(out_dir) / f"{stem}.csv")
        for stem, frame in figure_curves(figure_id, records).items()
    ]
