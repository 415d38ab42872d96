"""
Cross-validation suite run by `cvsuperpose validate`.

Every check compares two independent routes (or a route and an analytic
oracle) and reports the worst discrepancy against its tolerance. Random
points come from fixed seeds, so reports are reproducible.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from cvsuperpose.config import RunConfig
from cvsuperpose.entanglement import (
    entanglement_entropy,
    schmidt_decompose,
    schmidt_table,
    tmss_entropy_closed_form,
)
from cvsuperpose.epr import (
    epr_closed_form,
    epr_frame_value,
    epr_pure_form,
    epr_value,
    pnes_brute_force,
    pnes_optimize,
)
from cvsuperpose.errors import CvSimError
from cvsuperpose.fock_core import (
    Ladder,
    Mode,
    SuperpositionOp,
    TruncationPolicy,
    TwoModeState,
    apply_ladder,
    build_reference_state,
    coherent_norm_constant,
    frame_reference_state,
    make_tmss,
    normalization_constants,
    operate,
    series_norm2,
)
from cvsuperpose.teleport import (
    CharFnPoint,
    average_fidelity,
    average_fidelity_frame,
    average_fidelity_state,
    char_fn_closed,
    char_fn_numeric,
    fidelity_closed_form,
    pnes_fidelity,
    tmss_fidelity,
)

SEED = 20240917


@dataclass
class CheckResult:
    name: str
    discrepancy: float
    tolerance: float
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.discrepancy < self.tolerance


def _relative(measured: float, expected: float) -> float:
    return abs(measured - expected) / abs(expected)


def check_epr_routes(config: RunConfig) -> float:
    """Closed form vs Fock moments vs squeezed frame on a 20x20 grid."""
    policy = config.policy()
    worst = 0.0
    for s in np.linspace(0.0, 1.0, 20):
        for r in np.linspace(0.0, 1.0, 20):
            if s == 0.0 and r == 0.0:
                continue
            op = SuperpositionOp.from_r(r)
            closed = epr_closed_form(s, op, op)
            moments = epr_value(build_reference_state("coherent_AB", s, op, policy))
            frame = epr_frame_value(frame_reference_state("coherent_AB", s, op), s)
            pure = epr_pure_form(s, op, op)
            worst = max(worst, abs(closed - moments), abs(closed - frame), abs(closed - pure))
    return worst


def check_char_fn_routes(config: RunConfig, points: int = 50) -> float:
    """Closed vs numeric characteristic function at seeded random points."""
    rng = np.random.default_rng(SEED)
    policy = config.policy()
    worst = 0.0
    for _ in range(points):
        s, r = rng.uniform(0.05, 1.0), rng.uniform(0.0, 1.0)
        lam2, lam3 = rng.uniform(-1.2, 1.2, 2) + 1j * rng.uniform(-1.2, 1.2, 2)
        op = SuperpositionOp.from_r(r)
        point = CharFnPoint(lam2, lam3, s)
        closed = char_fn_closed(s, op, op, point)
        numeric = char_fn_numeric(build_reference_state("coherent_AB", s, op, policy), point)
        worst = max(worst, abs(closed - numeric))
    return worst


def check_norm_constants(config: RunConfig) -> float:
    """m1, m2, m3 and N against measured norms of the operated series."""
    policy = config.policy()
    worst = 0.0
    for s in (0.1, 0.3, 0.6):
        tmss = make_tmss(s, policy)
        constants = normalization_constants(s)
        for name, key in (("sub_A", "m1"), ("sub_AB", "m2"), ("addsub_addsub_AB", "m3")):
            measured = series_norm2(operate(name, tmss, policy=policy))
            worst = max(worst, _relative(measured, 1.0 / constants[key]))
    for s in np.linspace(0.1, 1.0, 5):
        tmss = make_tmss(s, policy)
        lam2 = math.tanh(s) ** 2
        for r in np.linspace(0.0, 1.0, 5):
            op = SuperpositionOp.from_r(r)
            measured = operate("coherent_AB", tmss, op, policy=policy).norm2() / (1.0 - lam2)
            worst = max(worst, _relative(measured, 1.0 / coherent_norm_constant(s, op, op)))
    return worst


def check_tmss_oracles(config: RunConfig) -> float:
    """Entropy, EPR and fidelity of the squeezed vacuum against closed forms."""
    policy = config.policy()
    worst = 0.0
    for s in (0.1, 0.5, 1.0):
        state = make_tmss(s, policy)
        worst = max(worst, abs(entanglement_entropy(state) - tmss_entropy_closed_form(s)))
        worst = max(worst, abs(epr_value(state) - 2.0 * math.exp(-2.0 * s)))
        frame = average_fidelity_frame(frame_reference_state("tmss", s), s, order=config.quadrature_order)
        worst = max(worst, abs(frame.fidelity - tmss_fidelity(s)))
    state_route = average_fidelity_state(make_tmss(0.5, policy), order=config.quadrature_order)
    return max(worst, abs(state_route.fidelity - tmss_fidelity(0.5)))


def check_fidelity_routes(config: RunConfig) -> float:
    """Quadrature vs analytic fidelity, closed char fn vs squeezed frame."""
    worst = 0.0
    for s in (0.01, 0.2, 0.6, 1.0):
        for r in (0.0, 0.3, 0.7, 1.0):
            op = SuperpositionOp.from_r(r)
            exact = fidelity_closed_form(s, op, op)
            quad = average_fidelity(s, op, op, order=config.quadrature_order).fidelity
            frame = average_fidelity_frame(frame_reference_state("coherent_AB", s, op), s,
                                           order=config.quadrature_order).fidelity
            worst = max(worst, abs(exact - quad), abs(exact - frame))
    return worst


def check_pnes_fidelity_route(config: RunConfig, terms: int = 60) -> float:
    """Radial Gauss-Laguerre fidelity vs the squeezed frame for number-diagonal resources."""
    worst = 0.0
    for s in (0.1, 0.417, 0.8):
        lam = math.tanh(s)
        n = np.arange(terms)
        for name, power in (("sub_AB", 1), ("addsub_addsub_AB", 2)):
            frame = average_fidelity_frame(frame_reference_state(name, s), s, order=config.quadrature_order)
            worst = max(worst, abs(pnes_fidelity(lam ** n * (n + 1.0) ** power) - frame.fidelity))
    return worst


def check_commutator(config: RunConfig, states: int = 20) -> float:
    """<a a^dag> - <a^dag a> = 1 on seeded random states."""
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(states):
        coeffs = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        state = TwoModeState(coeffs / np.linalg.norm(coeffs), normalized=True)
        raised = apply_ladder(state, Mode.A, Ladder.CREATE).norm2()
        lowered = apply_ladder(state, Mode.A, Ladder.ANNIHILATE).norm2()
        worst = max(worst, abs(raised - lowered - 1.0))
    return worst


def check_truncation_doubling(config: RunConfig) -> float:
    """Metrics do not move when n_max is doubled."""
    base = config.policy()
    doubled = TruncationPolicy(n_max=2 * base.n_max, tail_tol=base.tail_tol, auto_grow=True)
    worst = 0.0
    for s, r in ((0.3, 0.2), (0.8, 0.5), (1.0, 0.9)):
        op = SuperpositionOp.from_r(r)
        small = build_reference_state("coherent_AB", s, op, base)
        large = build_reference_state("coherent_AB", s, op, doubled)
        worst = max(worst, abs(epr_value(small) - epr_value(large)))
        worst = max(worst, abs(entanglement_entropy(small) - entanglement_entropy(large)))
    return worst


def check_pnes_brute_force(config: RunConfig) -> float:
    """Tridiagonal optimum for N = 2 against a 10^6-point grid search."""
    _, value = pnes_optimize("diagonal", 2)
    _, brute = pnes_brute_force("diagonal", 2, points=1_000_000)
    return abs(value - brute)


def check_schmidt_table(config: RunConfig) -> float:
    """Weak-squeezing Schmidt coefficients at lambda = 1e-3."""
    s = math.atanh(1e-3)
    policy = config.policy()
    worst = 0.0
    for name, r in (("addsub_addsub_AB", None), ("coherent_A", 0.5), ("coherent_AB", 0.5)):
        op = SuperpositionOp.from_r(r) if r is not None else None
        values = schmidt_decompose(build_reference_state(name, s, op, policy)).values
        expected = sorted(schmidt_table(name, s, r), reverse=True)
        worst = max(worst, _relative(values[0], expected[0]), _relative(values[1], expected[1]))
    return worst


CHECKS: List[tuple] = [
    ("epr closed form vs moments (20x20 grid)", check_epr_routes, 1e-9),
    ("char fn closed vs numeric (50 points)", check_char_fn_routes, 1e-8),
    ("normalization constants m1 m2 m3 N", check_norm_constants, 1e-9),
    ("squeezed-vacuum oracles", check_tmss_oracles, 1e-8),
    ("fidelity quadrature vs analytic", check_fidelity_routes, 1e-9),
    ("fidelity radial route vs frame", check_pnes_fidelity_route, 1e-8),
    ("bosonic commutator (20 states)", check_commutator, 1e-10),
    ("truncation doubling", check_truncation_doubling, 1e-10),
    ("PNES N=2 vs brute force", check_pnes_brute_force, 1e-6),
    ("weak-squeezing Schmidt table", check_schmidt_table, 1e-4),
]


def run_validation(config: Optional[RunConfig] = None,
                   report: Optional[Callable[[CheckResult], None]] = None) -> List[CheckResult]:
    """
    Run every check.

    A check that raises a numerical error is recorded as failed with the
    error message.
    """
    config = config or RunConfig()
    results = []
    for name, check, tolerance in CHECKS:
        try:
            result = CheckResult(name, float(check(config)), tolerance)
        except CvSimError as e:
            result = CheckResult(name, math.inf, tolerance, error=str(e))
        results.append(result)
        if report:
            report(result)
    return results
