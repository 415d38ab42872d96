"""
EPR correlation Delta^2(x_A - x_B) + Delta^2(p_A + p_B).

Three routes to the same number:
    - quadrature moments contracted over the Fock coefficient matrix
    - the closed form in terms of the A, B, C, D amplitudes of the operated
      squeezed state
    - the squeezed frame, where the variance of S(s) phi is e^{-2s} times
      the variance of phi

Values below 2 certify entanglement.

Also covers photon-number entangled states (PNES) sum d_n |n, n> and
sum e_n |n, n+1>, whose optimal EPR correlation is a Rayleigh quotient.
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.optimize import minimize

from cvsuperpose.config import DEFAULT_ZERO_TOL
from cvsuperpose.errors import NumericalFailureError, StateError, ZeroStateError
from cvsuperpose.fock_core import (
    NORMALIZED_TOL,
    Mode,
    Ladder,
    SuperpositionOp,
    TwoModeState,
    apply_ladder,
    inner_product,
)

SEPARABLE_BOUND = 2.0
PNES_KINDS = ("diagonal", "ladder")


@dataclass(frozen=True)
class QuadratureMoments:
    """First and second moments of the mode operators."""

    mean_a: complex
    mean_b: complex
    n_a: float
    n_b: float
    aa: complex
    bb: complex
    ab: complex
    ab_dag: complex


@dataclass(frozen=True)
class EprClosedFormTerms:
    """
    Amplitudes of the operated squeezed state in the squeezed frame.

    phi = B|00> + A|11> + C|02> + D|20>, with M = A^2 + B^2 + C^2 + D^2.
    """

    A: float
    B: float
    C: float
    D: float

    @property
    def M(self) -> float:
        return self.A ** 2 + self.B ** 2 + self.C ** 2 + self.D ** 2


@dataclass(frozen=True)
class PnesSpec:
    """Photon-number entangled state: diagonal sum d_n|n,n> or ladder sum e_n|n,n+1>."""

    kind: str
    coeffs: Tuple[float, ...]

    def __post_init__(self):
        if self.kind not in PNES_KINDS:
            raise ValueError(f"PNES kind must be one of {PNES_KINDS}, got {self.kind!r}")
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise ValueError("PNES coefficients must be a non-empty list of finite reals")
        if not any(c != 0.0 for c in coeffs):
            raise ValueError("PNES needs at least one nonzero coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def support(self) -> List[Tuple[int, int]]:
        return pnes_support(self.kind, self.N)

    def ratios(self) -> Tuple[float, ...]:
        """Coefficients relative to the first one."""
        return tuple(c / self.coeffs[0] for c in self.coeffs)


# ---------------------------------------------------------------------------
# Moment route
# ---------------------------------------------------------------------------

def quadrature_moments(state: TwoModeState) -> QuadratureMoments:
    """
    Expectation values of a, b and their quadratic products.

    Raises:
        StateError: state is not normalized
    """
    if abs(state.norm2() - 1.0) > NORMALIZED_TOL:
        raise StateError(f"moments need a normalized state, norm^2 = {state.norm2()!r}")

    lowered_a = apply_ladder(state, Mode.A, Ladder.ANNIHILATE)
    lowered_b = apply_ladder(state, Mode.B, Ladder.ANNIHILATE)

    return QuadratureMoments(
        mean_a=inner_product(state, lowered_a),
        mean_b=inner_product(state, lowered_b),
        n_a=lowered_a.norm2(),
        n_b=lowered_b.norm2(),
        aa=inner_product(state, apply_ladder(lowered_a, Mode.A, Ladder.ANNIHILATE)),
        bb=inner_product(state, apply_ladder(lowered_b, Mode.B, Ladder.ANNIHILATE)),
        ab=inner_product(state, apply_ladder(lowered_a, Mode.B, Ladder.ANNIHILATE)),
        ab_dag=inner_product(lowered_b, lowered_a),
    )


def epr_total_variance(m: QuadratureMoments) -> float:
    """2 + 2n_a + 2n_b - 4 Re<ab> minus the squared means of x_A - x_B and p_A + p_B."""
    second = 2.0 + 2.0 * m.n_a + 2.0 * m.n_b - 4.0 * m.ab.real
    mean_x = 2.0 * (m.mean_a.real - m.mean_b.real) ** 2
    mean_p = 2.0 * (m.mean_a.imag + m.mean_b.imag) ** 2
    return float(second - mean_x - mean_p)


def epr_value(state: TwoModeState) -> float:
    return epr_total_variance(quadrature_moments(state))


def epr_frame_value(phi: TwoModeState, s: float) -> float:
    """EPR correlation of S(s) phi; x_A - x_B and p_A + p_B are scaled by e^{-s}."""
    return math.exp(-2.0 * s) * epr_value(phi)


# ---------------------------------------------------------------------------
# Closed form
# ---------------------------------------------------------------------------

def closed_form_terms(s: float, op_a: SuperpositionOp, op_b: SuperpositionOp) -> EprClosedFormTerms:
    ch, sh = math.cosh(s), math.sinh(s)
    return EprClosedFormTerms(
        A=op_a.t * op_b.t * sh ** 2 + op_a.r * op_b.r * ch ** 2,
        B=(op_a.t * op_b.t + op_a.r * op_b.r) * ch * sh,
        C=math.sqrt(2.0) * op_a.t * op_b.r * ch * sh,
        D=math.sqrt(2.0) * op_a.r * op_b.t * ch * sh,
    )


def _checked_terms(s: float, op_a: SuperpositionOp, op_b: SuperpositionOp,
                   zero_tol: float) -> EprClosedFormTerms:
    terms = closed_form_terms(s, op_a, op_b)
    if terms.M < zero_tol:
        raise ZeroStateError(terms.M, zero_tol)
    return terms


def epr_closed_form(s: float, op_a: SuperpositionOp, op_b: SuperpositionOp,
                    zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """
    EPR correlation of (t_A a + r_A a^dag)(t_B b + r_B b^dag)|TMSS>.

    2 + (4/M)[M (cosh s - sinh s)(cosh s - 2 sinh s) - (AB + B^2)(cosh s - sinh s)^2]

    Raises:
        ZeroStateError: the operated state vanishes (s = 0 with a subtraction)
    """
    terms = _checked_terms(s, op_a, op_b, zero_tol)
    ch, sh = math.cosh(s), math.sinh(s)
    A, B, M = terms.A, terms.B, terms.M
    return 2.0 + (4.0 / M) * (M * (ch - sh) * (ch - 2.0 * sh) - (A * B + B * B) * (ch - sh) ** 2)


def epr_pure_form(s: float, op_a: SuperpositionOp, op_b: SuperpositionOp,
                  zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """Same quantity as epr_closed_form, written as e^{-2s} [6 - 4(AB + B^2)/M]."""
    terms = _checked_terms(s, op_a, op_b, zero_tol)
    return math.exp(-2.0 * s) * (6.0 - 4.0 * (terms.A * terms.B + terms.B ** 2) / terms.M)


# ---------------------------------------------------------------------------
# Photon-number entangled states
# ---------------------------------------------------------------------------

def pnes_support(kind: str, N: int) -> List[Tuple[int, int]]:
    if kind not in PNES_KINDS:
        raise ValueError(f"PNES kind must be one of {PNES_KINDS}, got {kind!r}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if kind == "diagonal":
        return [(n, n) for n in range(N + 1)]
    return [(n, n + 1) for n in range(N + 1)]


def pnes_state(spec: PnesSpec) -> TwoModeState:
    """Normalized state assembled from a PNES spec."""
    support = spec.support()
    coeffs = np.zeros((max(a for a, _ in support) + 1, max(b for _, b in support) + 1), dtype=np.complex128)
    for (n_a, n_b), value in zip(support, spec.coeffs):
        coeffs[n_a, n_b] = value
    coeffs /= np.sqrt(np.sum(np.abs(coeffs) ** 2))
    return TwoModeState(coeffs, normalized=True)


def pnes_epr_value(spec: PnesSpec) -> float:
    """
    EPR correlation of a PNES.

    Diagonal: 2 - 4 sum_{n>=1} n (d_{n-1} - d_n) d_n / sum d_n^2.
    Ladder: 2 + [2 sum (2n+1) e_n^2 - 4 sum_{n>=1} sqrt(n(n+1)) e_{n-1} e_n] / sum e_n^2.
    """
    c = np.asarray(spec.coeffs)
    n = np.arange(c.size)
    norm = float(np.sum(c ** 2))
    if spec.kind == "diagonal":
        coupling = float(np.sum(n[1:] * (c[:-1] - c[1:]) * c[1:]))
        return 2.0 - 4.0 * coupling / norm
    diagonal = float(np.sum((2 * n + 1) * c ** 2))
    coupling = float(np.sum(np.sqrt(n[1:] * (n[1:] + 1)) * c[:-1] * c[1:]))
    return 2.0 + (2.0 * diagonal - 4.0 * coupling) / norm


def epr_operator_matrix(support: Sequence[Tuple[int, int]]) -> np.ndarray:
    """
    Matrix of K = 2 + 2a^dag a + 2b^dag b - 2ab - 2a^dag b^dag on the given basis states.

    <K> is the EPR correlation of any state with vanishing quadrature means.
    """
    index = {state: i for i, state in enumerate(support)}
    if len(index) != len(support):
        raise ValueError("support contains duplicate basis states")
    K = np.zeros((len(support), len(support)))
    for i, (n_a, n_b) in enumerate(support):
        K[i, i] = 2.0 + 2.0 * n_a + 2.0 * n_b
        j = index.get((n_a - 1, n_b - 1))
        if j is not None:
            K[j, i] -= 2.0 * math.sqrt(n_a * n_b)
            K[i, j] -= 2.0 * math.sqrt(n_a * n_b)
    return K


def _check_zero_means(support: Sequence[Tuple[int, int]]) -> None:
    states = set(support)
    for (n_a, n_b) in states:
        if (n_a + 1, n_b) in states or (n_a, n_b + 1) in states:
            raise ValueError(
                f"support admits nonzero quadrature means ({n_a},{n_b}) has a single-photon neighbour"
            )


def subspace_epr_optimum(support: Sequence[Tuple[int, int]]) -> Tuple[float, TwoModeState]:
    """
    Minimum EPR correlation over all states spanned by Fock basis states.

    Args:
        support: (n_A, n_B) basis states; no two may differ by one photon in a
            single mode, so that every state in the span has zero means

    Returns:
        (minimum value, normalized minimizing state)
    """
    support = list(support)
    if not support:
        raise ValueError("support must not be empty")
    _check_zero_means(support)

    try:
        values, vectors = eigh(epr_operator_matrix(support))
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"eigen-solver failed: {e}") from e

    vector = vectors[:, 0]
    coeffs = np.zeros((max(a for a, _ in support) + 1, max(b for _, b in support) + 1), dtype=np.complex128)
    for (n_a, n_b), value in zip(support, vector):
        coeffs[n_a, n_b] = value
    coeffs /= np.sqrt(np.sum(np.abs(coeffs) ** 2))
    return float(values[0]), TwoModeState(coeffs, normalized=True)


def _positive_first(vector: np.ndarray) -> np.ndarray:
    pivot = vector[np.flatnonzero(np.abs(vector) > 1e-14)[0]]
    vector = vector / np.linalg.norm(vector)
    return -vector if pivot < 0 else vector


def _diagonal_optimum(N: int) -> Tuple[PnesSpec, float]:
    if N == 0:
        return PnesSpec("diagonal", (1.0,)), SEPARABLE_BOUND
    n = np.arange(N + 1, dtype=float)
    try:
        top, vector = eigh_tridiagonal(-n, n[1:] / 2.0, select="i", select_range=(N, N))
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"tridiagonal eigen-solver failed: {e}") from e
    spec = PnesSpec("diagonal", tuple(_positive_first(vector[:, 0])))
    return spec, 2.0 - 4.0 * float(top[0])


def _ladder_optimum(N: int, seed: int, restarts: int) -> Tuple[PnesSpec, float]:
    """Nelder-Mead on the moment route, scale fixed by e_0 = 1."""
    if N == 0:
        spec = PnesSpec("ladder", (1.0,))
        return spec, epr_value(pnes_state(spec))

    def objective(x: np.ndarray) -> float:
        return epr_value(pnes_state(PnesSpec("ladder", (1.0, *x))))

    rng = np.random.default_rng(seed)
    best_x = np.full(N, 0.5)
    best_value = objective(best_x)
    for _ in range(restarts):
        start = best_x + rng.normal(scale=0.1, size=N)
        result = minimize(objective, start, method="Nelder-Mead",
                          options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 40000, "adaptive": True})
        if result.fun < best_value - 1e-15:
            best_x, best_value = result.x, float(result.fun)
        elif result.fun >= best_value:
            break

    spec = PnesSpec("ladder", tuple(_positive_first(np.concatenate(([1.0], best_x)))))
    return spec, float(best_value)


def pnes_optimize(kind: str, N: int, seed: int = 12345, restarts: int = 6,
                  check_tol: float = 1e-6) -> Tuple[PnesSpec, float]:
    """
    Minimize the EPR correlation over PNES of truncation N.

    The diagonal class is the top eigenvector of the tridiagonal matrix with
    diagonal -n and off-diagonal n/2. The ladder class is searched with
    Nelder-Mead on the moment route and then checked against the eigenvalue
    of the EPR operator restricted to the ladder span.

    Args:
        kind: "diagonal" or "ladder"
        N: Truncation number (>= 0)
        seed: Seed for ladder restarts
        restarts: Maximum Nelder-Mead restarts
        check_tol: Allowed gap between optimizer and eigenvalue bound

    Returns:
        (normalized PnesSpec with first coefficient positive, minimal value)
    """
    pnes_support(kind, N)
    if kind == "diagonal":
        return _diagonal_optimum(N)

    spec, value = _ladder_optimum(N, seed, restarts)
    bound, _ = subspace_epr_optimum(pnes_support(kind, N))
    if value - bound > check_tol:
        raise NumericalFailureError(
            f"ladder optimizer stalled at {value:.12g}, eigenvalue bound {bound:.12g} (N={N})"
        )
    return spec, value


def pnes_brute_force(kind: str, N: int, points: int = 1_000_000, span: float = 1.5,
                     chunk: int = 200_000) -> Tuple[Tuple[float, ...], float]:
    """
    Two-stage dense grid search over (1, x_1, ..., x_N).

    Half of the points go to a coarse grid on [-span, span]^N and half to a
    refinement grid two coarse cells wide around the coarse winner.

    Returns:
        (best coefficient tuple, best value)
    """
    if N < 1:
        raise ValueError("brute force needs N >= 1")
    Q = epr_operator_matrix(pnes_support(kind, N))
    per_axis = max(3, int(round((points / 2) ** (1.0 / N))))

    def search(axes: List[np.ndarray]) -> Tuple[np.ndarray, float]:
        best_value, best_x = math.inf, None
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, N)
        for start in range(0, len(mesh), chunk):
            batch = mesh[start:start + chunk]
            d = np.hstack([np.ones((len(batch), 1)), batch])
            values = np.einsum("ki,ij,kj->k", d, Q, d) / np.einsum("ki,ki->k", d, d)
            i = int(np.argmin(values))
            if values[i] < best_value:
                best_value, best_x = float(values[i]), batch[i]
        return best_x, best_value

    coarse = np.linspace(-span, span, per_axis)
    step = coarse[1] - coarse[0]
    x0, _ = search([coarse] * N)
    fine = [np.linspace(x - 2 * step, x + 2 * step, per_axis) for x in x0]
    x1, value = search(fine)
    return (1.0, *map(float, x1)), value
