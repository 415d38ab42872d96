"""
Truncated two-mode Fock space states and ladder-operator constructions.

A state is a dense coefficient matrix c[n_A, n_B]. Operations return new
(immutable) states; intermediate results stay unnormalized so that the
normalization constants of the operated squeezed states remain observable.

Besides the Fock-space pipeline this module builds the same states in the
squeezed frame: every operated two-mode squeezed state equals S(s)|phi>,
where S is the two-mode squeezing unitary and phi is a state with at most a
handful of photons, obtained by applying the transformed operators
a -> cosh(s) a + sinh(s) b^dag and b -> cosh(s) b + sinh(s) a^dag to vacuum.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from cvsuperpose.config import DEFAULT_AUTO_GROW, DEFAULT_N_MAX, DEFAULT_TAIL_TOL, DEFAULT_ZERO_TOL
from cvsuperpose.errors import StateError, TruncationOverflowError, ZeroStateError

# Hard ceiling on auto-grown cutoffs (s ~ 2.4 at the default tolerance)
MAX_CUTOFF = 2000
NORMALIZED_TOL = 1e-10
OP_UNIT_TOL = 1e-12


class Mode(str, Enum):
    A = "A"
    B = "B"

    @property
    def axis(self) -> int:
        return 0 if self is Mode.A else 1


class Ladder(str, Enum):
    ANNIHILATE = "annihilate"
    CREATE = "create"


@dataclass(frozen=True)
class SqueezeParam:
    """Squeezing parameter s >= 0 with lambda = tanh(s)."""

    s: float

    def __post_init__(self):
        if not math.isfinite(self.s) or self.s < 0:
            raise ValueError(f"squeezing parameter must be finite and >= 0, got {self.s}")

    @property
    def lam(self) -> float:
        return math.tanh(self.s)

    @property
    def cosh(self) -> float:
        return math.cosh(self.s)

    @property
    def sinh(self) -> float:
        return math.sinh(self.s)


@dataclass(frozen=True)
class SuperpositionOp:
    """The local operation t*a + r*a^dag with real t, r >= 0 and t^2 + r^2 = 1."""

    t: float
    r: float

    def __post_init__(self):
        if not (0.0 <= self.t <= 1.0 and 0.0 <= self.r <= 1.0):
            raise ValueError(f"t and r must lie in [0, 1], got t={self.t}, r={self.r}")
        if abs(self.t * self.t + self.r * self.r - 1.0) > OP_UNIT_TOL:
            raise ValueError(f"t^2 + r^2 must equal 1, got {self.t * self.t + self.r * self.r!r}")

    @classmethod
    def from_r(cls, r: float) -> "SuperpositionOp":
        """Operation with addition amplitude r and t = sqrt(1 - r^2)."""
        r = float(r)
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {r}")
        return cls(t=math.sqrt(max(0.0, 1.0 - r * r)), r=r)


SUBTRACTION = SuperpositionOp(t=1.0, r=0.0)
ADDITION = SuperpositionOp(t=0.0, r=1.0)


@dataclass(frozen=True)
class TruncationPolicy:
    """How far the Fock space is kept and how much tail may be dropped."""

    n_max: int = DEFAULT_N_MAX
    tail_tol: float = DEFAULT_TAIL_TOL
    auto_grow: bool = DEFAULT_AUTO_GROW
    zero_tol: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be positive, got {self.tail_tol}")
        if not self.zero_tol > 0:
            raise ValueError(f"zero_tol must be positive, got {self.zero_tol}")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """
    Two-mode pure state in a truncated Fock basis.

    coeffs[n_A, n_B] is the amplitude of |n_A>|n_B>. The array is copied and
    made read-only on construction.
    """

    coeffs: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        array = np.array(self.coeffs, dtype=np.complex128)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise StateError(f"coefficient matrix must be 2-D and non-empty, got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            raise StateError("coefficient matrix contains non-finite values")
        array.setflags(write=False)
        object.__setattr__(self, "coeffs", array)
        if self.normalized and abs(self.norm2() - 1.0) > NORMALIZED_TOL:
            raise StateError(f"state flagged normalized but norm^2 = {self.norm2()!r}")

    @property
    def trunc_a(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def trunc_b(self) -> int:
        return self.coeffs.shape[1] - 1

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def tail_mass(self) -> float:
        """Probability in the last two rows and columns, relative to the total."""
        total = self.norm2()
        if total == 0.0:
            return 0.0
        weights = np.abs(self.coeffs) ** 2
        inner = weights[:-2, :-2].sum() if min(weights.shape) > 2 else 0.0
        return float((total - inner) / total)

    def padded(self, trunc_a: int, trunc_b: int) -> "TwoModeState":
        """Same state embedded in a larger truncation."""
        return TwoModeState(_pad_to(self.coeffs, (trunc_a + 1, trunc_b + 1)), normalized=self.normalized)


# ---------------------------------------------------------------------------
# Array-level ladder actions
# ---------------------------------------------------------------------------

def _pad_to(coeffs: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    """Zero-pad a coefficient matrix up to shape (never shrinks)."""
    pad_a = shape[0] - coeffs.shape[0]
    pad_b = shape[1] - coeffs.shape[1]
    if pad_a < 0 or pad_b < 0:
        raise StateError(f"cannot pad shape {coeffs.shape} down to {shape}")
    if pad_a == 0 and pad_b == 0:
        return coeffs
    return np.pad(coeffs, ((0, pad_a), (0, pad_b)))


def _common_shape(*arrays: np.ndarray) -> Tuple[int, int]:
    return max(a.shape[0] for a in arrays), max(a.shape[1] for a in arrays)


def _add(*terms: Tuple[complex, np.ndarray]) -> np.ndarray:
    """Linear combination of coefficient matrices of possibly different shapes."""
    shape = _common_shape(*(array for _, array in terms))
    out = np.zeros(shape, dtype=np.complex128)
    for weight, array in terms:
        if weight != 0:
            out[: array.shape[0], : array.shape[1]] += weight * array
    return out


def _annihilate(coeffs: np.ndarray, axis: int) -> np.ndarray:
    """c[n] -> sqrt(n+1) c[n+1] along axis; shape unchanged."""
    out = np.zeros_like(coeffs)
    size = coeffs.shape[axis]
    weights = np.sqrt(np.arange(1, size, dtype=float))
    if axis == 0:
        out[:-1, :] = weights[:, None] * coeffs[1:, :]
    else:
        out[:, :-1] = coeffs[:, 1:] * weights[None, :]
    return out


def _create(coeffs: np.ndarray, axis: int) -> np.ndarray:
    """c[n] -> sqrt(n) c[n-1] along axis; the axis grows by one."""
    size = coeffs.shape[axis]
    weights = np.sqrt(np.arange(1, size + 1, dtype=float))
    if axis == 0:
        out = np.zeros((size + 1, coeffs.shape[1]), dtype=np.complex128)
        out[1:, :] = weights[:, None] * coeffs
    else:
        out = np.zeros((coeffs.shape[0], size + 1), dtype=np.complex128)
        out[:, 1:] = coeffs * weights[None, :]
    return out


def _create_within(coeffs: np.ndarray, axis: int, policy: Optional[TruncationPolicy]) -> np.ndarray:
    """Creation that respects a policy with auto_grow disabled."""
    raised = _create(coeffs, axis)
    if policy is None or policy.auto_grow or coeffs.shape[axis] - 1 < policy.n_max:
        return raised

    total = float(np.sum(np.abs(raised) ** 2))
    dropped = float(np.sum(np.abs(np.take(raised, [-1], axis=axis)) ** 2))
    if total > 0 and dropped / total > policy.tail_tol:
        raise TruncationOverflowError(dropped / total, policy.tail_tol, coeffs.shape[axis] - 1)
    return raised[:-1, :] if axis == 0 else raised[:, :-1]


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def required_cutoff(lam: float, tail_tol: float) -> int:
    """
    Smallest cutoff n with (n+1)^4 lam^(2n) < tail_tol.

    The quartic weight covers up to four ladder operations applied after
    the squeezed state is built.
    """
    if lam == 0.0:
        return 1
    log_lam2 = 2.0 * math.log(lam)
    log_tol = math.log(tail_tol)
    n = 0
    while 4.0 * math.log(n + 1) + n * log_lam2 >= log_tol:
        n += 1
        if n > MAX_CUTOFF:
            raise TruncationOverflowError(lam ** (2 * MAX_CUTOFF), tail_tol, MAX_CUTOFF)
    return n


def make_tmss(s: Union[float, SqueezeParam], policy: Optional[TruncationPolicy] = None) -> TwoModeState:
    """
    Two-mode squeezed vacuum sqrt(1 - lam^2) sum_n lam^n |n, n>.

    Args:
        s: Squeezing parameter (or SqueezeParam)
        policy: Truncation policy; the cutoff is max(n_max, required) with
            auto_grow, exactly n_max without it

    Returns:
        Normalized state; the dropped tail (below tail_tol) is renormalized away
    """
    param = s if isinstance(s, SqueezeParam) else SqueezeParam(float(s))
    policy = policy or DEFAULT_POLICY
    lam = param.lam

    if policy.auto_grow:
        cutoff = max(policy.n_max, required_cutoff(lam, policy.tail_tol))
    else:
        cutoff = policy.n_max
        tail = lam ** (2 * (cutoff + 1))
        if tail > policy.tail_tol:
            raise TruncationOverflowError(tail, policy.tail_tol, cutoff)

    amplitudes = math.sqrt(1.0 - lam * lam) * np.power(lam, np.arange(cutoff + 1, dtype=float))
    # renormalize over the kept photon numbers
    amplitudes /= np.linalg.norm(amplitudes)
    return TwoModeState(np.diag(amplitudes).astype(np.complex128), normalized=True)


def vacuum() -> TwoModeState:
    return TwoModeState(np.ones((1, 1)), normalized=True)


def apply_ladder(state: TwoModeState, mode: Union[Mode, str], kind: Union[Ladder, str],
                 policy: Optional[TruncationPolicy] = None) -> TwoModeState:
    """
    Apply a or a^dag to one mode.

    Args:
        state: Input state
        mode: "A" or "B"
        kind: "annihilate" or "create"
        policy: Truncation policy; None lets creation grow the cutoff

    Returns:
        Unnormalized state
    """
    axis = Mode(mode).axis
    if Ladder(kind) is Ladder.ANNIHILATE:
        return TwoModeState(_annihilate(state.coeffs, axis))
    return TwoModeState(_create_within(state.coeffs, axis, policy))


def apply_superposition(state: TwoModeState, mode: Union[Mode, str], op: SuperpositionOp,
                        policy: Optional[TruncationPolicy] = None) -> TwoModeState:
    """
    Apply t*a + r*a^dag to one mode.

    r = 0 reduces to apply_ladder(annihilate) and t = 0 to
    apply_ladder(create), bit for bit.

    Returns:
        Unnormalized state
    """
    axis = Mode(mode).axis
    if op.r == 0.0:
        lowered = _annihilate(state.coeffs, axis)
        return TwoModeState(lowered if op.t == 1.0 else op.t * lowered)
    raised = _create_within(state.coeffs, axis, policy)
    if op.t == 0.0:
        return TwoModeState(raised if op.r == 1.0 else op.r * raised)
    lowered = _annihilate(state.coeffs, axis)
    return TwoModeState(_add((op.t, lowered), (op.r, raised)))


def normalize(state: TwoModeState, policy: Optional[TruncationPolicy] = None) -> Tuple[TwoModeState, float]:
    """
    Rescale to unit norm.

    Returns:
        (normalized state, squared norm of the input)

    Raises:
        ZeroStateError: squared norm below the zero-state threshold
    """
    policy = policy or DEFAULT_POLICY
    norm2 = state.norm2()
    if norm2 < policy.zero_tol:
        raise ZeroStateError(norm2, policy.zero_tol)
    return TwoModeState(state.coeffs / math.sqrt(norm2), normalized=True), norm2


def inner_product(bra: TwoModeState, ket: TwoModeState) -> complex:
    """<bra|ket> for states of possibly different truncations."""
    shape = _common_shape(bra.coeffs, ket.coeffs)
    return complex(np.vdot(_pad_to(bra.coeffs, shape), _pad_to(ket.coeffs, shape)))


def series_norm2(state: TwoModeState) -> float:
    """
    Squared norm relative to the lowest-order nonzero coefficient.

    For the operated squeezed states this is the sum that the constants
    m1, m2, m3 normalize (the bare series with leading coefficient 1).
    """
    rows, cols = np.nonzero(state.coeffs)
    if rows.size == 0:
        raise ZeroStateError(0.0, DEFAULT_POLICY.zero_tol)
    order = np.lexsort((rows, rows + cols))
    lead = state.coeffs[rows[order[0]], cols[order[0]]]
    return state.norm2() / float(abs(lead) ** 2)


# ---------------------------------------------------------------------------
# Reference states
# ---------------------------------------------------------------------------

COHERENT_STATES = ("coherent_A", "coherent_AB")

# Steps are applied first to last; an operator product reads right to left.
_FIXED_RECIPES: Dict[str, List[Tuple[Mode, SuperpositionOp]]] = {
    "sub_A": [(Mode.A, SUBTRACTION)],
    "sub_B": [(Mode.B, SUBTRACTION)],
    "sub_AB": [(Mode.B, SUBTRACTION), (Mode.A, SUBTRACTION)],
    "add_A": [(Mode.A, ADDITION)],
    "add_B": [(Mode.B, ADDITION)],
    "add_AB": [(Mode.B, ADDITION), (Mode.A, ADDITION)],
    "addsub_A": [(Mode.A, ADDITION), (Mode.A, SUBTRACTION)],
    "addsub_addsub_AB": [(Mode.B, ADDITION), (Mode.B, SUBTRACTION), (Mode.A, ADDITION), (Mode.A, SUBTRACTION)],
}

REFERENCE_STATES = tuple(_FIXED_RECIPES) + COHERENT_STATES


def recipe(name: str, op: Optional[SuperpositionOp] = None,
           op_b: Optional[SuperpositionOp] = None) -> List[Tuple[Mode, SuperpositionOp]]:
    """
    Operation steps for a named reference state.

    Args:
        name: One of REFERENCE_STATES ("tmss" gives no steps)
        op: Operation on mode A for the coherent states
        op_b: Operation on mode B for coherent_AB (defaults to op)
    """
    if name == "tmss":
        return []
    if name in _FIXED_RECIPES:
        return list(_FIXED_RECIPES[name])
    if name in COHERENT_STATES:
        if op is None:
            raise ValueError(f"{name} needs a SuperpositionOp")
        if name == "coherent_A":
            return [(Mode.A, op)]
        return [(Mode.B, op_b or op), (Mode.A, op)]
    raise ValueError(f"unknown reference state: {name!r} (expected one of {', '.join(REFERENCE_STATES)})")


def operate(name: str, state: TwoModeState, op: Optional[SuperpositionOp] = None,
            op_b: Optional[SuperpositionOp] = None,
            policy: Optional[TruncationPolicy] = None) -> TwoModeState:
    """Apply a named operation sequence to a state; result unnormalized."""
    for mode, step in recipe(name, op, op_b):
        state = apply_superposition(state, mode, step, policy)
    return state


def build_reference_state(name: str, s: Union[float, SqueezeParam], op: Optional[SuperpositionOp] = None,
                          policy: Optional[TruncationPolicy] = None,
                          op_b: Optional[SuperpositionOp] = None) -> TwoModeState:
    """
    Normalized operated squeezed state, assembled through the operation pipeline.

    Args:
        name: "tmss" or one of REFERENCE_STATES
        s: Squeezing parameter
        op: Coherent operation (coherent_A / coherent_AB only)
        policy: Truncation policy
        op_b: Mode-B operation for coherent_AB if it differs from op

    Returns:
        Normalized TwoModeState

    Raises:
        TruncationOverflowError: the last two rows and columns hold more
            than tail_tol of the probability
    """
    policy = policy or DEFAULT_POLICY
    tmss = make_tmss(s, policy)
    operated = operate(name, tmss, op, op_b, policy)
    tail = operated.tail_mass()
    if tail > policy.tail_tol:
        raise TruncationOverflowError(tail, policy.tail_tol, max(operated.trunc_a, operated.trunc_b))
    return normalize(operated, policy)[0]


def _frame_step(coeffs: np.ndarray, mode: Mode, op: SuperpositionOp, cosh: float, sinh: float) -> np.ndarray:
    """
    t*a~ + r*a~^dag in the squeezed frame.

    a~ = cosh a + sinh b^dag on mode A (and A <-> B for mode B).
    """
    own, other = mode.axis, 1 - mode.axis
    return _add(
        (op.t * cosh, _annihilate(coeffs, own)),
        (op.t * sinh, _create(coeffs, other)),
        (op.r * cosh, _create(coeffs, own)),
        (op.r * sinh, _annihilate(coeffs, other)),
    )


def frame_reference_state(name: str, s: Union[float, SqueezeParam], op: Optional[SuperpositionOp] = None,
                          op_b: Optional[SuperpositionOp] = None,
                          zero_tol: float = DEFAULT_ZERO_TOL) -> TwoModeState:
    """
    Squeezed-frame state phi with build_reference_state(name, s, op) = S(s) phi.

    Exact: no truncation is involved.

    Returns:
        Normalized TwoModeState (a few photons at most)
    """
    param = s if isinstance(s, SqueezeParam) else SqueezeParam(float(s))
    coeffs = vacuum().coeffs
    for mode, step in recipe(name, op, op_b):
        coeffs = _frame_step(coeffs, mode, step, param.cosh, param.sinh)
    return normalize(TwoModeState(coeffs), TruncationPolicy(zero_tol=zero_tol))[0]


# ---------------------------------------------------------------------------
# Closed-form normalization constants
# ---------------------------------------------------------------------------

def normalization_constants(s: float) -> Dict[str, float]:
    """
    m1, m2, m3 for the series a|TMSS>, ab|TMSS>, a a^dag b b^dag|TMSS>.

    Each constant normalizes the bare series with leading coefficient 1.
    """
    x = math.tanh(s) ** 2
    return {
        "m1": (1 - x) ** 2,
        "m2": (1 - x) ** 3 / (1 + x),
        "m3": (1 - x) ** 5 / (1 + 11 * x + 11 * x ** 2 + x ** 3),
    }


def coherent_norm_constant(s: float, op_a: SuperpositionOp, op_b: SuperpositionOp) -> float:
    """N such that N * |(t_A a + r_A a^dag)(t_B b + r_B b^dag) sum_n lam^n |n,n>|^2 = 1."""
    x = math.tanh(s) ** 2
    cross = op_a.t * op_b.r + op_a.r * op_b.t
    direct = op_a.t * op_b.t * x + op_a.r * op_b.r
    return (1 - x) ** 3 / (x * (1 + cross ** 2) + direct ** 2)


def state_table(state: TwoModeState, drop_zeros: bool = True) -> pd.DataFrame:
    """
    Coefficients as rows (n_A, n_B, re, im), ordered by n_A then n_B.

    Args:
        state: State to dump
        drop_zeros: Skip exactly-zero amplitudes
    """
    n_a, n_b = np.indices(state.coeffs.shape)
    table = pd.DataFrame({
        "n_A": n_a.ravel(),
        "n_B": n_b.ravel(),
        "re": state.coeffs.real.ravel(),
        "im": state.coeffs.imag.ravel(),
    })
    if drop_zeros:
        table = table[(table["re"] != 0) | (table["im"] != 0)]
    return table.reset_index(drop=True)
