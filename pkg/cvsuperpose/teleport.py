"""
Coherent-state teleportation with an operated two-mode squeezed resource.

The unity-gain protocol maps input characteristic functions as
C_out(lam) = C_in(lam) C_E(lam*, lam), and the average fidelity over
coherent inputs is

    F = (1/pi) Int d^2 lam  C_in(lam) C_E(lam*, lam) C_in(-lam)

which does not depend on the input amplitude. The integral is done with a
Gauss-Hermite product rule; when the Gaussian envelope of C_E is known the
rule absorbs it and integrates the remaining polynomial exactly.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import eval_genlaguerre, gammaln, roots_laguerre

from cvsuperpose.config import DEFAULT_QUAD_ORDER, DEFAULT_ZERO_TOL
from cvsuperpose.epr import EprClosedFormTerms, closed_form_terms
from cvsuperpose.errors import QuadratureError, StateError, TruncationAccuracyError, ZeroStateError
from cvsuperpose.fock_core import NORMALIZED_TOL, SuperpositionOp, TwoModeState

CLASSICAL_BOUND = 0.5
QUAD_TOL = 1e-9
# Smallest trusted |lambda|^2; e^{-40} is below double precision relative to 1
DISPLACEMENT_FLOOR = 40.0
# Complex entries per displacement batch
BATCH_ENTRIES = 1 << 20


@dataclass(frozen=True)
class CharFnPoint:
    """Characteristic-function arguments and their squeezed-frame images."""

    lambda2: complex
    lambda3: complex
    s: float
    alpha: complex = field(init=False)
    beta: complex = field(init=False)

    def __post_init__(self):
        ch, sh = math.cosh(self.s), math.sinh(self.s)
        lam2, lam3 = complex(self.lambda2), complex(self.lambda3)
        object.__setattr__(self, "lambda2", lam2)
        object.__setattr__(self, "lambda3", lam3)
        object.__setattr__(self, "alpha", lam2 * ch - lam3.conjugate() * sh)
        object.__setattr__(self, "beta", lam3 * ch - lam2.conjugate() * sh)


@dataclass(frozen=True)
class FidelityResult:
    fidelity: float
    s: float
    r: float
    quadrature_order: int
    est_error: float


# ---------------------------------------------------------------------------
# Characteristic functions
# ---------------------------------------------------------------------------

def _char_fn_bracket(terms: EprClosedFormTerms, alpha, beta):
    """Polynomial part of C_E divided by M; works on scalars and arrays."""
    A, B, C, D = terms.A, terms.B, terms.C, terms.D
    a2, b2 = np.abs(alpha) ** 2, np.abs(beta) ** 2
    ac, bc = np.conj(alpha), np.conj(beta)
    root2 = math.sqrt(2.0)
    bracket = (
        A ** 2 * (1 - a2) * (1 - b2)
        + B ** 2
        + C ** 2 * (1 - 2 * b2 + b2 ** 2 / 2)
        + D ** 2 * (1 - 2 * a2 + a2 ** 2 / 2)
        + A * B * (alpha * beta + ac * bc)
        + A / root2 * (alpha * bc + ac * beta) * (C * (b2 - 2) + D * (a2 - 2))
        + B * C / root2 * (beta ** 2 + bc ** 2)
        + B * D / root2 * (alpha ** 2 + ac ** 2)
        + C * D / 2 * (alpha ** 2 * bc ** 2 + ac ** 2 * beta ** 2)
    )
    return bracket / terms.M


def _nonzero_terms(s: float, op_a: SuperpositionOp, op_b: SuperpositionOp, zero_tol: float) -> EprClosedFormTerms:
    terms = closed_form_terms(s, op_a, op_b)
    if terms.M < zero_tol:
        raise ZeroStateError(terms.M, zero_tol)
    return terms


def char_fn_closed(s: float, op_a: SuperpositionOp, op_b: SuperpositionOp, p: CharFnPoint,
                   zero_tol: float = DEFAULT_ZERO_TOL) -> complex:
    """
    Closed-form characteristic function of (t_A a + r_A a^dag)(t_B b + r_B b^dag)|TMSS>.

    Raises:
        ValueError: p was built for a different squeezing
        ZeroStateError: the operated state vanishes
    """
    if p.s != s:
        raise ValueError(f"CharFnPoint built for s={p.s}, evaluated at s={s}")
    terms = _nonzero_terms(s, op_a, op_b, zero_tol)
    envelope = math.exp(-(abs(p.alpha) ** 2 + abs(p.beta) ** 2) / 2)
    return complex(envelope * _char_fn_bracket(terms, p.alpha, p.beta))


def tmss_char_fn(p: CharFnPoint) -> complex:
    """Gaussian characteristic function of the unoperated squeezed state."""
    return complex(math.exp(-(abs(p.alpha) ** 2 + abs(p.beta) ** 2) / 2))


def displacement_bound(dim: int) -> float:
    """
    Largest |lambda|^2 at which displacement elements of a dim-level state are trusted.

    Elements <m|D(lambda)|n> with m, n < dim peak near |lambda| = sqrt(m) + sqrt(n);
    past (2 sqrt(dim))^2 they are all in their exponential tail.
    """
    return max(DISPLACEMENT_FLOOR, 4.0 * dim)


def _displacement_stack(alphas: np.ndarray, dim: int, envelope: bool) -> np.ndarray:
    """<m|D(alpha)|n> for a batch of displacements, shape (batch, dim, dim)."""
    a = np.asarray(alphas, dtype=np.complex128).reshape(-1)[:, None, None]
    x = np.abs(a) ** 2
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    low = np.minimum(m, n)
    high = np.maximum(m, n)
    k = high - low

    log_magnitude = 0.5 * (gammaln(low + 1) - gammaln(high + 1))
    magnitude = np.exp(log_magnitude - x / 2) if envelope else np.exp(log_magnitude)[None, :, :]
    phase = np.where(m >= n, np.power(a, k), np.power(-np.conj(a), k))
    phase = np.where(k == 0, 1.0 + 0j, phase)
    return magnitude * phase * eval_genlaguerre(low, k, x)


def displacement_matrix(alpha: complex, dim: int, envelope: bool = True) -> np.ndarray:
    """
    Number-basis matrix <m|D(alpha)|n> for m, n < dim.

    For m >= n: sqrt(n!/m!) alpha^(m-n) L_n^(m-n)(|alpha|^2) e^{-|alpha|^2/2}
    For m < n:  sqrt(m!/n!) (-alpha*)^(n-m) L_m^(n-m)(|alpha|^2) e^{-|alpha|^2/2}

    Args:
        alpha: Displacement
        dim: Matrix dimension
        envelope: Include the e^{-|alpha|^2/2} factor
    """
    return _displacement_stack(np.array([alpha]), dim, envelope)[0]


def _displaced_overlaps(coeffs: np.ndarray, alphas: np.ndarray, betas: np.ndarray, envelope: bool) -> np.ndarray:
    """<psi| D(alpha_p) (x) D(beta_p) |psi> for every p."""
    d_a = _displacement_stack(alphas, coeffs.shape[0], envelope)
    d_b = _displacement_stack(betas, coeffs.shape[1], envelope)
    moved = d_a @ coeffs @ np.transpose(d_b, (0, 2, 1))
    return np.sum(np.conj(coeffs)[None, :, :] * moved, axis=(1, 2))


def char_fn_numeric(state: TwoModeState, p: CharFnPoint, bound: Optional[float] = None) -> complex:
    """
    <D(lambda2) (x) D(lambda3)> in a truncated Fock state.

    bound defaults to displacement_bound of the larger mode cutoff.

    Raises:
        StateError: state is not normalized
        TruncationAccuracyError: |lambda2|^2 or |lambda3|^2 above bound
    """
    if abs(state.norm2() - 1.0) > NORMALIZED_TOL:
        raise StateError(f"characteristic function needs a normalized state, norm^2 = {state.norm2()!r}")
    if bound is None:
        bound = displacement_bound(max(state.coeffs.shape))
    largest = max(abs(p.lambda2) ** 2, abs(p.lambda3) ** 2)
    if largest > bound:
        raise TruncationAccuracyError(
            f"displacement |lambda|^2 = {largest:.3g} exceeds the trusted range {bound:g}"
        )
    return complex(_displaced_overlaps(state.coeffs, np.array([p.lambda2]), np.array([p.lambda3]), True)[0])


def char_fn_frame(phi: TwoModeState, p: CharFnPoint) -> complex:
    """Characteristic function of S(s) phi, evaluated as <phi|D(alpha) (x) D(beta)|phi>."""
    return complex(_displaced_overlaps(phi.coeffs, np.array([p.alpha]), np.array([p.beta]), True)[0])


# ---------------------------------------------------------------------------
# Fidelity
# ---------------------------------------------------------------------------

def coherent_char_fn(lam, amplitude: complex):
    """C_in(lam) = <gamma|D(lam)|gamma> = exp(-|lam|^2/2 + lam gamma* - lam* gamma)."""
    gamma = complex(amplitude)
    lam = np.asarray(lam, dtype=np.complex128)
    return np.exp(-np.abs(lam) ** 2 / 2 + lam * gamma.conjugate() - np.conj(lam) * gamma)


def _input_factor(lam: np.ndarray, amplitude: complex):
    """C_in(lam) C_in(-lam) with the vacuum factor e^{-|lam|^2} taken out; the rule absorbs it."""
    if amplitude == 0:
        return 1.0
    return coherent_char_fn(lam, amplitude) * coherent_char_fn(-lam, amplitude) * np.exp(np.abs(lam) ** 2)


def _gauss_hermite(integrand: Callable[[np.ndarray], np.ndarray], order: int, width: float,
                   skip_beyond: Optional[float] = None, batch: int = 8192) -> float:
    """
    (1/pi) Int d^2 lam e^{-width |lam|^2} integrand(lam) by a product Gauss-Hermite rule.

    Nodes with |lam|^2 > skip_beyond are dropped; the integrand must be
    bounded by 1 there so the dropped mass stays below the weight tail.
    """
    nodes, weights = hermgauss(order)
    scale = 1.0 / math.sqrt(width)
    x, y = np.meshgrid(nodes * scale, nodes * scale, indexing="ij")
    lam = (x + 1j * y).ravel()
    w = np.outer(weights, weights).ravel()
    if skip_beyond is not None:
        keep = np.abs(lam) ** 2 <= skip_beyond
        lam, w = lam[keep], w[keep]

    total = 0.0
    for start in range(0, lam.size, batch):
        values = integrand(lam[start:start + batch])
        total += float(np.sum(w[start:start + batch] * np.real(values)))
    return total / (math.pi * width)


def _refined(integral: Callable[[int], float], order: int, tol: float) -> Tuple[float, float]:
    coarse = integral(order)
    fine = integral(2 * order)
    if abs(fine - coarse) > tol:
        raise QuadratureError(coarse, fine, tol)
    return fine, abs(fine - coarse)


def average_fidelity(s: float, op_a: SuperpositionOp, op_b: SuperpositionOp,
                     order: int = DEFAULT_QUAD_ORDER, tol: float = QUAD_TOL,
                     amplitude: complex = 0.0) -> FidelityResult:
    """
    Average fidelity with the both-mode operated squeezed state as resource.

    Args:
        s: Squeezing parameter
        op_a, op_b: Local operations
        order: Gauss-Hermite order per axis (the error estimate doubles it)
        tol: Allowed difference between the two orders
        amplitude: Coherent input amplitude; the result does not depend on it

    Returns:
        FidelityResult

    Raises:
        ZeroStateError: operated state vanishes
        QuadratureError: orders disagree beyond tol
    """
    terms = _nonzero_terms(s, op_a, op_b, DEFAULT_ZERO_TOL)
    kappa = math.exp(-s)

    def integrand(lam: np.ndarray) -> np.ndarray:
        return _char_fn_bracket(terms, kappa * np.conj(lam), kappa * lam) * _input_factor(lam, amplitude)

    fidelity, error = _refined(lambda n: _gauss_hermite(integrand, n, 1.0 + kappa ** 2), order, tol)
    return FidelityResult(fidelity=fidelity, s=s, r=op_a.r, quadrature_order=order, est_error=error)


def average_fidelity_frame(phi: TwoModeState, s: float, order: int = DEFAULT_QUAD_ORDER,
                           tol: float = QUAD_TOL, amplitude: complex = 0.0,
                           r: float = float("nan")) -> FidelityResult:
    """
    Average fidelity with resource S(s) phi.

    phi is the squeezed-frame state from fock_core.frame_reference_state.
    """
    if abs(phi.norm2() - 1.0) > NORMALIZED_TOL:
        raise StateError(f"frame state must be normalized, norm^2 = {phi.norm2()!r}")
    kappa = math.exp(-s)

    def integrand(lam: np.ndarray) -> np.ndarray:
        overlaps = _displaced_overlaps(phi.coeffs, kappa * np.conj(lam), kappa * lam, envelope=False)
        return overlaps * _input_factor(lam, amplitude)

    fidelity, error = _refined(lambda n: _gauss_hermite(integrand, n, 1.0 + kappa ** 2), order, tol)
    return FidelityResult(fidelity=fidelity, s=s, r=r, quadrature_order=order, est_error=error)


def average_fidelity_state(state: TwoModeState, order: int = DEFAULT_QUAD_ORDER, tol: float = QUAD_TOL,
                           amplitude: complex = 0.0, bound: Optional[float] = None) -> FidelityResult:
    """
    Average fidelity for an arbitrary truncated resource.

    Uses the numeric characteristic function; nodes beyond the trusted
    displacement range carry weight below e^{-bound} and are skipped.
    """
    if abs(state.norm2() - 1.0) > NORMALIZED_TOL:
        raise StateError(f"resource must be normalized, norm^2 = {state.norm2()!r}")
    if bound is None:
        bound = displacement_bound(max(state.coeffs.shape))
    batch = max(1, BATCH_ENTRIES // (state.coeffs.shape[0] * state.coeffs.shape[1]))

    def integrand(lam: np.ndarray) -> np.ndarray:
        return _displaced_overlaps(state.coeffs, np.conj(lam), lam, envelope=True) * _input_factor(lam, amplitude)

    fidelity, error = _refined(
        lambda n: _gauss_hermite(integrand, n, 1.0, skip_beyond=bound, batch=batch), order, tol
    )
    return FidelityResult(fidelity=fidelity, s=float("nan"), r=float("nan"), quadrature_order=order, est_error=error)


def fidelity_closed_form(s: float, op_a: SuperpositionOp, op_b: SuperpositionOp,
                         zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """
    The fidelity integral done analytically.

    With kappa = e^{-s} and a = 1 + kappa^2 only the rotation-invariant
    terms of C_E survive, and (1/pi) Int e^{-a|lam|^2} |lam|^{2k} = k!/a^{k+1}.
    """
    terms = _nonzero_terms(s, op_a, op_b, zero_tol)
    k2 = math.exp(-2.0 * s)
    a = 1.0 + k2
    A, B, C, D = terms.A, terms.B, terms.C, terms.D
    value = (
        A ** 2 * (1 / a - 2 * k2 / a ** 2 + 2 * k2 ** 2 / a ** 3)
        + B ** 2 / a
        + (C ** 2 + D ** 2) * (1 / a - 2 * k2 / a ** 2 + k2 ** 2 / a ** 3)
        + 2 * A * B * k2 / a ** 2
    )
    return value / terms.M


def tmss_fidelity(s: float) -> float:
    return 1.0 / (1.0 + math.exp(-2.0 * s))


def pnes_fidelity(coeffs: Sequence[float]) -> float:
    """
    Average fidelity with a photon-number entangled resource sum_n d_n |n, n>.

    For such resources F = sum_{m,n} d_m d_n G_mn / sum_n d_n^2 with

        G_mn = Int_0^inf dx e^{-2x} (low!/high!) x^k [L_low^(k)(x)]^2,   k = |m - n|

    the radial part of (1/pi) Int d^2 lam e^{-|lam|^2} |<m|D(lam)|n>|^2. After
    y = 2x the integrand is e^{-y} times a polynomial of degree m + n, so
    Gauss-Laguerre with N + 2 nodes is exact for coefficients d_0..d_N.

    Args:
        coeffs: Real Schmidt coefficients d_0..d_N, any normalization

    Returns:
        Fidelity in [0, 1]

    Raises:
        ValueError: coeffs empty, not one-dimensional or all zero
    """
    d = np.asarray(coeffs, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError(f"expected a non-empty 1-D coefficient list, got shape {d.shape}")
    norm2 = float(d @ d)
    if norm2 == 0.0:
        raise ValueError("coefficients are all zero")

    y, w = roots_laguerre(d.size + 1)
    x = (y / 2.0)[:, None, None]
    m = np.arange(d.size)[:, None]
    n = np.arange(d.size)[None, :]
    low = np.minimum(m, n)
    high = np.maximum(m, n)
    k = high - low
    log_front = gammaln(low + 1) - gammaln(high + 1) + k * np.log(x)
    values = np.exp(log_front) * eval_genlaguerre(low, k, x) ** 2
    gram = 0.5 * np.tensordot(w, values, axes=1)
    return float(d @ gram @ d / norm2)
