"""
Entropy of entanglement for pure two-mode states.

The Schmidt coefficients are the singular values of the coefficient matrix;
the entropy is E = -sum c_i^2 log2 c_i^2.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import xlogy

from cvsuperpose.errors import NumericalFailureError, StateError
from cvsuperpose.fock_core import NORMALIZED_TOL, TwoModeState

RESIDUAL_TOL = 1e-10
# Coefficients below this are under the truncation error floor
SCHMIDT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Descending non-negative Schmidt coefficients."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("Schmidt spectrum must be a non-empty 1-D sequence")
        if np.any(values < 0):
            raise ValueError("Schmidt coefficients must be non-negative")
        if np.any(np.diff(values) > 0):
            raise ValueError("Schmidt coefficients must be sorted descending")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.values > SCHMIDT_FLOOR))

    def weights(self) -> np.ndarray:
        return self.values ** 2


def schmidt_decompose(state: TwoModeState, residual_tol: float = RESIDUAL_TOL) -> SchmidtSpectrum:
    """
    Schmidt coefficients of a normalized pure state.

    Args:
        state: Normalized two-mode state
        residual_tol: Bound on the reconstruction residual of the SVD

    Returns:
        SchmidtSpectrum

    Raises:
        StateError: state is not normalized
        NumericalFailureError: SVD failed or does not reconstruct the matrix
    """
    if abs(state.norm2() - 1.0) > NORMALIZED_TOL:
        raise StateError(f"Schmidt decomposition needs a normalized state, norm^2 = {state.norm2()!r}")

    coeffs = state.coeffs
    try:
        u, singular, vh = np.linalg.svd(coeffs, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"SVD failed: {e}") from e

    residual = float(np.linalg.norm(coeffs - (u * singular) @ vh))
    if residual > residual_tol:
        raise NumericalFailureError(f"SVD reconstruction residual {residual:.3e} exceeds {residual_tol:.1e}")

    return SchmidtSpectrum(singular)


def entropy_of_entanglement(spectrum: SchmidtSpectrum) -> float:
    """Entropy in bits, with 0 log 0 = 0."""
    weights = spectrum.weights()[spectrum.values > SCHMIDT_FLOOR]
    entropy = -float(np.sum(xlogy(weights, weights))) / math.log(2.0)
    return max(0.0, entropy)


def entanglement_entropy(state: TwoModeState) -> float:
    """Shortcut: entropy of a normalized state."""
    return entropy_of_entanglement(schmidt_decompose(state))


def tmss_entropy_closed_form(s: float) -> float:
    """E = cosh^2 s log2 cosh^2 s - sinh^2 s log2 sinh^2 s."""
    if not math.isfinite(s) or s < 0:
        raise ValueError(f"squeezing parameter must be finite and >= 0, got {s}")
    c2 = math.cosh(s) ** 2
    s2 = math.sinh(s) ** 2
    return float(xlogy(c2, c2) - xlogy(s2, s2)) / math.log(2.0)


def schmidt_table(name: str, s: float, r: Optional[float] = None) -> Tuple[float, float]:
    """
    Leading two Schmidt coefficients in the weak-squeezing limit.

    Valid to relative order lambda^2 for lambda = tanh(s) << 1.

    Args:
        name: addsub_addsub_AB, coherent_A or coherent_AB
        s: Squeezing parameter
        r: Addition amplitude of the coherent operation

    Returns:
        (larger-or-first coefficient, second coefficient) as tabulated
    """
    lam = math.tanh(s)
    if name == "addsub_addsub_AB":
        denom = math.sqrt(1 + 16 * lam ** 2)
        return 1 / denom, 4 * lam / denom

    if r is None:
        raise ValueError(f"{name} needs r")
    if name == "coherent_A":
        denom = math.sqrt(r ** 2 + lam ** 2 * (1 + r ** 2))
        return r / denom, lam * math.sqrt(1 + r ** 2) / denom
    if name == "coherent_AB":
        denom = math.sqrt(r ** 4 + lam ** 2 * (1 + r ** 2) ** 2)
        return r ** 2 / denom, lam * (1 + r ** 2) / denom
    raise ValueError(f"no weak-squeezing Schmidt formula for {name!r}")
