"""
Exception hierarchy for cvsuperpose.

Library code raises these; only the command line turns them into
messages and exit codes.
"""

from typing import Optional


class CvSimError(RuntimeError):
    """Base class for numerical failures (CLI exit code 3)."""


class TruncationOverflowError(CvSimError):
    """Probability mass beyond the Fock cutoff exceeds the tail tolerance."""

    def __init__(self, tail_mass: float, tail_tol: float, cutoff: int):
        self.tail_mass = tail_mass
        self.tail_tol = tail_tol
        self.cutoff = cutoff
        super().__init__(
            f"truncation overflow at cutoff {cutoff}: tail mass {tail_mass:.3e} > {tail_tol:.3e}"
        )


class ZeroStateError(CvSimError):
    """Squared norm below the zero-state threshold (annihilated vacuum)."""

    def __init__(self, norm2: float, threshold: float):
        self.norm2 = norm2
        self.threshold = threshold
        super().__init__(f"zero state: norm^2 {norm2:.3e} below {threshold:.1e}")


class StateError(CvSimError):
    """A state does not satisfy an operation's precondition."""


class NumericalFailureError(CvSimError):
    """Decomposition, eigen-solver or optimizer did not produce a trustworthy result."""


class TruncationAccuracyError(CvSimError):
    """Displacement arguments too large for accurate matrix elements."""


class QuadratureError(CvSimError):
    """Successive quadrature orders disagree beyond tolerance."""

    def __init__(self, coarse: float, fine: float, tol: float):
        self.coarse = coarse
        self.fine = fine
        self.tol = tol
        super().__init__(
            f"quadrature did not converge: {coarse:.15g} vs {fine:.15g} (tol {tol:.1e})"
        )


class BracketError(CvSimError):
    """Root-finding bracket does not straddle the target or is not monotone."""

    def __init__(self, message: str, lo_value: Optional[float] = None, hi_value: Optional[float] = None):
        self.lo_value = lo_value
        self.hi_value = hi_value
        super().__init__(message)
