"""
cvsuperpose: coherent superpositions of photon subtraction and addition
applied to two-mode squeezed states.
"""

from cvsuperpose.errors import CvSimError
from cvsuperpose.fock_core import (
    SqueezeParam,
    SuperpositionOp,
    TruncationPolicy,
    TwoModeState,
    build_reference_state,
    make_tmss,
)

__version__ = "0.1.0"

__all__ = [
    "CvSimError",
    "SqueezeParam",
    "SuperpositionOp",
    "TruncationPolicy",
    "TwoModeState",
    "build_reference_state",
    "make_tmss",
]
