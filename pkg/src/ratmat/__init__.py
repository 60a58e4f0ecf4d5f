"""Rational matrix functions with simple poles: additive and multiplicative forms,
elementary-divisor factorization, refactorization dynamics and the rank-two
spectral reduction."""

from .elementary_divisor import ElementaryDivisor, from_action, from_action_left, make
from .errors import (AtPole, DegenerateCoordinates, DegeneratePairing, GaugeDegenerate,
                     GenericityHalt, NonGeneric, OracleMismatch, PiAtRho, RatmatError,
                     ShiftCollision, WrongPoleCount)
from .factorization import (Factorization, expand_product, full_factorization, left_divisor,
                            reconstruct, right_divisor)
from .rational_matrix import (InverseData, RationalMatrixFunction, construct, det_divisor,
                              gauge_act, invert)
from .spectral import SpectralPoint, SpectralType, extract_spectral, from_spectral

__version__ = "0.1.0"

__all__ = [
    "AtPole", "DegenerateCoordinates", "DegeneratePairing", "ElementaryDivisor", "Factorization",
    "GaugeDegenerate", "GenericityHalt", "InverseData", "NonGeneric", "OracleMismatch", "PiAtRho",
    "RationalMatrixFunction", "RatmatError", "ShiftCollision", "SpectralPoint", "SpectralType",
    "WrongPoleCount", "construct", "det_divisor", "expand_product", "extract_spectral",
    "from_action", "from_action_left", "from_spectral", "full_factorization", "gauge_act",
    "invert", "left_divisor", "make", "reconstruct", "right_divisor",
]
