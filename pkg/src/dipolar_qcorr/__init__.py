"""Entanglement and quantum discord of a dipolar two-spin system under dephasing."""

from .errors import AccuracyWarning, NumericFailure
from .spinmodel import SimParams, PhysicalConstants

__version__ = "0.1.0"

__all__ = [
    "AccuracyWarning",
    "NumericFailure",
    "PhysicalConstants",
    "SimParams",
    "__version__",
]
