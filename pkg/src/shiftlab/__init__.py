"""Finite-horizon laboratory for weighted backward shifts on l_p and c_0."""

from ._kernels import BACKEND_NAME
from .ideals import HorizonError, IdealSpec, NatSet, Verdict
from .sequences import Cylinder, SeqVector
from .weights import Constant, Explicit, FRatio, RuleWeights, WeightSequence

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "Constant",
    "Cylinder",
    "Explicit",
    "FRatio",
    "HorizonError",
    "IdealSpec",
    "NatSet",
    "RuleWeights",
    "SeqVector",
    "Verdict",
    "WeightSequence",
]
