"""Elliptic theta spaces, the Belavin R-matrix and homomorphisms of exchange algebras."""
from .cfrac import CFrac, HomConstants, det_d, dual, expand, hom_constants
from .duality import DualityPair, build_pair
from .errors import (ArtifactError, DegenerateEigenvalueError, InternalCheckError, InvalidInputError,
                     LimitNotConvergedError, PoleProximityError, SamplingExhaustedError, TruncationError)
from .rmatrix import RMatrixSpec, r_entries, ybe_residual
from .theta1 import DegenerationMode, Lattice, ThetaSeries, theta, theta_alpha
from .thetap import MultiThetaSpace, WBasis

__version__ = "0.1.0"

__all__ = [
    "CFrac", "HomConstants", "det_d", "dual", "expand", "hom_constants", "DualityPair", "build_pair",
    "ArtifactError", "DegenerateEigenvalueError", "InternalCheckError", "InvalidInputError",
    "LimitNotConvergedError", "PoleProximityError", "SamplingExhaustedError", "TruncationError",
    "RMatrixSpec", "r_entries", "ybe_residual", "DegenerationMode", "Lattice", "ThetaSeries", "theta",
    "theta_alpha", "MultiThetaSpace", "WBasis", "__version__",
]
