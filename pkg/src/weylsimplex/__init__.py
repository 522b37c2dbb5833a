"""Bell-diagonal "magic simplex" states of n qudit pairs.

Construction of vertex and family states, positivity and partial-transpose
checks over every bipartition, simplex witnesses, two-copy distillation and
grid scans. The compact kernels behind the witness search are compiled with
Cython when available; :data:`BACKEND` names the active implementation.
"""

from .kernels import BACKEND
from .linalg import DensityMatrix, DomainError, SystemShape
from .simplex import FamilyParams, OutsideStateSpace, SimplexPoint, simplex_state, to_simplex_point, vertex_state
from .weyl import WeylIndex

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DensityMatrix",
    "DomainError",
    "FamilyParams",
    "OutsideStateSpace",
    "SimplexPoint",
    "SystemShape",
    "WeylIndex",
    "simplex_state",
    "to_simplex_point",
    "vertex_state",
]
