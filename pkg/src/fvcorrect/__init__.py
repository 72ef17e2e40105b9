"""Finite volume solvers with same-matrix defect corrections."""
from .linalg import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
