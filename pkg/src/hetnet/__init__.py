"""Deterministic chaotic heteroclinic networks in the plane."""
from .core import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
