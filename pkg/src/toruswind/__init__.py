"""Winding-number indices, torus uniformization and first integrals for plane vector fields."""
from .kernels import BACKEND

__version__ = "0.1.0"
