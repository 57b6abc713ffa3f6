"""Numerical and exact checks for Dirac index computations on spaces with edge singularities."""

from edgeindex.errors import EdgeIndexError

__version__ = "0.1.0"

__all__ = ["EdgeIndexError", "__version__"]
