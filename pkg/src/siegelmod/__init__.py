"""Numerical toolkit for Siegel-type zeta functions of indefinite quadratic forms
and the modular forms built from their measures of representation."""

__version__ = "0.1.0"

from .errors import SiegelModError  # noqa: E402
from .quadform import QuadraticForm, validate  # noqa: E402

__all__ = ["QuadraticForm", "SiegelModError", "validate", "__version__"]
