"""Exact E1/E2 pages of the cohomology spectral sequence for long knots."""

from knotss.config import CapExceeded, Limits, limits

__version__ = "0.1.0"

__all__ = ["CapExceeded", "Limits", "limits", "__version__"]
