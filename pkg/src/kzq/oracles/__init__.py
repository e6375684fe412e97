"""Independent references for the mode integrator."""
from .exact_diag import ed_reference
from .landau_zener import exact_probability

__all__ = ["ed_reference", "exact_probability"]
