"""Spectral stability of columnar vortices, stratified fluids and shear flows."""
from .profiles import VortexProfile, check_assumptions, make_builtin, profile_from_spec

__version__ = "0.1.0"
__all__ = ["VortexProfile", "check_assumptions", "make_builtin", "profile_from_spec"]
