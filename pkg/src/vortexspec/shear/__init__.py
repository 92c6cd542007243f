"""Stratified rest states, shear flows and stratified shear flows in a channel."""
from .criteria import (MilesHowardReport, SquireMode, howard_substitution_residual,
                       miles_howard_report, rayleigh_inflection_check, squire_transform)
from .eigen import (ChannelEigenpair, ChannelProblem, ChannelSearch, default_region,
                    rayleigh_eigensolve, rayleigh_identity_residuals, rt_eigs_boussinesq,
                    rt_eigs_full, taylor_goldstein_eigensolve)
from .profile import ShearProfile, make_shear, shear_profile_from_spec

__all__ = [
    "ChannelEigenpair", "ChannelProblem", "ChannelSearch", "MilesHowardReport", "ShearProfile",
    "SquireMode", "default_region", "howard_substitution_residual", "make_shear",
    "miles_howard_report", "rayleigh_eigensolve", "rayleigh_identity_residuals",
    "rayleigh_inflection_check", "rt_eigs_boussinesq", "rt_eigs_full", "shear_profile_from_spec",
    "squire_transform", "taylor_goldstein_eigensolve",
]
