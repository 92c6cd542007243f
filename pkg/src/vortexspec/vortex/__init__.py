"""Linear stability of columnar vortices: radial equation, eigenvalue searches,
energy identities, spectrum scans and the forced problem."""
from .eigen import (KelvinResult, SearchResult, auto_rectangle, axisymmetric_eigensolve,
                    count_nodes, eigen_search_complex, kelvin_modes_smooth, twod_eigensolve)
from .identities import (ExclusionBound, exclusion_bound_M, howard_identity_residuals,
                         richardson_min, richardson_number)
from .modes import FourierMode, SpectralParam, ab_from_s, s_from_ab
from .radial import CriticalLayerError, RadialProblem, RadialSolution, reconstruct_fields
from .resolvent import ResolventResult, divergence_free_forcing, resolvent_probe
from .scan import CellCount, ScanReport, bump, planted_zero_problem, spectrum_scan

__all__ = [
    "CellCount", "CriticalLayerError", "ExclusionBound", "FourierMode", "KelvinResult",
    "RadialProblem", "RadialSolution", "ResolventResult", "ScanReport", "SearchResult",
    "SpectralParam", "ab_from_s", "auto_rectangle", "axisymmetric_eigensolve", "bump",
    "count_nodes", "divergence_free_forcing", "eigen_search_complex", "exclusion_bound_M",
    "howard_identity_residuals", "kelvin_modes_smooth", "planted_zero_problem",
    "reconstruct_fields", "resolvent_probe", "richardson_min", "richardson_number",
    "s_from_ab", "spectrum_scan", "twod_eigensolve",
]
