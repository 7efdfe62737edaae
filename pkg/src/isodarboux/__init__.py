"""Strictly isospectral potential families from the general Riccati solution,
with Riccati nonlinear superposition and numerical verification tools."""
from .catalog import TOOL_VERSION as __version__
from .errors import (
    CatalogError,
    DegenerateConfigurationError,
    EigenSolverError,
    FactorizationEnergyError,
    GridError,
    IsoDarbouxError,
    NodalFunctionError,
    NumericalError,
    PartnerMismatchError,
    ScatteringError,
    SingularBandError,
)
from .grid import Grid, SampledFunction, build_grid, sample
from .multiparam import HierarchyState, cross_order_invariant, extend, general_at_order, init_hierarchy
from .riccati import CrossRatio, RiccatiTriple, cross_ratio, lambda_cross_ratio, superpose
from .schrodinger import (
    Hamiltonian,
    Spectrum,
    WaveFunction,
    compute_spectrum,
    compute_zero_mode,
    discretize,
    solve_at_energy,
    wave_function,
)
from .susy import (
    FamilyMember,
    Superpotential,
    deformed_ground_state,
    deformed_potential,
    general_superpotential,
    witten_superpotential,
)
from .verify import ScatteringData, VerificationReport, isospectrality_report, scattering_coefficients

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
