"""Dissipative two-site Bose-Hubbard dimer: Gaussian and Fock-space engines."""

__version__ = "0.1.0"

from .closed import NormalModes, closed_covariance, normal_modes, propagator
from .dissipative import (
    DriftDiffusion,
    Trajectory,
    assemble_generators,
    evolve,
    find_thermalisation_times,
    local_occupations_at,
    state_at,
    steady_state,
    steady_state_closed_form,
)
from .errors import (
    DomainError,
    DwellError,
    IntegrationError,
    NoSteadyStateError,
    TruncationError,
    UnsupportedRegimeError,
)
from .fock import (
    FockDensityMatrix,
    build_liouvillian,
    evolve_fock,
    extract_covariance,
    fluxes_fock,
    fock_steady_state,
    fock_uhlmann_fidelity,
    thermal_fock,
)
from .gaussian import (
    GaussianState,
    ModelParams,
    apply_symplectic,
    mixing_matrix,
    rotation_matrix,
    symplectic_eigenvalues,
    thermal_covariance,
)
from .measures import (
    DiscordResult,
    GlobalThermal,
    LocalThermal,
    gaussian_discord,
    gaussian_fidelity,
    log_negativity,
    max_fidelity_thermal,
)
from .thermo import FluxRecord, closed_form_flux, fluxes_from_trajectory, total_energy

__all__ = [
    "DiscordResult",
    "DomainError",
    "DriftDiffusion",
    "DwellError",
    "FluxRecord",
    "FockDensityMatrix",
    "GaussianState",
    "GlobalThermal",
    "IntegrationError",
    "LocalThermal",
    "ModelParams",
    "NoSteadyStateError",
    "NormalModes",
    "Trajectory",
    "TruncationError",
    "UnsupportedRegimeError",
    "apply_symplectic",
    "assemble_generators",
    "build_liouvillian",
    "closed_covariance",
    "closed_form_flux",
    "evolve",
    "evolve_fock",
    "extract_covariance",
    "find_thermalisation_times",
    "fluxes_fock",
    "fluxes_from_trajectory",
    "fock_steady_state",
    "fock_uhlmann_fidelity",
    "gaussian_discord",
    "gaussian_fidelity",
    "local_occupations_at",
    "log_negativity",
    "max_fidelity_thermal",
    "mixing_matrix",
    "normal_modes",
    "propagator",
    "rotation_matrix",
    "state_at",
    "steady_state",
    "steady_state_closed_form",
    "symplectic_eigenvalues",
    "thermal_covariance",
    "thermal_fock",
    "total_energy",
]
