"""
Dirac Darboux - matrix Darboux transformations of one-dimensional Dirac Hamiltonians.

This package builds partner potentials from pairs of seed eigenspinors,
provides closed-form seeds for the free particle and the generalized Coulomb
problem, and certifies the intertwining and quadratic supersymmetry
identities numerically.
"""

from dirac_darboux.config import AppConfig, LoggingConfig, NumericsConfig
from dirac_darboux.darboux import (
    DarbouxTransform,
    apply_L,
    apply_L_dagger,
    build_transform,
    chain,
    kernel_spinors_h1,
    transport_seed,
)
from dirac_darboux.exceptions import (
    DiracDarbouxError,
    InvalidParams,
    SeedNotEigen,
    SingularMatrix,
    SingularSeedMatrix,
)
from dirac_darboux.hamiltonian import (
    CoulombParams,
    DiracHamiltonian,
    Potential,
    coulomb_potential,
    free_particle_potential,
)
from dirac_darboux.matgrid import DerivativeMode, GridSpec, SampledField
from dirac_darboux.seeds import (
    FreeSeedParams,
    SeedSolution,
    coulomb_energy,
    coulomb_seed_pair_simplified,
    coulomb_solution,
    free_seed_pair,
    shooting_solve,
)
from dirac_darboux.susy_verify import ResidualReport, SuperPair, full_report

__version__ = "0.1.0"
__all__ = [
    "AppConfig",
    "LoggingConfig",
    "NumericsConfig",
    "GridSpec",
    "SampledField",
    "DerivativeMode",
    "Potential",
    "DiracHamiltonian",
    "CoulombParams",
    "free_particle_potential",
    "coulomb_potential",
    "SeedSolution",
    "FreeSeedParams",
    "free_seed_pair",
    "coulomb_energy",
    "coulomb_solution",
    "coulomb_seed_pair_simplified",
    "shooting_solve",
    "DarbouxTransform",
    "build_transform",
    "apply_L",
    "apply_L_dagger",
    "kernel_spinors_h1",
    "transport_seed",
    "chain",
    "SuperPair",
    "ResidualReport",
    "full_report",
    "DiracDarbouxError",
    "InvalidParams",
    "SingularMatrix",
    "SingularSeedMatrix",
    "SeedNotEigen",
]
