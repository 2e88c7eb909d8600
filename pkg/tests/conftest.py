"""Shared fixtures for the dirac-darboux test suite."""

import pytest

from dirac_darboux.darboux import DarbouxTransform, build_transform
from dirac_darboux.hamiltonian import (
    CoulombParams,
    DiracHamiltonian,
    coulomb_potential,
    free_particle_potential,
)
from dirac_darboux.matgrid import GridSpec
from dirac_darboux.seeds import FreeSeedParams, coulomb_seed_pair_simplified, free_seed_pair


@pytest.fixture
def free_grid() -> GridSpec:
    return GridSpec(-5.0, 5.0, 1001)


@pytest.fixture
def coulomb_grid() -> GridSpec:
    return GridSpec(0.1, 20.0, 2001)


@pytest.fixture
def free_params() -> FreeSeedParams:
    return FreeSeedParams(m=1.0, E=0.6, c=0.3)


@pytest.fixture
def free_h0(free_params: FreeSeedParams) -> DiracHamiltonian:
    return DiracHamiltonian(free_particle_potential(free_params.m))


@pytest.fixture
def free_transform(
    free_params: FreeSeedParams, free_h0: DiracHamiltonian, free_grid: GridSpec
) -> DarbouxTransform:
    s1, s2 = free_seed_pair(free_params)
    return build_transform(s1, s2, free_h0, free_grid)


@pytest.fixture
def flagship() -> CoulombParams:
    return CoulombParams(M=1.0, alpha=1.0, beta=-1.0, k=1.0)


@pytest.fixture
def coulomb_h0(flagship: CoulombParams) -> DiracHamiltonian:
    return DiracHamiltonian(coulomb_potential(flagship))


@pytest.fixture
def flagship_transform(
    flagship: CoulombParams, coulomb_h0: DiracHamiltonian, coulomb_grid: GridSpec
) -> DarbouxTransform:
    s1, s2 = coulomb_seed_pair_simplified(flagship)
    return build_transform(s1, s2, coulomb_h0, coulomb_grid)
