"""Tests for seed solutions, Kummer's function, Coulomb levels and shooting."""

import math

import numpy as np
import pytest
from scipy.special import hyp1f1

from dirac_darboux.exceptions import (
    BranchInvalid,
    DomainMismatch,
    IntegrationOverflow,
    InvalidLevel,
    InvalidParams,
)
from dirac_darboux.hamiltonian import (
    CoulombParams,
    DiracHamiltonian,
    coulomb_potential,
    eigen_residual,
    free_particle_potential,
)
from dirac_darboux.matgrid import GridSpec, SampledField, fd_values, mat2_det
from dirac_darboux.seeds import (
    FreeSeedParams,
    SeedSolution,
    coulomb_energy,
    coulomb_seed_constants,
    coulomb_seed_pair_simplified,
    coulomb_solution,
    free_exponential_seed,
    free_seed_pair,
    kummer,
    kummer_derivative,
    l2_norm,
    seed_from_samples,
    shooting_solve,
)

STANDARD = CoulombParams(M=1.0, alpha=1.0 / 137.0, beta=0.0, k=1.0)


def _mirror(seed: SeedSolution) -> SeedSolution:
    """(-psi1, psi2) at -E, an eigenspinor whenever v is proportional to sigma_1."""
    flip = np.array([-1.0, 1.0])
    return SeedSolution(
        -seed.energy,
        lambda x: seed.value(x) * flip,
        lambda x: seed.derivative(x) * flip,
    )


def _relative_error(numeric: np.ndarray, exact: np.ndarray) -> float:
    return float(np.max(np.abs(numeric - exact)) / np.max(np.abs(exact)))


class TestFreeSeeds:
    """Tests for the free-particle seed pair."""

    @pytest.mark.parametrize("c", [0.0, 0.3, -1.0])
    def test_seeds_are_eigen(
        self, c: float, free_h0: DiracHamiltonian, free_grid: GridSpec
    ) -> None:
        u1, u2 = free_seed_pair(FreeSeedParams(1.0, 0.6, c))
        assert u1.energy == 0.6 and u2.energy == -0.6
        for seed in (u1, u2):
            assert eigen_residual(free_h0, seed.sample(free_grid), seed.energy) <= 1e-12

    def test_determinant_closed_form(
        self, free_params: FreeSeedParams, free_grid: GridSpec
    ) -> None:
        u1, u2 = free_seed_pair(free_params)
        x = free_grid.nodes
        det = mat2_det(np.stack([u1(x), u2(x)], axis=-1))
        assert np.allclose(det, free_params.determinant(x), rtol=1e-12)
        assert np.all(det > 0)

    def test_second_derivative(self, free_params: FreeSeedParams) -> None:
        u1, _ = free_seed_pair(free_params)
        assert u1.second_derivative is not None
        x = np.linspace(-1.0, 1.0, 7)
        assert np.allclose(u1.second_derivative(x), free_params.k**2 * u1.value(x))

    @pytest.mark.parametrize(
        "m, E, c",
        [(1.0, 1.0, 0.0), (1.0, 0.0, 0.0), (1.0, -0.5, 0.0), (1.0, 0.6, 1.5), (-1.0, 0.5, 0.0)],
    )
    def test_invalid_params(self, m: float, E: float, c: float) -> None:
        with pytest.raises(InvalidParams):
            FreeSeedParams(m, E, c)

    def test_mirror_seed(self, free_h0: DiracHamiltonian, free_grid: GridSpec) -> None:
        seed = free_exponential_seed(1.0, 0.3, growth=-1)
        mirrored = _mirror(seed)
        assert eigen_residual(free_h0, mirrored.sample(free_grid), -0.3) <= 1e-12

    def test_exponential_seed_rejects_bad_growth(self) -> None:
        with pytest.raises(InvalidParams):
            free_exponential_seed(1.0, 0.3, growth=2)
        with pytest.raises(InvalidParams):
            free_exponential_seed(1.0, 1.3)


class TestKummer:
    """Tests for the confluent hypergeometric function."""

    def test_polynomial_case(self) -> None:
        z = np.linspace(-4.0, 12.0, 33)
        for n in range(5):
            assert np.allclose(kummer(-n, 3.5, z), hyp1f1(-n, 3.5, z), rtol=1e-12, atol=1e-12)

    def test_series_case(self) -> None:
        z = np.linspace(-5.0, 5.0, 21)
        assert np.allclose(kummer(0.5, 1.5, z), hyp1f1(0.5, 1.5, z), rtol=1e-10)
        assert np.allclose(kummer(2.3, 4.1, z), hyp1f1(2.3, 4.1, z), rtol=1e-10)

    def test_derivatives(self) -> None:
        z = np.linspace(0.0, 3.0, 7)
        a, b = -3.0, 3.0
        assert np.allclose(kummer_derivative(a, b, z), (a / b) * hyp1f1(a + 1, b + 1, z))
        second = (a * (a + 1)) / (b * (b + 1)) * hyp1f1(a + 2, b + 2, z)
        assert np.allclose(kummer_derivative(a, b, z, order=2), second)
        assert np.all(kummer_derivative(0.0, 3.0, z) == 0.0)

    @pytest.mark.parametrize("b", [0.0, -2.0])
    def test_undefined_for_non_positive_integer_b(self, b: float) -> None:
        with pytest.raises(InvalidParams):
            kummer(1.0, b, np.array([0.5]))


class TestCoulombLevels:
    """Tests for the energy formula and the closed-form solutions."""

    @pytest.mark.parametrize(
        "n, sign, energy",
        [(1, "-", -3.0 / 5.0), (2, "-", -4.0 / 5.0), (3, "-", -15.0 / 17.0)],
    )
    def test_flagship_energies(
        self, flagship: CoulombParams, n: int, sign: str, energy: float
    ) -> None:
        level = coulomb_energy(flagship, n, sign)
        assert level.energy == pytest.approx(energy, abs=1e-12)
        assert level.valid and not level.degenerate
        assert level.lam == pytest.approx(math.sqrt(1.0 - energy**2), abs=1e-12)

    def test_ground_level_is_degenerate(self, flagship: CoulombParams) -> None:
        level = coulomb_energy(flagship, 0, "+")
        assert level.energy == pytest.approx(1.0)
        assert level.degenerate and level.lam == 0.0
        assert math.isnan(level.round_trip)
        with pytest.raises(InvalidLevel):
            coulomb_solution(level)

    def test_standard_coulomb_ladder(self) -> None:
        """Test that |E_n| follows M / sqrt(1 + alpha^2/(n+mu)^2) and increases with n."""
        mu = math.sqrt(1.0 - STANDARD.alpha**2)
        magnitudes = []
        for n in range(6):
            level = coulomb_energy(STANDARD, n, "-")
            expected = 1.0 / math.sqrt(1.0 + STANDARD.alpha**2 / (n + mu) ** 2)
            assert abs(level.energy) == pytest.approx(expected, rel=1e-13)
            assert level.round_trip <= 1e-9
            magnitudes.append(abs(level.energy))
        assert all(b > a for a, b in zip(magnitudes, magnitudes[1:], strict=False))

    def test_invalid_branch(self) -> None:
        with pytest.raises(BranchInvalid):
            coulomb_energy(STANDARD, 1, "+")
        level = coulomb_energy(STANDARD, 1, "+", strict=False)
        assert not level.valid
        assert level.round_trip > 1e-9

    def test_rejects_bad_level(self, flagship: CoulombParams) -> None:
        with pytest.raises(InvalidParams):
            coulomb_energy(flagship, -1, "-")
        with pytest.raises(InvalidParams):
            coulomb_energy(flagship, 1, "x")

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_solution_is_eigen(
        self, flagship: CoulombParams, coulomb_h0: DiracHamiltonian, coulomb_grid: GridSpec, n: int
    ) -> None:
        level = coulomb_energy(flagship, n, "-")
        psi = coulomb_solution(level).sample(coulomb_grid)
        assert eigen_residual(coulomb_h0, psi, level.energy) <= 1e-9

    def test_solution_against_hypergeometric_oracle(self, flagship: CoulombParams) -> None:
        level = coulomb_energy(flagship, 3, "-")
        x = np.linspace(0.1, 10.0, 50)
        lam, mu, E, n = level.lam, level.mu, level.energy, level.n
        z = 2.0 * lam * x
        shape = -flagship.k + (flagship.alpha * flagship.M + flagship.beta * E) / lam
        a = -n * hyp1f1(1 - n, 2 * mu + 1, z)
        b = shape * hyp1f1(-n, 2 * mu + 1, z)
        envelope = x**mu * np.exp(-lam * x)
        expected = np.stack(
            [envelope * (a - b), envelope * (-lam / (flagship.M + E)) * (a + b)], axis=-1
        )
        assert np.allclose(coulomb_solution(level)(x), expected, rtol=1e-11, atol=1e-14)

    def test_solution_second_derivative(self, flagship: CoulombParams) -> None:
        seed = coulomb_solution(coulomb_energy(flagship, 2, "-"))
        assert seed.second_derivative is not None
        grid = GridSpec(0.5, 4.0, 4001)
        first = seed.derivative(grid.nodes)
        numeric = fd_values(first, grid.spacing, 4)
        assert np.allclose(seed.second_derivative(grid.nodes)[5:-5], numeric[5:-5], atol=1e-8)


class TestSimplifiedPair:
    """Tests for the level-0/level-1 seed pair."""

    def test_flagship_constants(self, flagship: CoulombParams) -> None:
        const = coulomb_seed_constants(flagship)
        expected = (0.0, 4.0 / 5.0, 0.0, 4.0 / 15.0, 8.0 / 15.0, 1.0, -3.0 / 5.0)
        assert np.allclose(const.as_tuple(), expected, rtol=0.0, atol=1e-12)

    def test_seeds_are_eigen(
        self, flagship: CoulombParams, coulomb_h0: DiracHamiltonian, coulomb_grid: GridSpec
    ) -> None:
        u1, u2 = coulomb_seed_pair_simplified(flagship)
        assert u1.label == "n=0" and u2.label == "n=1"
        for seed in (u1, u2):
            assert eigen_residual(coulomb_h0, seed.sample(coulomb_grid), seed.energy) <= 1e-10

    def test_level_one_is_proportional_to_closed_form(self, flagship: CoulombParams) -> None:
        _, u2 = coulomb_seed_pair_simplified(flagship)
        closed = coulomb_solution(coulomb_energy(flagship, 1, "-"))
        x = np.linspace(0.2, 8.0, 40)
        assert np.allclose(closed(x), -2.0 * u2(x), rtol=1e-12, atol=1e-15)

    def test_inconsistent_branch(self) -> None:
        with pytest.raises(InvalidParams):
            coulomb_seed_constants(STANDARD, "+", "+")


class TestShooting:
    """Tests for the RK4 shooting integrator."""

    def test_free_accuracy_and_order(self, free_h0: DiracHamiltonian) -> None:
        seed = free_exponential_seed(1.0, 0.6)
        errors = []
        for n in (201, 401):
            grid = GridSpec(-5.0, 5.0, n)
            shot = shooting_solve(free_h0, 0.6, seed(grid.x_min), grid)
            errors.append(_relative_error(shot.values, seed(grid.nodes)))
        assert errors[0] <= 1e-6
        assert 14.0 <= errors[0] / errors[1] <= 18.0

    def test_coulomb_accuracy(self, flagship: CoulombParams, coulomb_h0: DiracHamiltonian) -> None:
        level = coulomb_energy(flagship, 1, "-")
        seed = coulomb_solution(level)
        grid = GridSpec(0.05, 10.0, 40001)
        shot = shooting_solve(coulomb_h0, level.energy, seed(grid.x_min), grid)
        assert _relative_error(shot.values, seed(grid.nodes)) <= 1e-6

    def test_overflow(self) -> None:
        h = DiracHamiltonian(free_particle_potential(1000.0))
        with pytest.raises(IntegrationOverflow):
            shooting_solve(h, 0.0, [1.0, 1.0], GridSpec(-1.0, 1.0, 201))

    def test_domain(self, coulomb_h0: DiracHamiltonian) -> None:
        with pytest.raises(DomainMismatch):
            shooting_solve(coulomb_h0, -0.6, [1.0, 0.0], GridSpec(0.0, 1.0, 101))

    def test_seed_from_samples(self, free_h0: DiracHamiltonian, free_grid: GridSpec) -> None:
        shot = shooting_solve(free_h0, 0.2, [1.0, 0.0], free_grid)
        seed = seed_from_samples(shot, 0.2)
        assert seed.energy == 0.2
        assert np.allclose(seed(free_grid.nodes), shot.values)
        assert eigen_residual(free_h0, seed.sample(free_grid), 0.2) <= 1e-5


def test_l2_norm() -> None:
    grid = GridSpec(0.0, 2.0, 21)
    field = SampledField(grid, np.tile([1.0, 0.0], (21, 1)))
    assert l2_norm(field) == pytest.approx(math.sqrt(2.0))
