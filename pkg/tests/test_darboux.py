"""Tests for seed matrices, sigma, partner potentials, kernels and chaining."""

import dataclasses

import numpy as np
import pytest

from dirac_darboux.cli.golden import (
    flagship_partner_closed_form,
    flagship_sigma_closed_form,
    flagship_transported_closed_form,
    free_partner_closed_form,
    reseeded_partner_closed_form,
)
from dirac_darboux.darboux import (
    DarbouxTransform,
    apply_L,
    apply_L_dagger,
    build_seed_matrix,
    build_transform,
    chain,
    kernel_residual,
    kernel_spinors_h1,
    partner_potential_commutator,
    sigma_from_derivative,
    transport_seed,
)
from dirac_darboux.exceptions import (
    DegenerateSeeds,
    SeedNotEigen,
    SingularSeedMatrix,
    VerificationFailed,
)
from dirac_darboux.hamiltonian import CoulombParams, DiracHamiltonian, apply_h, eigen_residual
from dirac_darboux.matgrid import DerivativeMode, GridSpec, SampledField, fd_values, max_norm
from dirac_darboux.seeds import (
    FreeSeedParams,
    SeedSolution,
    coulomb_energy,
    coulomb_solution,
    free_exponential_seed,
    free_seed_pair,
    shooting_solve,
)
from dirac_darboux.susy_verify import inner_product, random_smooth_fields


def _scaled(seed: SeedSolution, factor: float) -> SeedSolution:
    second = seed.second_derivative
    return dataclasses.replace(
        seed,
        value=lambda x: factor * seed.value(x),
        derivative=lambda x: factor * seed.derivative(x),
        second_derivative=(lambda x: factor * second(x)) if second is not None else None,
    )


class TestFreeTransform:
    """Tests for the free-particle transform."""

    @pytest.mark.parametrize("c", [0.0, 0.3])
    def test_partner_closed_form(self, c: float, free_h0: DiracHamiltonian) -> None:
        grid = GridSpec(-10.0, 10.0, 2001)
        p = FreeSeedParams(1.0, 0.6, c)
        t = build_transform(*free_seed_pair(p), free_h0, grid)
        x = grid.nodes
        assert np.max(np.abs(t.v1(x) - free_partner_closed_form(p, x))) <= 1e-10

    def test_partner_is_symmetric(self, free_transform: DarbouxTransform) -> None:
        v1 = free_transform.v1(np.linspace(-5.0, 5.0, 101))
        assert np.array_equal(v1, np.swapaxes(v1, 1, 2))

    def test_soliton_sigma(self, free_h0: DiracHamiltonian, free_grid: GridSpec) -> None:
        """Test that c = 0 gives sigma = -diag(k th kx, k th(kx + 2 alpha))."""
        p = FreeSeedParams(1.0, 0.6, 0.0)
        t = build_transform(*free_seed_pair(p), free_h0, free_grid)
        x = free_grid.nodes
        sigma = t.sigma_at(x)
        assert np.allclose(sigma[:, 0, 0], -p.k * np.tanh(p.k * x), atol=1e-12)
        assert np.allclose(sigma[:, 1, 1], -p.k * np.tanh(p.k * x + p.two_alpha), atol=1e-12)
        assert np.allclose(sigma[:, 0, 1], 0.0, atol=1e-12)
        assert np.allclose(sigma[:, 1, 0], 0.0, atol=1e-12)

    def test_routes_agree(self, free_transform: DarbouxTransform, free_grid: GridSpec) -> None:
        x = free_grid.nodes
        u = free_transform.seeds
        commutator_form = partner_potential_commutator(u, free_transform.h0)
        assert np.allclose(commutator_form(x), free_transform.v1(x), atol=1e-10)
        assert np.allclose(sigma_from_derivative(u)(x), free_transform.sigma(x), atol=1e-10)

    def test_riccati_derivative(self, free_transform: DarbouxTransform) -> None:
        grid = GridSpec(-4.0, 4.0, 4001)
        assert free_transform.sigma_derivative is not None
        exact = free_transform.sigma_derivative(grid.nodes)
        numeric = fd_values(free_transform.sigma(grid.nodes), grid.spacing, 4)
        assert np.allclose(exact, numeric, atol=1e-9)
        v_numeric = fd_values(free_transform.v1(grid.nodes), grid.spacing, 4)
        assert np.allclose(free_transform.v1.diff(grid.nodes), v_numeric, atol=1e-9)

    def test_column_scaling_invariance(
        self,
        free_transform: DarbouxTransform,
        free_h0: DiracHamiltonian,
        free_grid: GridSpec,
    ) -> None:
        s1, s2 = free_transform.seeds.seed1, free_transform.seeds.seed2
        scaled = build_transform(_scaled(s1, 1e6), _scaled(s2, -3.0), free_h0, free_grid)
        x = free_grid.nodes
        assert np.allclose(scaled.v1(x), free_transform.v1(x), atol=1e-12)
        assert np.allclose(scaled.sigma(x), free_transform.sigma(x), atol=1e-12)

    def test_kernel(self, free_transform: DarbouxTransform, free_grid: GridSpec) -> None:
        for seed in (free_transform.seeds.seed1, free_transform.seeds.seed2):
            assert kernel_residual(free_transform, seed, free_grid) <= 1e-12

    def test_kernel_tolerance(
        self, free_transform: DarbouxTransform, free_h0: DiracHamiltonian, free_grid: GridSpec
    ) -> None:
        s1, s2 = free_transform.seeds.seed1, free_transform.seeds.seed2
        with pytest.raises(VerificationFailed):
            build_transform(s1, s2, free_h0, free_grid, kernel_tolerance=1e-300)

    @pytest.mark.parametrize("fixture", ["free_transform", "flagship_transform"])
    def test_seed_order_symmetry(self, fixture: str, request: pytest.FixtureRequest) -> None:
        """Test that swapping columns together with energies leaves sigma and v1 unchanged."""
        t: DarbouxTransform = request.getfixturevalue(fixture)
        grid = t.seeds.grid
        swapped = build_transform(t.seeds.seed2, t.seeds.seed1, t.h0, grid)
        assert swapped.epsilons == t.epsilons[::-1]
        x = grid.nodes
        assert np.allclose(swapped.v1(x), t.v1(x), rtol=0.0, atol=1e-12)
        assert np.allclose(swapped.sigma(x), t.sigma(x), rtol=0.0, atol=1e-12)


class TestSeedValidation:
    """Tests for seed-matrix failure modes."""

    def test_degenerate(self, free_h0: DiracHamiltonian, free_grid: GridSpec) -> None:
        u1, _ = free_seed_pair(FreeSeedParams(1.0, 0.6))
        with pytest.raises(DegenerateSeeds):
            build_seed_matrix(u1, u1, free_h0, free_grid)

    def test_not_eigen(self, free_h0: DiracHamiltonian, free_grid: GridSpec) -> None:
        u1, u2 = free_seed_pair(FreeSeedParams(1.0, 0.6))
        wrong = dataclasses.replace(u1, energy=0.5)
        with pytest.raises(SeedNotEigen) as excinfo:
            build_seed_matrix(wrong, u2, free_h0, free_grid)
        assert excinfo.value.residual > 1e-9

    def test_singular(self, free_h0: DiracHamiltonian, free_grid: GridSpec) -> None:
        """Test that a determinant with a node is rejected and the node located."""
        m, E = 1.0, 0.6
        k = np.sqrt(m * m - E * E)
        grow = free_exponential_seed(m, E, growth=1)
        decay = free_exponential_seed(m, E, growth=-1)
        mixed = SeedSolution(
            E,
            lambda x: grow.value(x) - decay.value(x),
            lambda x: grow.derivative(x) - decay.derivative(x),
        )
        flip = np.array([-1.0, 1.0])
        mirror = SeedSolution(
            -E,
            lambda x: grow.value(x) * flip,
            lambda x: grow.derivative(x) * flip,
        )
        with pytest.raises(SingularSeedMatrix) as excinfo:
            build_seed_matrix(mixed, mirror, free_h0, free_grid)
        node = np.log(m / (m + k)) / (2.0 * k)
        assert abs(excinfo.value.x - node) <= 2.0 * free_grid.spacing


class TestKernelAndTransport:
    """Tests for kernel spinors of h1, transported states and chaining."""

    def test_kernel_spinors_are_eigen(
        self, free_transform: DarbouxTransform, free_grid: GridSpec
    ) -> None:
        for w, eps in zip(kernel_spinors_h1(free_transform.seeds), free_transform.epsilons):
            assert w.energy == eps
            field = w.sample(free_grid)
            assert eigen_residual(free_transform.h1, field, eps) <= 1e-10
            image = apply_L_dagger(free_transform, field)
            assert np.max(np.abs(image.values)) / np.max(np.abs(field.values)) <= 1e-10

    def test_kernel_spinors_invert_transposed_seeds(
        self, free_transform: DarbouxTransform
    ) -> None:
        x = np.array([-2.0, 0.3, 1.7])
        w1, w2 = kernel_spinors_h1(free_transform.seeds)
        expected = np.linalg.inv(np.swapaxes(free_transform.seeds(x), 1, 2))
        assert np.allclose(w1(x), expected[:, :, 0], rtol=1e-12, atol=1e-14)
        assert np.allclose(w2(x), expected[:, :, 1], rtol=1e-12, atol=1e-14)

    def test_transported_state(
        self, free_transform: DarbouxTransform, free_grid: GridSpec
    ) -> None:
        seed = free_exponential_seed(1.0, 0.3)
        image = transport_seed(free_transform, seed)
        assert image.energy == 0.3
        assert eigen_residual(free_transform.h1, image.sample(free_grid), 0.3) <= 1e-9

    @pytest.mark.parametrize("energy", [-1.5, -0.3, 0.1, 0.45, 1.2])
    def test_transport_of_shooting_states(
        self, free_transform: DarbouxTransform, free_h0: DiracHamiltonian, energy: float
    ) -> None:
        """Test that L maps h0 solutions to h1 solutions, converging at second order."""
        residuals = []
        for n_points in (4001, 8001):
            grid = GridSpec(-2.0, 2.0, n_points)
            psi = shooting_solve(free_h0, energy, [1.0, 0.0], grid)
            image = apply_L(free_transform, psi, DerivativeMode.FD2)
            shifted = apply_h(free_transform.h1, image, DerivativeMode.FD2, energy=energy)
            margin = DerivativeMode.FD2.margin(depth=2)
            residuals.append(max_norm(shifted.values, margin) / max_norm(image.values))
        assert residuals[1] <= 1e-6
        assert 3.5 <= residuals[0] / residuals[1] <= 4.5

    @pytest.mark.parametrize("fixture", ["free_transform", "flagship_transform"])
    def test_involution(self, fixture: str, request: pytest.FixtureRequest) -> None:
        """Test that transforming h1 with its kernel spinors returns v0."""
        t: DarbouxTransform = request.getfixturevalue(fixture)
        w1, w2 = kernel_spinors_h1(t.seeds)
        back = chain(t, w1, w2)
        x = t.seeds.grid.nodes
        assert np.max(np.abs(back.v1(x) - t.h0.potential(x))) <= 1e-8

    def test_chain_with_transported_seeds(
        self, free_h0: DiracHamiltonian, free_grid: GridSpec
    ) -> None:
        """Test a second step seeded by an image state and its mirror."""
        free_transform = build_transform(
            *free_seed_pair(FreeSeedParams(1.0, 0.6, 0.0)), free_h0, free_grid
        )
        seed = transport_seed(free_transform, free_exponential_seed(1.0, 0.3))
        flip = np.array([-1.0, 1.0])
        mirror = free_exponential_seed(1.0, 0.3, growth=-1)
        other = transport_seed(
            free_transform,
            SeedSolution(
                -0.3,
                lambda x: mirror.value(x) * flip,
                lambda x: mirror.derivative(x) * flip,
                lambda x: mirror.second_derivative(x) * flip,  # type: ignore[misc]
            ),
        )
        second = chain(free_transform, seed, other, free_grid)
        assert second.epsilons == (0.3, -0.3)
        v2 = second.v1(free_grid.nodes)
        assert np.all(np.isfinite(v2))
        assert np.array_equal(v2, np.swapaxes(v2, 1, 2))

    def test_adjoint(self, free_transform: DarbouxTransform) -> None:
        """Test that <L phi, psi> = <phi, L^dagger psi> for fields vanishing at the ends."""
        grid = GridSpec(-12.0, 12.0, 4001)
        # unit-width Gaussians centred at 0, negligible at x = +-12
        narrow = random_smooth_fields(GridSpec(-3.0, 3.0, 61), 2, seed=7)
        phi, psi = (
            SampledField.from_evaluator(grid, f.evaluator, f.derivative, f.second_derivative)
            for f in narrow
            if f.evaluator is not None
        )
        lhs = inner_product(apply_L(free_transform, phi), psi)
        rhs = inner_product(phi, apply_L_dagger(free_transform, psi))
        assert lhs == pytest.approx(rhs, abs=1e-6)


class TestCoulombTransform:
    """Tests for the generalized Coulomb partners."""

    def test_flagship_partner(
        self, flagship_transform: DarbouxTransform, coulomb_grid: GridSpec
    ) -> None:
        x = coulomb_grid.nodes
        assert np.max(np.abs(flagship_transform.v1(x) - flagship_partner_closed_form(x))) <= 1e-10

    def test_flagship_sigma(
        self, flagship_transform: DarbouxTransform, coulomb_grid: GridSpec
    ) -> None:
        x = coulomb_grid.nodes
        sigma = flagship_transform.sigma_at(x)
        assert np.max(np.abs(sigma - flagship_sigma_closed_form(x))) <= 1e-10

    def test_transported_level(
        self,
        flagship: CoulombParams,
        flagship_transform: DarbouxTransform,
        coulomb_grid: GridSpec,
    ) -> None:
        level = coulomb_solution(coulomb_energy(flagship, 2, "-"))
        image = apply_L(flagship_transform, level.sample(coulomb_grid))
        x = coulomb_grid.nodes
        assert np.max(np.abs(image.values - flagship_transported_closed_form(x))) <= 1e-8
        assert eigen_residual(flagship_transform.h1, image, -0.8) <= 1e-8

    def test_reseeded_partner(
        self, flagship: CoulombParams, coulomb_h0: DiracHamiltonian, coulomb_grid: GridSpec
    ) -> None:
        s1, s2 = (coulomb_solution(coulomb_energy(flagship, n, "-")) for n in (1, 2))
        t = build_transform(s1, s2, coulomb_h0, coulomb_grid)
        x = coulomb_grid.nodes
        assert np.max(np.abs(t.v1(x) - reseeded_partner_closed_form(x))) <= 1e-8
