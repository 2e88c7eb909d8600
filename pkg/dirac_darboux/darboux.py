"""
First-order matrix Darboux transformations.

Two eigenspinors ``u1, u2`` of ``h0`` at energies ``eps1 != eps2`` form the
seed matrix ``u = (u1, u2)`` with ``h0 u = u diag(eps1, eps2)``. The
intertwiner is ``L = d/dx + sigma`` with ``sigma = -u' u^-1``, and the partner
Hamiltonian ``h1`` satisfies ``L h0 = h1 L``. Both ``sigma`` and the partner
potential are evaluated without differentiating the seeds, so they are exact
closures usable on any grid.

Every quantity built here is invariant under rescaling the columns of ``u``;
evaluators normalize the columns pointwise before inverting, which keeps
exponentially growing or decaying seeds well conditioned.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from dirac_darboux.exceptions import (
    DegenerateSeeds,
    InvalidParams,
    SeedNotEigen,
    SingularSeedMatrix,
    VerificationFailed,
)
from dirac_darboux.hamiltonian import (
    DiracHamiltonian,
    Potential,
    apply_first_order,
    eigen_residual,
)
from dirac_darboux.matgrid import (
    IDENTITY,
    J,
    Array,
    DerivativeMode,
    Evaluator,
    GridSpec,
    SampledField,
    as_points,
    commutator,
    mat2_det,
    mat2_inv,
    matvec,
    max_norm,
    symmetric_stack,
)
from dirac_darboux.seeds import SeedSolution

logger = logging.getLogger(__name__)

# |det u| must exceed this fraction of |u1| |u2|
DET_RATIO_THRESHOLD = 1e-10
EIGEN_TOLERANCE = 1e-9
KERNEL_TOLERANCE = 1e-9


def _transpose(m: Array) -> Array:
    return np.swapaxes(m, -1, -2)


# ============================================================================
# Seed matrix
# ============================================================================


@dataclass(frozen=True)
class SeedMatrix:
    """
    Seed matrix ``u(x)`` with columns ``u1, u2``.

    Attributes:
        seed1: First column, energy ``eps1``.
        seed2: Second column, energy ``eps2``.
        grid: Working grid the determinant was validated on.
        min_det_ratio: Smallest ``|det u| / (|u1| |u2|)`` seen on the grid.
    """

    seed1: SeedSolution
    seed2: SeedSolution
    grid: GridSpec
    min_det_ratio: float

    @property
    def epsilons(self) -> tuple[float, float]:
        return self.seed1.energy, self.seed2.energy

    @property
    def lam(self) -> Array:
        return np.diag(self.epsilons)

    def value(self, x: Array) -> Array:
        return np.stack([self.seed1.value(x), self.seed2.value(x)], axis=-1)

    def derivative(self, x: Array) -> Array:
        return np.stack([self.seed1.derivative(x), self.seed2.derivative(x)], axis=-1)

    def second_derivative(self, x: Array) -> Array | None:
        first, second = self.seed1.second_derivative, self.seed2.second_derivative
        if first is None or second is None:
            return None
        return np.stack([first(x), second(x)], axis=-1)

    def normalized(self, x: Array) -> tuple[Array, Array]:
        """
        Column-normalized ``u`` and the column norms.

        Raises:
            SingularSeedMatrix: ``|det u|`` falls below the relative threshold at some x.
        """
        raw = self.value(x)
        norms = np.linalg.norm(raw, axis=1)
        unit = raw / norms[:, None, :]
        ratio = np.abs(mat2_det(unit))
        bad = np.flatnonzero(~(ratio > DET_RATIO_THRESHOLD))
        if bad.size:
            where = float(x[bad[0]])
            raise SingularSeedMatrix(f"det u vanishes at x = {where!r}", x=where)
        return unit, norms

    def __call__(self, x: ArrayLike) -> Array:
        points = np.asarray(x, dtype=np.float64)
        out = self.value(as_points(points))
        return out[0] if points.ndim == 0 else out


def build_seed_matrix(
    s1: SeedSolution,
    s2: SeedSolution,
    h0: DiracHamiltonian,
    grid: GridSpec,
    tolerance: float = EIGEN_TOLERANCE,
) -> SeedMatrix:
    """
    Assemble and validate ``u = (u1, u2)`` on the working grid.

    Raises:
        DegenerateSeeds: ``eps1 == eps2``.
        SeedNotEigen: A column fails ``h0 u_j = eps_j u_j`` beyond ``tolerance``.
        SingularSeedMatrix: ``det u`` vanishes at a node; the exception carries x.
    """
    if s1.energy == s2.energy:
        raise DegenerateSeeds(f"seed energies coincide at {s1.energy!r}")
    h0.potential.check_grid(grid)

    for seed in (s1, s2):
        residual = eigen_residual(h0, seed.sample(grid), seed.energy)
        if not residual <= tolerance:
            raise SeedNotEigen(
                f"seed {seed.label or '?'} misses E={seed.energy!r}: residual {residual:.3e}",
                residual=residual,
            )

    partial = SeedMatrix(s1, s2, grid, min_det_ratio=np.nan)
    nodes = grid.nodes
    unit, _ = partial.normalized(nodes)
    det = mat2_det(unit)
    crossings = np.flatnonzero(np.sign(det[:-1]) != np.sign(det[1:]))
    if crossings.size:
        where = float(nodes[crossings[0]])
        raise SingularSeedMatrix(f"det u changes sign between nodes near x = {where!r}", x=where)
    min_ratio = float(np.min(np.abs(det)))
    logger.info(
        f"Seed matrix at energies ({s1.energy!r}, {s2.energy!r}) on {grid}: "
        f"min |det u|/(|u1||u2|) = {min_ratio:.3e}"
    )
    return SeedMatrix(s1, s2, grid, min_ratio)


# ============================================================================
# sigma
# ============================================================================


def sigma_analytic(u: SeedMatrix, h0: DiracHamiltonian) -> Evaluator:
    """``sigma = J u lam u^-1 - J v0``, free of seed derivatives."""
    lam = u.lam

    def sigma(x: Array) -> Array:
        unit, _ = u.normalized(x)
        projected = unit @ lam @ mat2_inv(unit)
        return np.matmul(J, projected) - np.matmul(J, h0.potential(x))

    return sigma


def sigma_from_derivative(u: SeedMatrix) -> Evaluator:
    """``sigma = -u' u^-1`` from the seeds' derivative evaluators."""

    def sigma(x: Array) -> Array:
        unit, norms = u.normalized(x)
        return -(u.derivative(x) / norms[:, None, :]) @ mat2_inv(unit)

    return sigma


def sigma_derivative(h0: DiracHamiltonian, sigma: Evaluator) -> Evaluator | None:
    """
    ``sigma'`` from the matrix Riccati equation
    ``sigma' = -J (v0' + [sigma, v0] + [J, sigma] sigma)``.

    Returns None when ``v0'`` is not available.
    """
    potential = h0.potential
    if potential.derivative is None:
        return None

    def d_sigma(x: Array) -> Array:
        s = sigma(x)
        inner = potential.diff(x) + commutator(s, potential(x)) + commutator(J, s) @ s
        return -np.matmul(J, inner)

    return d_sigma


# ============================================================================
# Partner potential
# ============================================================================


def partner_potential(u: SeedMatrix, h0: DiracHamiltonian) -> Potential:
    """
    ``v1 = sigma_2 v0 sigma_2 + (eps1 - eps2)/det u [[d1, d2], [d2, -d1]]``

    with ``d1 = u11 u22 + u12 u21`` and ``d2 = u21 u22 - u11 u12``. The
    off-diagonal entries share one array, so ``v1`` is exactly symmetric.
    """
    eps1, eps2 = u.epsilons
    gap = eps1 - eps2
    potential = h0.potential

    def evaluator(x: Array) -> Array:
        unit, _ = u.normalized(x)
        v0 = potential(x)
        d1 = unit[:, 0, 0] * unit[:, 1, 1] + unit[:, 0, 1] * unit[:, 1, 0]
        d2 = unit[:, 1, 0] * unit[:, 1, 1] - unit[:, 0, 0] * unit[:, 0, 1]
        scale = gap / mat2_det(unit)
        return symmetric_stack(
            v0[:, 1, 1] + scale * d1,
            -v0[:, 0, 1] + scale * d2,
            v0[:, 0, 0] - scale * d1,
        )

    d_sigma = sigma_derivative(h0, sigma_analytic(u, h0))
    derivative: Evaluator | None = None
    if d_sigma is not None:
        slope = d_sigma

        def derivative(x: Array) -> Array:
            return potential.diff(x) + commutator(slope(x), J)

    return Potential(
        evaluator,
        potential.domain,
        f"partner of {potential.descriptor} at energies ({eps1!r}, {eps2!r})",
        derivative,
        potential.support,
    )


def partner_potential_commutator(u: SeedMatrix, h0: DiracHamiltonian) -> Potential:
    """Commutator route ``v1 = v0 + [sigma, J]``, kept as an independent cross-check."""
    sigma = sigma_analytic(u, h0)
    potential = h0.potential

    def evaluator(x: Array) -> Array:
        return potential(x) + commutator(sigma(x), J)

    return Potential(
        evaluator,
        potential.domain,
        f"partner of {potential.descriptor} (commutator form)",
        support=potential.support,
    )


# ============================================================================
# Transform
# ============================================================================


@dataclass(frozen=True)
class DarbouxTransform:
    """
    Intertwiner ``L = d/dx + sigma`` and partner potential ``v1``.

    Attributes:
        seeds: Validated seed matrix.
        h0: Source Hamiltonian.
        sigma: ``x -> (n, 2, 2)`` zeroth-order coefficient of ``L``.
        sigma_derivative: Exact ``sigma'`` when ``v0'`` is known.
        v1: Partner potential.
    """

    seeds: SeedMatrix
    h0: DiracHamiltonian
    sigma: Evaluator
    sigma_derivative: Evaluator | None
    v1: Potential

    @property
    def epsilons(self) -> tuple[float, float]:
        return self.seeds.epsilons

    @property
    def h1(self) -> DiracHamiltonian:
        return DiracHamiltonian(self.v1)

    def sigma_at(self, x: ArrayLike) -> Array:
        points = np.asarray(x, dtype=np.float64)
        out = self.sigma(as_points(points))
        return out[0] if points.ndim == 0 else out


def apply_L(
    t: DarbouxTransform, psi: SampledField, mode: DerivativeMode = DerivativeMode.ANALYTIC
) -> SampledField:
    """``L psi = psi' + sigma psi``."""
    return apply_first_order(IDENTITY, t.sigma, t.sigma_derivative, psi, mode)


def apply_L_dagger(
    t: DarbouxTransform, psi: SampledField, mode: DerivativeMode = DerivativeMode.ANALYTIC
) -> SampledField:
    """``L^dagger psi = -psi' + sigma^T psi``, the formal adjoint of ``L``."""
    sigma, d_sigma = t.sigma, t.sigma_derivative

    def coefficient(x: Array) -> Array:
        return _transpose(sigma(x))

    derivative: Evaluator | None = None
    if d_sigma is not None:
        slope = d_sigma

        def derivative(x: Array) -> Array:
            return _transpose(slope(x))

    return apply_first_order(-IDENTITY, coefficient, derivative, psi, mode)


def kernel_residual(t: DarbouxTransform, seed: SeedSolution, grid: GridSpec) -> float:
    """``||L u|| / ||u||`` over interior nodes."""
    field = seed.sample(grid)
    image = apply_L(t, field)
    return max_norm(image.values, DerivativeMode.ANALYTIC.margin()) / max_norm(field.values)


def build_transform(
    s1: SeedSolution,
    s2: SeedSolution,
    h0: DiracHamiltonian,
    grid: GridSpec,
    tolerance: float = EIGEN_TOLERANCE,
    kernel_tolerance: float = KERNEL_TOLERANCE,
) -> DarbouxTransform:
    """
    Build the transform for a seed pair and check that ``L`` annihilates both seeds.

    Args:
        tolerance: Bound on the seeds' normalized eigen residual.
        kernel_tolerance: Bound on ``||L u_j|| / ||u_j||``.

    Raises:
        DegenerateSeeds, SeedNotEigen, SingularSeedMatrix: From the seed matrix.
        VerificationFailed: ``L u_j`` exceeds ``kernel_tolerance``.
    """
    seeds = build_seed_matrix(s1, s2, h0, grid, tolerance)
    sigma = sigma_analytic(seeds, h0)
    transform = DarbouxTransform(
        seeds=seeds,
        h0=h0,
        sigma=sigma,
        sigma_derivative=sigma_derivative(h0, sigma),
        v1=partner_potential(seeds, h0),
    )

    for seed in (s1, s2):
        residual = kernel_residual(transform, seed, grid)
        if not residual <= kernel_tolerance:
            raise VerificationFailed(
                f"L does not annihilate seed {seed.label or '?'}: residual {residual:.3e}"
            )
    logger.info(f"Built transform: {transform.v1.descriptor}")
    return transform


def kernel_spinors_h1(u: SeedMatrix) -> tuple[SeedSolution, SeedSolution]:
    """
    Columns of ``(u^T)^-1``, the eigenspinors of ``h1`` at ``eps1`` and ``eps2``.

    With ``W = (u^T)^-1``: ``W' = -W u'^T W`` and
    ``W'' = -W' u'^T W - W u''^T W - W u'^T W'``.
    """

    def kernel(x: Array) -> Array:
        unit, norms = u.normalized(x)
        return mat2_inv(_transpose(unit)) / norms[:, None, :]

    def d_kernel(x: Array) -> Array:
        w = kernel(x)
        return -w @ _transpose(u.derivative(x)) @ w

    def d2_kernel(x: Array) -> Array:
        second = u.second_derivative(x)
        if second is None:
            raise InvalidParams("seed second derivatives are not available")
        w = kernel(x)
        slope = _transpose(u.derivative(x))
        dw = -w @ slope @ w
        return -dw @ slope @ w - w @ _transpose(second) @ w - w @ slope @ dw

    has_second = u.seed1.second_derivative is not None and u.seed2.second_derivative is not None

    def column(j: int) -> SeedSolution:
        return SeedSolution(
            u.epsilons[j],
            lambda x: kernel(x)[:, :, j],
            lambda x: d_kernel(x)[:, :, j],
            (lambda x: d2_kernel(x)[:, :, j]) if has_second else None,
            label=f"w{j + 1}",
        )

    return column(0), column(1)


def transport_seed(t: DarbouxTransform, seed: SeedSolution) -> SeedSolution:
    """
    Image ``L psi`` of an ``h0`` eigenspinor, an ``h1`` eigenspinor at the same energy.

    Raises:
        InvalidParams: The seed lacks a second derivative or ``sigma'`` is unknown.
    """
    if seed.second_derivative is None or t.sigma_derivative is None:
        raise InvalidParams("transporting a seed needs psi'' and sigma'")
    second: Evaluator = seed.second_derivative
    d_sigma: Evaluator = t.sigma_derivative
    sigma = t.sigma

    def value(x: Array) -> Array:
        return seed.derivative(x) + matvec(sigma(x), seed.value(x))

    def derivative(x: Array) -> Array:
        return (
            second(x)
            + matvec(d_sigma(x), seed.value(x))
            + matvec(sigma(x), seed.derivative(x))
        )

    return SeedSolution(seed.energy, value, derivative, label=f"L[{seed.label}]")


def chain(
    t: DarbouxTransform,
    s1: SeedSolution,
    s2: SeedSolution,
    grid: GridSpec | None = None,
    tolerance: float = EIGEN_TOLERANCE,
    kernel_tolerance: float = KERNEL_TOLERANCE,
) -> DarbouxTransform:
    """
    Transform again, starting from ``h1``.

    Raises:
        SeedNotEigen: A seed does not solve ``h1 psi = E psi``.
        SingularSeedMatrix: ``det`` of the new seed matrix vanishes.
    """
    working = grid or t.seeds.grid
    logger.info(f"Chaining from {t.v1.descriptor} with seeds at ({s1.energy!r}, {s2.energy!r})")
    return build_transform(s1, s2, t.h1, working, tolerance, kernel_tolerance)
