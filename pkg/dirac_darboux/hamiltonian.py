"""
One-dimensional stationary Dirac Hamiltonians ``h = J d/dx + v(x)``.

Potentials are closures plus metadata, so a partner potential produced by a
transformation can be evaluated on any grid chosen later. Two built-in models
are provided: the free particle in the ``m * sigma_1`` realization and the
generalized Coulomb problem with vector and scalar ``1/x`` couplings.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike
from scipy.interpolate import CubicSpline

from dirac_darboux.exceptions import DomainMismatch, InvalidParams, ZeroField
from dirac_darboux.matgrid import (
    IDENTITY,
    SIGMA1,
    J,
    Array,
    DerivativeMode,
    Evaluator,
    GridSpec,
    SampledField,
    as_points,
    matvec,
    max_norm,
    symmetric_stack,
)

logger = logging.getLogger(__name__)

# Tolerance when comparing evaluation points against a tabulated support.
SUPPORT_SLACK = 1e-12


class Domain(str, Enum):
    """Where a potential is defined."""

    FULL_LINE = "full_line"
    HALF_LINE = "half_line"


# ============================================================================
# Potentials
# ============================================================================


@dataclass(frozen=True)
class Potential:
    """
    Real symmetric matrix potential ``v(x)``.

    Attributes:
        evaluator: Vectorized ``x -> (n, 2, 2)`` evaluator.
        domain: Full line or half line ``x > 0``.
        descriptor: Human-readable description.
        derivative: Optional exact ``v'(x)`` evaluator.
        support: Optional closed interval outside which evaluation is refused.
    """

    evaluator: Evaluator
    domain: Domain
    descriptor: str
    derivative: Evaluator | None = None
    support: tuple[float, float] | None = None

    def check_points(self, x: Array) -> None:
        """
        Raise if any point lies outside the domain.

        Raises:
            DomainMismatch: Half-line potential at ``x <= 0`` or point off the table support.
        """
        if self.domain is Domain.HALF_LINE and np.any(x <= 0.0):
            raise DomainMismatch(
                f"{self.descriptor} is defined for x > 0 only, got x = {float(np.min(x))!r}"
            )
        if self.support is not None:
            lo, hi = self.support
            if np.any(x < lo - SUPPORT_SLACK) or np.any(x > hi + SUPPORT_SLACK):
                raise DomainMismatch(
                    f"{self.descriptor} is tabulated on [{lo}, {hi}] only"
                )

    def check_grid(self, grid: GridSpec) -> None:
        self.check_points(np.array([grid.x_min, grid.x_max]))

    def __call__(self, x: ArrayLike) -> Array:
        points = np.asarray(x, dtype=np.float64)
        xs = as_points(points)
        self.check_points(xs)
        out = self.evaluator(xs)
        return out[0] if points.ndim == 0 else out

    def diff(self, x: ArrayLike) -> Array:
        """Evaluate ``v'(x)``."""
        if self.derivative is None:
            raise InvalidParams(f"{self.descriptor} has no derivative evaluator")
        points = np.asarray(x, dtype=np.float64)
        xs = as_points(points)
        self.check_points(xs)
        out = self.derivative(xs)
        return out[0] if points.ndim == 0 else out


@dataclass(frozen=True)
class DiracHamiltonian:
    """``h = J d/dx + v(x)`` with a real symmetric potential."""

    potential: Potential

    @property
    def domain(self) -> Domain:
        return self.potential.domain


# ============================================================================
# First-order operators
# ============================================================================


def apply_first_order(
    lead: Array,
    coefficient: Evaluator,
    coefficient_derivative: Evaluator | None,
    psi: SampledField,
    mode: DerivativeMode = DerivativeMode.ANALYTIC,
) -> SampledField:
    """
    Apply ``lead * d/dx + B(x)`` to a spinor field.

    In analytic mode with an exact ``psi'`` the result carries an exact
    evaluator, and an exact derivative as well when ``psi''`` and ``B'`` exist,
    so nested applications stay exact. Otherwise ``psi'`` comes from finite
    differences and the result carries samples only.

    Args:
        lead: Constant 2x2 matrix multiplying the derivative.
        coefficient: ``x -> (n, 2, 2)`` zeroth-order coefficient.
        coefficient_derivative: Optional ``B'(x)`` evaluator.
        psi: Spinor field.
        mode: Derivative mode.
    """
    if not psi.is_spinor:
        raise InvalidParams("first-order operators act on spinor fields")

    if mode is DerivativeMode.ANALYTIC and psi.evaluator is not None and psi.derivative is not None:
        value, first, second = psi.evaluator, psi.derivative, psi.second_derivative

        def evaluator(x: Array) -> Array:
            return matvec(lead, first(x)) + matvec(coefficient(x), value(x))

        derivative: Evaluator | None = None
        if second is not None and coefficient_derivative is not None:
            b_prime = coefficient_derivative
            curvature = second

            def derivative(x: Array) -> Array:
                return (
                    matvec(lead, curvature(x))
                    + matvec(b_prime(x), value(x))
                    + matvec(coefficient(x), first(x))
                )

        return SampledField.from_evaluator(psi.grid, evaluator, derivative)

    nodes = psi.grid.nodes
    values = matvec(lead, psi.derivative_values(mode)) + matvec(coefficient(nodes), psi.values)
    return SampledField(psi.grid, values)


def shifted(potential: Potential, energy: float) -> Evaluator:
    """Evaluator of ``v(x) - energy * I``."""

    def evaluator(x: Array) -> Array:
        return potential(x) - energy * IDENTITY

    return evaluator


def apply_h(
    h: DiracHamiltonian,
    psi: SampledField,
    mode: DerivativeMode = DerivativeMode.ANALYTIC,
    energy: float = 0.0,
) -> SampledField:
    """
    Return ``J psi' + v psi`` (minus ``energy * psi`` when an energy shift is given).

    Raises:
        DomainMismatch: Half-line potential with a grid touching ``x <= 0``.
    """
    h.potential.check_grid(psi.grid)
    coefficient = shifted(h.potential, energy) if energy else h.potential
    return apply_first_order(J, coefficient, h.potential.derivative, psi, mode)


def eigen_residual(
    h: DiracHamiltonian,
    psi: SampledField,
    energy: float,
    mode: DerivativeMode = DerivativeMode.ANALYTIC,
) -> float:
    """
    Normalized eigen residual ``||h psi - E psi|| / ||psi||`` over interior nodes.

    Raises:
        ZeroField: If ``psi`` vanishes identically.
    """
    scale = max_norm(psi.values)
    if scale == 0.0:
        raise ZeroField("cannot normalize a residual by a zero field")
    residual = apply_h(h, psi, mode, energy=energy)
    return max_norm(residual.values, mode.margin()) / scale


# ============================================================================
# Models
# ============================================================================


def free_particle_potential(m: float) -> Potential:
    """
    Free particle in the ``v = m * sigma_1`` realization.

    Raises:
        InvalidParams: If ``m <= 0``.
    """
    if not m > 0:
        raise InvalidParams(f"free particle mass must be positive, got {m}")

    def evaluator(x: Array) -> Array:
        return np.broadcast_to(m * SIGMA1, (x.shape[0], 2, 2)).copy()

    def derivative(x: Array) -> Array:
        return np.zeros((x.shape[0], 2, 2))

    return Potential(evaluator, Domain.FULL_LINE, f"free particle (m={m!r})", derivative)


@dataclass(frozen=True)
class CoulombParams:
    """
    Generalized Coulomb couplings ``V = alpha/x`` (vector) and ``W = beta/x`` (scalar).

    Attributes:
        M: Mass, positive.
        alpha: Vector coupling.
        beta: Scalar coupling.
        k: Angular-momentum parameter.
    """

    M: float
    alpha: float
    beta: float
    k: float

    def __post_init__(self) -> None:
        if not self.M > 0:
            raise InvalidParams(f"Coulomb mass must be positive, got {self.M}")
        if not self.k**2 + self.beta**2 - self.alpha**2 > 0:
            raise InvalidParams("Coulomb parameters need k^2 + beta^2 - alpha^2 > 0")

    @property
    def mu(self) -> float:
        """Power of the small-x behaviour ``x**mu``."""
        return float(np.sqrt(self.k**2 + self.beta**2 - self.alpha**2))

    def describe(self) -> str:
        if self.beta == 0.0 and self.alpha != 0.0:
            kind = "standard Coulomb interaction"
        elif self.alpha == 0.0 and self.beta != 0.0:
            kind = "scalar Coulomb interaction"
        else:
            kind = "generalized Coulomb interaction"
        return f"{kind} (M={self.M!r}, alpha={self.alpha!r}, beta={self.beta!r}, k={self.k!r})"


def coulomb_potential(p: CoulombParams) -> Potential:
    """
    Half-line potential ``v11 = M + (a+b)/x``, ``v22 = -M + (a-b)/x``, ``v12 = k/x``.
    """
    plus = p.alpha + p.beta
    minus = p.alpha - p.beta

    def evaluator(x: Array) -> Array:
        inv = 1.0 / x
        return symmetric_stack(p.M + plus * inv, p.k * inv, -p.M + minus * inv)

    def derivative(x: Array) -> Array:
        inv2 = 1.0 / x**2
        return symmetric_stack(-plus * inv2, -p.k * inv2, -minus * inv2)

    return Potential(evaluator, Domain.HALF_LINE, p.describe(), derivative)


def table_potential(
    x: ArrayLike,
    v11: ArrayLike,
    v12: ArrayLike,
    v22: ArrayLike,
    domain: Domain = Domain.FULL_LINE,
    descriptor: str = "tabulated potential",
) -> Potential:
    """
    Cubic-spline potential through tabulated entries.

    Raises:
        InvalidParams: Fewer than four rows or x not strictly increasing.
    """
    xs = np.asarray(x, dtype=np.float64)
    if xs.shape[0] < 4:
        raise InvalidParams("a tabulated potential needs at least four rows")
    if np.any(np.diff(xs) <= 0):
        raise InvalidParams("tabulated x must be strictly increasing")
    if domain is Domain.HALF_LINE and xs[0] <= 0:
        raise DomainMismatch("half-line table must start at x > 0")

    splines = [CubicSpline(xs, np.asarray(col, dtype=np.float64)) for col in (v11, v12, v22)]
    slopes = [s.derivative() for s in splines]

    def from_splines(parts: list[Callable[[Array], Array]]) -> Evaluator:
        def evaluator(points: Array) -> Array:
            return symmetric_stack(*(part(points) for part in parts))

        return evaluator

    logger.debug(f"Built spline potential on [{xs[0]}, {xs[-1]}] from {xs.shape[0]} rows")
    return Potential(
        from_splines(splines),
        domain,
        descriptor,
        from_splines(slopes),
        support=(float(xs[0]), float(xs[-1])),
    )
