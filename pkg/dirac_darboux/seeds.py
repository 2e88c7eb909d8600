"""
Seed eigenspinors for the built-in models.

Closed-form solutions carry exact first and second derivatives, so every
downstream quantity (sigma, the partner potential, transported spinors) can
be evaluated without finite differences. Arbitrary potentials get seeds from
a fixed-step RK4 shooting integration instead.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from dirac_darboux.exceptions import (
    BranchInvalid,
    IntegrationOverflow,
    InvalidLevel,
    InvalidParams,
    NonConvergence,
)
from dirac_darboux.hamiltonian import CoulombParams, DiracHamiltonian
from dirac_darboux.matgrid import (
    IDENTITY,
    J,
    Array,
    Evaluator,
    GridSpec,
    SampledField,
    as_points,
)

logger = logging.getLogger(__name__)

Sign = Literal["+", "-"]

KUMMER_MAX_TERMS = 10_000
KUMMER_TOLERANCE = 1e-14
ROUND_TRIP_TOLERANCE = 1e-9
# lambda_n below this fraction of M is treated as the degenerate E = +-M level
LAMBDA_FLOOR = 1e-12
ANSATZ_TOLERANCE = 1e-9
OVERFLOW_NORM = 1e150


@dataclass(frozen=True)
class SeedSolution:
    """
    Eigenspinor of a Hamiltonian, not necessarily bounded.

    Attributes:
        energy: Eigenvalue.
        value: ``x -> (n, 2)`` evaluator.
        derivative: Exact first-derivative evaluator.
        second_derivative: Exact second-derivative evaluator, when known.
        bounded: Informational flag, True when the spinor decays at both ends.
        label: Short name used in logs and output tables.
    """

    energy: float
    value: Evaluator
    derivative: Evaluator
    second_derivative: Evaluator | None = None
    bounded: bool = False
    label: str = ""

    def __call__(self, x: ArrayLike) -> Array:
        points = np.asarray(x, dtype=np.float64)
        out = self.value(as_points(points))
        return out[0] if points.ndim == 0 else out

    def sample(self, grid: GridSpec) -> SampledField:
        return SampledField.from_evaluator(
            grid, self.value, self.derivative, self.second_derivative
        )


def _spinor(first: Array, second: Array) -> Array:
    return np.stack([first, second], axis=-1)


def _scaled(factor: float, f: Evaluator) -> Evaluator:
    def evaluator(x: Array) -> Array:
        return factor * f(x)

    return evaluator


# ============================================================================
# Free particle
# ============================================================================


@dataclass(frozen=True)
class FreeSeedParams:
    """
    Parameters of the free-particle seed pair.

    Attributes:
        m: Mass.
        E: Seed energy; the pair sits at ``+E`` and ``-E``.
        c: Shape parameter, ``|c| < k/E`` keeps ``det u`` nodeless.
    """

    m: float
    E: float
    c: float = 0.0

    def __post_init__(self) -> None:
        if not self.m > 0:
            raise InvalidParams(f"free particle mass must be positive, got {self.m}")
        if not 0.0 < self.E < self.m:
            raise InvalidParams(f"free seeds need 0 < E < m, got E={self.E}, m={self.m}")
        if not abs(self.c) < self.k / self.E:
            raise InvalidParams(f"free seeds need |c| < k/E = {self.k / self.E!r}, got {self.c}")

    @property
    def k(self) -> float:
        return math.sqrt(self.m**2 - self.E**2)

    @property
    def two_alpha(self) -> float:
        """Phase shift with ``exp(2 alpha) = sqrt((m-k)/(m+k))``."""
        return math.log((self.m - self.k) / self.E)

    def determinant(self, x: ArrayLike) -> Array:
        """Closed form of ``det u``."""
        xs = np.asarray(x, dtype=np.float64)
        arg = 2.0 * self.k * xs + self.two_alpha
        return (
            self.m + self.E * np.cosh(arg) + (self.E**2 * self.c / self.k) * np.sinh(arg)
        ) / self.E


def free_seed_pair(p: FreeSeedParams) -> tuple[SeedSolution, SeedSolution]:
    """
    Seeds at ``+E`` and ``-E`` for ``v = m sigma_1``.

    ``u1 = (ch kx + b sh kx, ch y + b sh y)`` and ``u2 = (-ch kx, ch y)`` with
    ``y = kx + 2 alpha`` and ``b = cE/k``.
    """
    k, shift, b = p.k, p.two_alpha, p.c * p.E / p.k

    def u1(x: Array) -> Array:
        kx = k * x
        y = kx + shift
        return _spinor(np.cosh(kx) + b * np.sinh(kx), np.cosh(y) + b * np.sinh(y))

    def du1(x: Array) -> Array:
        kx = k * x
        y = kx + shift
        return k * _spinor(np.sinh(kx) + b * np.cosh(kx), np.sinh(y) + b * np.cosh(y))

    def u2(x: Array) -> Array:
        kx = k * x
        return _spinor(-np.cosh(kx), np.cosh(kx + shift))

    def du2(x: Array) -> Array:
        kx = k * x
        return k * _spinor(-np.sinh(kx), np.sinh(kx + shift))

    logger.debug(f"Free seed pair m={p.m}, E={p.E}, c={p.c}: k={k}, 2alpha={shift}")
    return (
        SeedSolution(p.E, u1, du1, _scaled(k * k, u1), label="u1"),
        SeedSolution(-p.E, u2, du2, _scaled(k * k, u2), label="u2"),
    )


def free_exponential_seed(m: float, E: float, growth: int = 1) -> SeedSolution:
    """
    Evanescent free-particle eigenspinor ``exp(s k x) (m + s k, E)`` with ``s = growth``.

    Raises:
        InvalidParams: ``m <= 0``, ``|E| >= m`` or ``growth`` not +-1.
    """
    if not m > 0:
        raise InvalidParams(f"free particle mass must be positive, got {m}")
    if not abs(E) < m:
        raise InvalidParams(f"evanescent free states need |E| < m, got E={E}")
    if growth not in (1, -1):
        raise InvalidParams(f"growth must be +1 or -1, got {growth}")
    rate = growth * math.sqrt(m * m - E * E)
    top = m + rate

    def value(x: Array) -> Array:
        g = np.exp(rate * x)
        return _spinor(top * g, E * g)

    return SeedSolution(
        E,
        value,
        _scaled(rate, value),
        _scaled(rate * rate, value),
        label=f"exp{'+' if growth > 0 else '-'}(E={E!r})",
    )


# ============================================================================
# Confluent hypergeometric function
# ============================================================================


def _nonpositive_integer(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def kummer(a: float, b: float, z: ArrayLike) -> Array:
    """
    Kummer's function 1F1(a; b; z).

    A non-positive integer ``a = -n`` gives the exact degree-n polynomial;
    otherwise the power series is summed to relative tolerance 1e-14.

    Raises:
        InvalidParams: ``b`` is a non-positive integer.
        NonConvergence: The series needs more than 10^4 terms.
    """
    if _nonpositive_integer(b):
        raise InvalidParams(f"1F1 is undefined for b = {b}")
    zs = np.asarray(z, dtype=np.float64)
    term = np.ones_like(zs)
    total = np.ones_like(zs)

    if _nonpositive_integer(a):
        for j in range(int(-a)):
            term = term * (a + j) / (b + j) * zs / (j + 1)
            total = total + term
        return total

    for j in range(KUMMER_MAX_TERMS):
        term = term * (a + j) / (b + j) * zs / (j + 1)
        total = total + term
        if np.all(np.abs(term) <= KUMMER_TOLERANCE * np.abs(total)):
            return total
    raise NonConvergence(f"1F1({a}; {b}; z) did not converge in {KUMMER_MAX_TERMS} terms")


def kummer_derivative(a: float, b: float, z: ArrayLike, order: int = 1) -> Array:
    """``d^order/dz^order 1F1(a; b; z)`` via ``(a)_j / (b)_j * 1F1(a+j; b+j; z)``."""
    coefficient = 1.0
    for j in range(order):
        coefficient *= (a + j) / (b + j)
    if coefficient == 0.0:
        return np.zeros_like(np.asarray(z, dtype=np.float64))
    return coefficient * kummer(a + order, b + order, z)


# ============================================================================
# Coulomb levels
# ============================================================================


@dataclass(frozen=True)
class CoulombLevel:
    """
    One solution of the energy formula.

    Attributes:
        params: Model couplings.
        n: Level index.
        sign: Branch of the energy formula.
        mu: ``sqrt(k^2 + beta^2 - alpha^2)``.
        lam: Decay rate ``sqrt(M^2 - E^2)``; 0 for the degenerate ``E = +-M`` level.
        energy: Level energy.
        round_trip: ``|n_recovered - n|``, NaN when ``lam == 0``.
    """

    params: CoulombParams
    n: int
    sign: Sign
    mu: float
    lam: float
    energy: float
    round_trip: float

    @property
    def degenerate(self) -> bool:
        return self.lam == 0.0

    @property
    def valid(self) -> bool:
        return self.degenerate or self.round_trip <= ROUND_TRIP_TOLERANCE


def _sign_value(sign: str) -> float:
    if sign == "+":
        return 1.0
    if sign in ("-", "−"):
        return -1.0
    raise InvalidParams(f"branch sign must be '+' or '-', got {sign!r}")


def coulomb_energy(p: CoulombParams, n: int, sign: str, strict: bool = True) -> CoulombLevel:
    """
    Energy of level ``n`` on the chosen branch, with the index round-trip check.

    Args:
        p: Model couplings.
        n: Non-negative level index.
        sign: ``"+"`` or ``"-"``.
        strict: Raise on an inconsistent branch instead of flagging it.

    Raises:
        InvalidParams: Negative ``n`` or negative discriminant.
        BranchInvalid: ``strict`` and the round-trip misses ``n`` by more than 1e-9.
    """
    if n < 0 or int(n) != n:
        raise InvalidParams(f"level index must be a non-negative integer, got {n}")
    s = _sign_value(sign)
    mu = p.mu
    nm = n + mu
    disc = p.alpha**2 + nm**2 - p.beta**2
    if disc < 0:
        raise InvalidParams(f"level n={n} has a negative discriminant {disc!r}")

    energy = p.M * (-p.alpha * p.beta + s * nm * math.sqrt(disc)) / (p.alpha**2 + nm**2)
    lam = math.sqrt(max(p.M**2 - energy**2, 0.0))
    if lam <= LAMBDA_FLOOR * p.M:
        lam = 0.0

    round_trip = math.nan
    if lam > 0.0:
        recovered = -(p.alpha * energy + p.beta * p.M) / lam - mu
        round_trip = abs(recovered - n)
        if strict and round_trip > ROUND_TRIP_TOLERANCE:
            raise BranchInvalid(
                f"branch {sign!r} of level n={n} recovers n={recovered!r} (E={energy!r})"
            )
    else:
        logger.debug(f"Level n={n} branch {sign!r} is degenerate (E={energy!r}); no round trip")

    return CoulombLevel(p, int(n), "+" if s > 0 else "-", mu, lam, energy, round_trip)


def _power_exp_jet(
    mu: float,
    lam: float,
    polynomial: Callable[[Array], tuple[Array, Array, Array]],
) -> tuple[Evaluator, Evaluator, Evaluator]:
    """Value and two derivatives of ``x**mu exp(-lam x) P(x)`` for a spinor polynomial P."""

    def jet(x: Array) -> tuple[Array, Array, Array]:
        p0, p1, p2 = polynomial(x)
        g = (x**mu * np.exp(-lam * x))[:, None]
        r = (mu / x - lam)[:, None]
        value = g * p0
        first = g * (r * p0 + p1)
        second = g * ((r * r - (mu / x**2)[:, None]) * p0 + 2.0 * r * p1 + p2)
        return value, first, second

    return (lambda x: jet(x)[0]), (lambda x: jet(x)[1]), (lambda x: jet(x)[2])


def coulomb_solution(level: CoulombLevel) -> SeedSolution:
    """
    Closed-form Coulomb eigenspinor built from truncated Kummer polynomials.

    Raises:
        InvalidLevel: The level is degenerate (``lam == 0``); use the simplified seed pair.
    """
    if level.degenerate:
        raise InvalidLevel(
            f"level n={level.n} has lam = 0; use coulomb_seed_pair_simplified for it"
        )
    p = level.params
    n, mu, lam, energy = level.n, level.mu, level.lam, level.energy
    shape = -p.k + (p.alpha * p.M + p.beta * energy) / lam
    b = 2.0 * mu + 1.0
    ratio = -lam / (p.M + energy)
    dz = 2.0 * lam

    def polynomial(x: Array) -> tuple[Array, Array, Array]:
        z = dz * x
        low = [shape * kummer(-n, b, z), shape * dz * kummer_derivative(-n, b, z)]
        low.append(shape * dz * dz * kummer_derivative(-n, b, z, order=2))
        if n > 0:
            high = [-n * kummer(1 - n, b, z), -n * dz * kummer_derivative(1 - n, b, z)]
            high.append(-n * dz * dz * kummer_derivative(1 - n, b, z, order=2))
        else:
            high = [np.zeros_like(z)] * 3
        return tuple(  # type: ignore[return-value]
            _spinor(hi - lo, ratio * (hi + lo)) for hi, lo in zip(high, low, strict=True)
        )

    value, first, second = _power_exp_jet(mu, lam, polynomial)
    logger.debug(f"Coulomb solution n={n} ({level.sign}) at E={energy!r}, lam={lam!r}")
    return SeedSolution(energy, value, first, second, bounded=True, label=f"n={n}{level.sign}")


# ============================================================================
# Simplified seed pair (levels 0 and 1)
# ============================================================================


@dataclass(frozen=True)
class CoulombSeedConstants:
    """
    Constants of the simplified level-0/level-1 seed pair.

    ``c3`` itself is never formed; only the product ``c1c3`` is stored so the
    pair stays finite when ``c1 = 0``.
    """

    lambda0: float
    lambda1: float
    c1: float
    c2: float
    c1c3: float
    E0: float
    E1: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.lambda0, self.lambda1, self.c1, self.c2, self.c1c3, self.E0, self.E1)


def coulomb_seed_constants(
    p: CoulombParams, sign0: str = "+", sign1: str = "-"
) -> CoulombSeedConstants:
    """
    Constants of the level-0/level-1 pair, validated against the radial system.

    Raises:
        InvalidParams: A branch is inconsistent or the two-term ansatz does not solve
            the eigen-equation for these couplings.
    """
    try:
        level0 = coulomb_energy(p, 0, sign0)
        level1 = coulomb_energy(p, 1, sign1)
    except BranchInvalid as e:
        raise InvalidParams(f"simplified seed pair unavailable: {e}") from e

    mu, M, k = p.mu, p.M, p.k
    if p.alpha != p.beta:
        c1 = (mu - k) / (p.alpha - p.beta)
    elif mu + k != 0.0:
        c1 = -(p.alpha + p.beta) / (mu + k)
    else:
        raise InvalidParams("c1 is undetermined for alpha = beta with mu + k = 0")

    E0, lam0 = level0.energy, level0.lam
    E1, lam1 = level1.energy, level1.lam
    c2 = (lam1 + (E1 + M) * c1) / (1.0 + 2.0 * mu)
    q = (c1 * lam1 + M - E1) / (1.0 + 2.0 * mu)

    plus, minus = p.alpha + p.beta, p.alpha - p.beta
    residuals = {
        "level 0 upper": M - c1 * lam0 - E0,
        "level 0 lower": lam0 - c1 * (E0 + M),
        "1/x upper": (mu + k) * c1 + plus,
        "1/x lower": k - mu + minus * c1,
        "level 1 upper": -mu * q - lam1 * c1 - q + M - plus * c2 - k * q - E1,
        "level 1 lower": mu * c2 + lam1 + c2 - k * c2 - M * c1 - minus * q - E1 * c1,
        "level 1 slope upper": lam1 * q - (M - E1) * c2,
        "level 1 slope lower": lam1 * c2 - (M + E1) * q,
    }
    tolerance = ANSATZ_TOLERANCE * max(1.0, M, abs(p.alpha), abs(p.beta), abs(k))
    failed = {name: r for name, r in residuals.items() if not abs(r) <= tolerance}
    if failed:
        raise InvalidParams(f"two-term seed ansatz does not hold for {p.describe()}: {failed}")

    return CoulombSeedConstants(lam0, lam1, c1, c2, q, E0, E1)


def coulomb_seed_pair_simplified(
    p: CoulombParams, sign0: str = "+", sign1: str = "-"
) -> tuple[SeedSolution, SeedSolution]:
    """
    Level-0 and level-1 seeds in the two-term form.

    ``u1 = x^mu e^{-lam0 x} (1, c1)`` and
    ``u2 = x^mu e^{-lam1 x} (1 - c2 x, c1 - c1c3 x)``.
    """
    const = coulomb_seed_constants(p, sign0, sign1)
    mu = p.mu
    c1, c2, q = const.c1, const.c2, const.c1c3

    def flat(x: Array) -> tuple[Array, Array, Array]:
        ones = np.ones_like(x)
        zeros = np.zeros((x.shape[0], 2))
        return _spinor(ones, c1 * ones), zeros, zeros

    def linear(x: Array) -> tuple[Array, Array, Array]:
        ones = np.ones_like(x)
        zeros = np.zeros((x.shape[0], 2))
        return _spinor(1.0 - c2 * x, c1 - q * x), _spinor(-c2 * ones, -q * ones), zeros

    v0, d0, s0 = _power_exp_jet(mu, const.lambda0, flat)
    v1, d1, s1 = _power_exp_jet(mu, const.lambda1, linear)
    logger.info(
        f"Simplified Coulomb seeds: E0={const.E0!r}, E1={const.E1!r}, "
        f"c1={c1!r}, c2={c2!r}, c1c3={q!r}"
    )
    return (
        SeedSolution(const.E0, v0, d0, s0, bounded=const.lambda0 > 0, label="n=0"),
        SeedSolution(const.E1, v1, d1, s1, bounded=const.lambda1 > 0, label="n=1"),
    )


# ============================================================================
# Shooting
# ============================================================================


def shooting_solve(
    h: DiracHamiltonian, E: float, psi0: ArrayLike, grid: GridSpec
) -> SampledField:
    """
    Integrate ``psi' = -J (E - v) psi`` from ``x_min`` with classical RK4.

    The step is the grid spacing; ``v`` is evaluated at nodes and midpoints.

    Raises:
        DomainMismatch: Grid outside the potential's domain.
        IntegrationOverflow: ``||psi||`` exceeds 1e150.
    """
    h.potential.check_grid(grid)
    x = grid.nodes
    step = grid.spacing
    midpoints = x[:-1] + 0.5 * step

    def system(points: Array) -> list[list[list[float]]]:
        rates: list[list[list[float]]] = np.matmul(-J, E * IDENTITY - h.potential(points)).tolist()
        return rates

    at_nodes = system(x)
    at_mid = system(midpoints)

    y0, y1 = (float(c) for c in np.asarray(psi0, dtype=np.float64))
    out = np.empty((grid.n_points, 2))
    out[0] = (y0, y1)
    half = 0.5 * step
    sixth = step / 6.0
    for i in range(grid.n_points - 1):
        (a00, a01), (a10, a11) = at_nodes[i]
        (m00, m01), (m10, m11) = at_mid[i]
        (b00, b01), (b10, b11) = at_nodes[i + 1]

        k10 = a00 * y0 + a01 * y1
        k11 = a10 * y0 + a11 * y1
        t0, t1 = y0 + half * k10, y1 + half * k11
        k20 = m00 * t0 + m01 * t1
        k21 = m10 * t0 + m11 * t1
        t0, t1 = y0 + half * k20, y1 + half * k21
        k30 = m00 * t0 + m01 * t1
        k31 = m10 * t0 + m11 * t1
        t0, t1 = y0 + step * k30, y1 + step * k31
        k40 = b00 * t0 + b01 * t1
        k41 = b10 * t0 + b11 * t1

        y0 += sixth * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
        y1 += sixth * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        norm = math.hypot(y0, y1)
        if not norm <= OVERFLOW_NORM:
            raise IntegrationOverflow(
                f"shooting at E={E!r} blew up near x={x[i + 1]!r} (|psi| = {norm!r})"
            )
        out[i + 1] = (y0, y1)

    return SampledField(grid, out)


def seed_from_samples(field: SampledField, energy: float, label: str = "") -> SeedSolution:
    """Wrap a sampled eigenspinor as a seed through cubic-spline interpolation."""
    spline = CubicSpline(field.grid.nodes, field.values, axis=0)
    first = spline.derivative()
    second = spline.derivative(2)
    return SeedSolution(
        energy,
        lambda x: np.asarray(spline(x)),
        lambda x: np.asarray(first(x)),
        lambda x: np.asarray(second(x)),
        label=label or f"shot(E={energy!r})",
    )


def l2_norm(field: SampledField) -> float:
    """Trapezoid estimate of ``sqrt(int |psi|^2 dx)`` over the field's grid."""
    density = np.sum(field.values**2, axis=1)
    return float(math.sqrt(trapezoid(density, field.grid.nodes)))
