"""
Pinned golden comparisons behind ``dirac-darboux reproduce``.

Each item runs the full pipeline (seeds, seed matrix, sigma, partner
potential) and compares against a closed form on a fixed grid.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from dirac_darboux.darboux import DarbouxTransform, apply_L, build_transform
from dirac_darboux.hamiltonian import (
    CoulombParams,
    DiracHamiltonian,
    coulomb_potential,
    eigen_residual,
    free_particle_potential,
)
from dirac_darboux.matgrid import SIGMA1, SIGMA3, Array, GridSpec, symmetric_stack
from dirac_darboux.seeds import (
    FreeSeedParams,
    coulomb_energy,
    coulomb_seed_constants,
    coulomb_seed_pair_simplified,
    coulomb_solution,
    free_seed_pair,
)

logger = logging.getLogger(__name__)

FLAGSHIP = CoulombParams(M=1.0, alpha=1.0, beta=-1.0, k=1.0)
FREE_GRID = GridSpec(-10.0, 10.0, 2001)
COULOMB_GRID = GridSpec(0.1, 20.0, 2001)
FREE_MIXINGS = (0.0, 0.3)


@dataclass(frozen=True)
class GoldenResult:
    """Max deviation of one golden comparison against its tolerance."""

    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.deviation)) and self.deviation <= self.tolerance

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name:<9} max deviation {self.deviation:.3e} "
            f"(tolerance {self.tolerance:.0e}) {verdict}"
        )


# ============================================================================
# Closed forms
# ============================================================================


def free_partner_closed_form(p: FreeSeedParams, x: Array) -> Array:
    """``(2E^2 c/D) sigma_3 + (m - 2k^2/D) sigma_1`` with ``D = m + E ch + (E^2 c/k) sh``."""
    arg = 2.0 * p.k * x + p.two_alpha
    delta = p.m + p.E * np.cosh(arg) + (p.E**2 * p.c / p.k) * np.sinh(arg)
    diag = 2.0 * p.E**2 * p.c / delta
    return symmetric_stack(diag, p.m - 2.0 * p.k**2 / delta, -diag)


def flagship_partner_closed_form(x: Array, M: float = 1.0) -> Array:
    inv = 1.0 / x
    return (
        inv[:, None, None] * np.eye(2)
        + (3.0 * M / 5.0 + inv)[:, None, None] * SIGMA3
        + (2.0 * inv - 4.0 * M / 5.0)[:, None, None] * SIGMA1
    )


def flagship_sigma_closed_form(x: Array, M: float = 1.0) -> Array:
    inv = 1.0 / x
    out = np.zeros((x.shape[0], 2, 2))
    out[:, 0, 0] = -inv
    out[:, 0, 1] = 2.0 * M / 5.0 - 2.0 * inv
    out[:, 1, 1] = 4.0 * M / 5.0 - 2.0 * inv
    return out


def flagship_level2_closed_form(x: Array, M: float = 1.0) -> Array:
    g = -2.0 / 25.0 * np.exp(-3.0 * M * x / 5.0)
    return np.stack(
        [
            g * (50.0 * x - 30.0 * M * x**2 + 3.0 * M**2 * x**3),
            g * 3.0 * (-10.0 * M * x**2 + 3.0 * M**2 * x**3),
        ],
        axis=-1,
    )


def flagship_transported_closed_form(x: Array, M: float = 1.0) -> Array:
    g = -6.0 / 125.0 * np.exp(-3.0 * M * x / 5.0) * M**2 * x**2
    return np.stack([g * (-10.0 + 3.0 * M * x), g * (5.0 + 3.0 * M * x)], axis=-1)


def reseeded_partner_closed_form(x: Array, M: float = 1.0) -> Array:
    """Partner of the flagship model from the level-1 and level-2 seeds."""
    denom = 50.0 * x - 15.0 * M * x**2 + 12.0 * M**2 * x**3
    a11 = 100.0 + 90.0 * M * x - 60.0 * M**2 * x**2
    a12 = 100.0 - 115.0 * M * x - 27.0 * M**2 * x**2 + 12.0 * M**3 * x**3
    a22 = -120.0 * M * x + 84.0 * M**2 * x**2
    return symmetric_stack(a11 / denom, a12 / denom, a22 / denom)


# ============================================================================
# Comparisons
# ============================================================================


def _deviation(a: Array, b: Array) -> float:
    return float(np.max(np.abs(a - b)))


def _flagship_transform() -> DarbouxTransform:
    h0 = DiracHamiltonian(coulomb_potential(FLAGSHIP))
    s1, s2 = coulomb_seed_pair_simplified(FLAGSHIP)
    return build_transform(s1, s2, h0, COULOMB_GRID)


def golden_free_partner() -> GoldenResult:
    x = FREE_GRID.nodes
    worst = 0.0
    for c in FREE_MIXINGS:
        p = FreeSeedParams(m=1.0, E=0.6, c=c)
        s1, s2 = free_seed_pair(p)
        t = build_transform(s1, s2, DiracHamiltonian(free_particle_potential(p.m)), FREE_GRID)
        worst = max(worst, _deviation(t.v1(x), free_partner_closed_form(p, x)))
    return GoldenResult("eq40", worst, 1e-10)


def golden_coulomb_constants() -> GoldenResult:
    const = coulomb_seed_constants(FLAGSHIP)
    expected = (0.0, 4.0 / 5.0, 0.0, 4.0 / 15.0, 8.0 / 15.0, 1.0, -3.0 / 5.0)
    deviation = max(abs(a - b) for a, b in zip(const.as_tuple(), expected, strict=True))
    return GoldenResult("eq58-59", deviation, 1e-12)


def golden_flagship_partner() -> GoldenResult:
    x = COULOMB_GRID.nodes
    t = _flagship_transform()
    return GoldenResult("eq60", _deviation(t.v1(x), flagship_partner_closed_form(x)), 1e-10)


def golden_flagship_sigma() -> GoldenResult:
    x = COULOMB_GRID.nodes
    t = _flagship_transform()
    return GoldenResult("eq61", _deviation(t.sigma_at(x), flagship_sigma_closed_form(x)), 1e-10)


def golden_transported_level() -> GoldenResult:
    x = COULOMB_GRID.nodes
    t = _flagship_transform()
    level = coulomb_solution(coulomb_energy(FLAGSHIP, 2, "-"))
    field = level.sample(COULOMB_GRID)
    image = apply_L(t, field)
    deviation = max(
        _deviation(field.values, flagship_level2_closed_form(x)),
        _deviation(image.values, flagship_transported_closed_form(x)),
        eigen_residual(t.h1, image, level.energy),
    )
    return GoldenResult("eq62", deviation, 1e-8)


def golden_reseeded_partner() -> GoldenResult:
    x = COULOMB_GRID.nodes
    h0 = DiracHamiltonian(coulomb_potential(FLAGSHIP))
    s1, s2 = (coulomb_solution(coulomb_energy(FLAGSHIP, n, "-")) for n in (1, 2))
    t = build_transform(s1, s2, h0, COULOMB_GRID)
    return GoldenResult("eq64", _deviation(t.v1(x), reseeded_partner_closed_form(x)), 1e-8)


GOLDEN: dict[str, Callable[[], GoldenResult]] = {
    "eq40": golden_free_partner,
    "eq58-59": golden_coulomb_constants,
    "eq60": golden_flagship_partner,
    "eq61": golden_flagship_sigma,
    "eq62": golden_transported_level,
    "eq64": golden_reseeded_partner,
}


def run_golden(which: str = "all") -> list[GoldenResult]:
    """Run one named comparison, or every comparison for ``"all"``."""
    names = list(GOLDEN) if which == "all" else [which]
    results = []
    for name in names:
        result = GOLDEN[name]()
        logger.info(result.line())
        results.append(result)
    return results
