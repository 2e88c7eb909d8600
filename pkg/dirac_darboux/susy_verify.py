"""
Numerical certification of the quadratic supersymmetry of a transform.

For ``H = diag(h0, h1)`` and the nilpotent supercharge ``Q`` whose only
non-zero block is ``L`` (bottom-left), the checks measure

* intertwining ``L h0 = h1 L`` and ``L^dagger h1 = h0 L^dagger``,
* factorization ``L^dagger L = (h0 - eps1)(h0 - eps2)`` and
  ``L L^dagger = (h1 - eps1)(h1 - eps2)``,
* the block relations ``[Q, H] = [Q^dagger, H] = 0`` and
  ``{Q, Q^dagger} = (H - eps1)(H - eps2)``,
* the kernels ``L u_j = 0`` and ``L^dagger w_j = 0``.

``Q^2 = 0`` holds by the block layout and is reported as structural.
Second-order compositions are nested first-order applications.
"""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import orjson
from scipy.integrate import trapezoid

from dirac_darboux.config import NumericsConfig
from dirac_darboux.darboux import (
    DarbouxTransform,
    apply_L,
    apply_L_dagger,
    kernel_spinors_h1,
)
from dirac_darboux.exceptions import EmptyTestSet, InvalidParams, ZeroField
from dirac_darboux.hamiltonian import DiracHamiltonian, apply_h
from dirac_darboux.matgrid import Array, DerivativeMode, GridSpec, SampledField, max_norm
from dirac_darboux.seeds import SeedSolution, shooting_solve

logger = logging.getLogger(__name__)

CHECK_NAMES = ("intertwining", "factorization", "superalgebra", "kernel", "nilpotency")

# Test energies for shooting eigenstates, as offsets from the midpoint of
# (eps1, eps2) in units of the gap; none coincides with a seed energy.
SHOOTING_OFFSETS = (-0.2, 0.1, 0.3)


# ============================================================================
# Data model
# ============================================================================


@dataclass(frozen=True)
class SuperPair:
    """
    Partner Hamiltonians ``h0, h1`` joined by a transform.

    Build with :meth:`from_transform`; the constructor itself does not check
    that ``h1`` is the transform's partner, so deliberately corrupted pairs can
    be assembled for sensitivity tests.
    """

    h0: DiracHamiltonian
    h1: DiracHamiltonian
    transform: DarbouxTransform

    @classmethod
    def from_transform(cls, transform: DarbouxTransform) -> "SuperPair":
        pair = cls(transform.h0, transform.h1, transform)
        if pair.h1.potential is not transform.v1:
            raise InvalidParams("h1 must use the transform's partner potential")
        return pair

    @property
    def epsilons(self) -> tuple[float, float]:
        return self.transform.epsilons


@dataclass(frozen=True)
class CheckResult:
    """
    Outcome of one identity check.

    Attributes:
        name: Check name.
        value: Max normalized residual over all components.
        components: Residual per sub-identity.
        structural: True when the identity holds by construction.
    """

    name: str
    value: float
    components: dict[str, float] = field(default_factory=dict)
    structural: bool = False


@dataclass(frozen=True)
class ResidualReport:
    """Residuals of every check for one pair, grid and derivative mode."""

    checks: dict[str, CheckResult]
    grid: GridSpec
    mode: DerivativeMode

    @property
    def max_residual(self) -> float:
        values = [c.value for c in self.checks.values() if not c.structural]
        return max(values) if values else 0.0

    def passed(self, threshold: float) -> bool:
        return all(
            np.isfinite(c.value) and c.value <= threshold for c in self.checks.values()
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "grid": {
                "x_min": self.grid.x_min,
                "x_max": self.grid.x_max,
                "n_points": self.grid.n_points,
            },
            "mode": self.mode.value,
            "checks": {
                name: {
                    "value": check.value,
                    "structural": check.structural,
                    "components": dict(check.components),
                }
                for name, check in self.checks.items()
            },
        }

    def to_text(self) -> str:
        """``check.component = value`` lines, one key per line."""
        lines = [f"report.grid = {self.grid}", f"report.mode = {self.mode.value}"]
        for name, check in self.checks.items():
            lines.append(f"{name}.value = {check.value:.17g}")
            if check.structural:
                lines.append(f"{name}.structural = true")
            for component, value in check.components.items():
                lines.append(f"{name}.{component} = {value:.17g}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> bytes:
        return orjson.dumps(self.to_dict(), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)


# ============================================================================
# Operators
# ============================================================================

Operator = Callable[[SampledField], SampledField]


def _norm(psi: SampledField) -> float:
    scale = max_norm(psi.values)
    if scale == 0.0:
        raise ZeroField("test field vanishes identically")
    return scale


def _operators(p: SuperPair, mode: DerivativeMode) -> dict[str, Operator]:
    t = p.transform
    eps1, eps2 = p.epsilons
    return {
        "L": lambda psi: apply_L(t, psi, mode),
        "Ld": lambda psi: apply_L_dagger(t, psi, mode),
        "h0": lambda psi: apply_h(p.h0, psi, mode),
        "h1": lambda psi: apply_h(p.h1, psi, mode),
        "h0-e1": lambda psi: apply_h(p.h0, psi, mode, energy=eps1),
        "h0-e2": lambda psi: apply_h(p.h0, psi, mode, energy=eps2),
        "h1-e1": lambda psi: apply_h(p.h1, psi, mode, energy=eps1),
        "h1-e2": lambda psi: apply_h(p.h1, psi, mode, energy=eps2),
    }


def _difference(
    first: tuple[Operator, Operator],
    second: tuple[Operator, Operator],
    psi: SampledField,
    margin: int,
) -> float:
    """Normalized ``||A1 A2 psi - B1 B2 psi||`` (operators applied right to left)."""
    left = first[0](first[1](psi))
    right = second[0](second[1](psi))
    return max_norm(left.values - right.values, margin) / _norm(psi)


def _require(testset: Sequence[object]) -> None:
    if not testset:
        raise EmptyTestSet("verification needs at least one test field")


# ============================================================================
# Checks
# ============================================================================


def check_intertwining(
    p: SuperPair,
    testset: Sequence[SampledField],
    mode: DerivativeMode = DerivativeMode.ANALYTIC,
) -> CheckResult:
    """Max of ``||(L h0 - h1 L) psi||`` and ``||(L^dagger h1 - h0 L^dagger) psi||``."""
    _require(testset)
    ops = _operators(p, mode)
    margin = mode.margin(depth=2)
    forward = max(
        _difference((ops["L"], ops["h0"]), (ops["h1"], ops["L"]), psi, margin) for psi in testset
    )
    adjoint = max(
        _difference((ops["Ld"], ops["h1"]), (ops["h0"], ops["Ld"]), psi, margin)
        for psi in testset
    )
    return CheckResult(
        "intertwining", max(forward, adjoint), {"forward": forward, "adjoint": adjoint}
    )


def check_factorization(
    p: SuperPair,
    testset: Sequence[SampledField],
    mode: DerivativeMode = DerivativeMode.ANALYTIC,
) -> CheckResult:
    """Residuals of ``L^dagger L = (h0-e1)(h0-e2)`` and ``L L^dagger = (h1-e1)(h1-e2)``."""
    _require(testset)
    ops = _operators(p, mode)
    margin = mode.margin(depth=2)
    lower = max(
        _difference((ops["Ld"], ops["L"]), (ops["h0-e1"], ops["h0-e2"]), psi, margin)
        for psi in testset
    )
    upper = max(
        _difference((ops["L"], ops["Ld"]), (ops["h1-e1"], ops["h1-e2"]), psi, margin)
        for psi in testset
    )
    return CheckResult("factorization", max(lower, upper), {"h0": lower, "h1": upper})


def check_superalgebra(
    p: SuperPair,
    testset4: Sequence[tuple[SampledField, SampledField]],
    mode: DerivativeMode = DerivativeMode.ANALYTIC,
) -> CheckResult:
    """
    Block relations on four-component test elements ``(top, bottom)``.

    ``[Q, H](t, b) = (0, (L h0 - h1 L) t)``,
    ``[Q^dagger, H](t, b) = ((L^dagger h1 - h0 L^dagger) b, 0)`` and
    ``{Q, Q^dagger}(t, b) = (L^dagger L t, L L^dagger b)``. Each block residual
    is normalized by the block it acts on.
    """
    _require(testset4)
    ops = _operators(p, mode)
    margin = mode.margin(depth=2)
    q_h = 0.0
    qd_h = 0.0
    anti = 0.0
    for top, bottom in testset4:
        q_h = max(q_h, _difference((ops["L"], ops["h0"]), (ops["h1"], ops["L"]), top, margin))
        qd_h = max(
            qd_h, _difference((ops["Ld"], ops["h1"]), (ops["h0"], ops["Ld"]), bottom, margin)
        )
        anti = max(
            anti,
            _difference((ops["Ld"], ops["L"]), (ops["h0-e1"], ops["h0-e2"]), top, margin),
            _difference((ops["L"], ops["Ld"]), (ops["h1-e1"], ops["h1-e2"]), bottom, margin),
        )
    return CheckResult(
        "superalgebra",
        max(q_h, qd_h, anti),
        {"commutator_q": q_h, "commutator_qdag": qd_h, "anticommutator": anti},
    )


def check_kernel(
    p: SuperPair,
    grid: GridSpec,
    mode: DerivativeMode = DerivativeMode.ANALYTIC,
) -> CheckResult:
    """``||L u_j|| / ||u_j||`` and ``||L^dagger w_j|| / ||w_j||`` for both seeds."""
    t = p.transform
    margin = mode.margin()
    seeds = t.seeds
    forward = max(
        max_norm(apply_L(t, f, mode).values, margin) / _norm(f)
        for f in (seeds.seed1.sample(grid), seeds.seed2.sample(grid))
    )
    adjoint = max(
        max_norm(apply_L_dagger(t, f, mode).values, margin) / _norm(f)
        for f in (w.sample(grid) for w in kernel_spinors_h1(seeds))
    )
    return CheckResult("kernel", max(forward, adjoint), {"L": forward, "L_dagger": adjoint})


def check_nilpotency() -> CheckResult:
    """``Q^2 = (Q^dagger)^2 = 0``: a strictly triangular block squares to zero."""
    return CheckResult("nilpotency", 0.0, structural=True)


def inner_product(phi: SampledField, psi: SampledField) -> float:
    """Trapezoid estimate of ``int phi^T psi dx``."""
    return float(trapezoid(np.sum(phi.values * psi.values, axis=1), phi.grid.nodes))


# ============================================================================
# Test sets
# ============================================================================


def random_smooth_fields(grid: GridSpec, count: int, seed: int) -> list[SampledField]:
    """
    Deterministic polynomial-times-Gaussian spinor fields with exact derivatives.

    Each component is ``P(s) exp(-s^2)`` with ``s = (x - centre)/width`` and a
    random cubic ``P``.
    """
    rng = np.random.default_rng(seed)
    centre = 0.5 * (grid.x_min + grid.x_max)
    width = (grid.x_max - grid.x_min) / 6.0
    fields = []
    for _ in range(count):
        coeffs = rng.uniform(-1.0, 1.0, size=(2, 4))
        polys = [np.polynomial.Polynomial(c) for c in coeffs]
        # d/ds [P e^{-s^2}] = (P' - 2 s P) e^{-s^2}
        s_poly = np.polynomial.Polynomial([0.0, 1.0])
        firsts = [p.deriv() - 2.0 * s_poly * p for p in polys]
        seconds = [q.deriv() - 2.0 * s_poly * q for q in firsts]

        def make(parts: list[np.polynomial.Polynomial], scale: float) -> Callable[[Array], Array]:
            def evaluator(x: Array) -> Array:
                s = (x - centre) / width
                g = np.exp(-s * s)
                return scale * np.stack([parts[0](s) * g, parts[1](s) * g], axis=-1)

            return evaluator

        fields.append(
            SampledField.from_evaluator(
                grid, make(polys, 1.0), make(firsts, 1.0 / width), make(seconds, 1.0 / width**2)
            )
        )
    return fields


def shooting_energies(p: SuperPair) -> list[float]:
    eps1, eps2 = p.epsilons
    mid = 0.5 * (eps1 + eps2)
    gap = abs(eps1 - eps2)
    return [mid + offset * gap for offset in SHOOTING_OFFSETS]


def generate_testset(
    p: SuperPair,
    grid: GridSpec,
    energies: Sequence[float] | None = None,
    numerics: NumericsConfig | None = None,
    references: Sequence[SeedSolution] | None = None,
) -> list[SampledField]:
    """
    Standard test fields: both seeds, both kernel spinors of ``h1``, shooting
    eigenstates of ``h0`` at three energies and the random smooth fields.

    Args:
        p: Pair under test.
        grid: Working grid.
        energies: Shooting energies; defaults to points between the seed energies.
        numerics: Supplies the random seed and field count.
        references: Known eigenspinors of ``h0``; when given, one shooting run starts
            from each reference value at ``x_min`` at the reference energy, replacing
            ``energies``. Use them where a generic start would pick up a singular
            solution, as at the origin of a half-line problem.
    """
    numerics = numerics or NumericsConfig()
    seeds = p.transform.seeds
    fields = [seeds.seed1.sample(grid), seeds.seed2.sample(grid)]
    fields.extend(w.sample(grid) for w in kernel_spinors_h1(seeds))

    if references:
        runs = [(ref.energy, ref(grid.x_min)) for ref in references]
    else:
        start = seeds.seed1(grid.x_min)
        chosen = energies if energies is not None else shooting_energies(p)
        runs = [(energy, start) for energy in chosen]
    for energy, psi0 in runs:
        fields.append(shooting_solve(p.h0, energy, psi0, grid))

    fields.extend(random_smooth_fields(grid, numerics.random_fields, numerics.random_seed))
    logger.debug(f"Generated {len(fields)} test fields on {grid}")
    return fields


def full_report(
    p: SuperPair,
    grid: GridSpec,
    mode: DerivativeMode = DerivativeMode.ANALYTIC,
    energies: Sequence[float] | None = None,
    numerics: NumericsConfig | None = None,
    references: Sequence[SeedSolution] | None = None,
    testset: Sequence[SampledField] | None = None,
) -> ResidualReport:
    """
    Run every check on the standard testset.

    Args:
        p: Pair under test.
        grid: Working grid.
        mode: Derivative mode.
        energies: Shooting energies for the generated testset.
        numerics: Random seed, field count and worker count.
        references: Known eigenspinors that start the shooting runs.
        testset: Explicit test fields, replacing the generated ones.
    """
    numerics = numerics or NumericsConfig()
    if testset is not None:
        fields = list(testset)
    else:
        fields = generate_testset(p, grid, energies, numerics, references)
    _require(fields)
    pairs = [(fields[i], fields[(i + 1) % len(fields)]) for i in range(len(fields))]

    jobs: dict[str, Callable[[], CheckResult]] = {
        "intertwining": lambda: check_intertwining(p, fields, mode),
        "factorization": lambda: check_factorization(p, fields, mode),
        "superalgebra": lambda: check_superalgebra(p, pairs, mode),
        "kernel": lambda: check_kernel(p, grid, mode),
        "nilpotency": check_nilpotency,
    }
    if numerics.report_workers > 1:
        with ThreadPoolExecutor(max_workers=numerics.report_workers) as pool:
            futures = {name: pool.submit(job) for name, job in jobs.items()}
            checks = {name: futures[name].result() for name in CHECK_NAMES}
    else:
        checks = {name: jobs[name]() for name in CHECK_NAMES}

    report = ResidualReport(checks, grid, mode)
    logger.info(f"Residual report on {grid} ({mode.value}): max {report.max_residual:.3e}")
    return report
