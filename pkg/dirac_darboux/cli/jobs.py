"""
Job configuration for the command-line front end.

A job is a pydantic model tree loaded from a flat dotted-key file
(``model.m = 1.0``, read as TOML) or a YAML file, then overridden by
command-line flags. :func:`build_model` turns a validated job into a source
Hamiltonian plus its seed pair.
"""

import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dirac_darboux.cli.tables import OutputTable
from dirac_darboux.exceptions import ConfigError, InvalidLevel, InvalidParams
from dirac_darboux.hamiltonian import (
    CoulombParams,
    DiracHamiltonian,
    Domain,
    coulomb_potential,
    free_particle_potential,
    table_potential,
)
from dirac_darboux.matgrid import DerivativeMode, GridSpec
from dirac_darboux.seeds import (
    FreeSeedParams,
    SeedSolution,
    coulomb_energy,
    coulomb_seed_pair_simplified,
    coulomb_solution,
    free_seed_pair,
    seed_from_samples,
    shooting_solve,
)

logger = logging.getLogger(__name__)

Sign = Literal["+", "-"]

# Shooting runs started from closed-form levels above the seed levels
REFERENCE_LEVELS = 3


# ============================================================================
# Sections
# ============================================================================


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSection(_Section):
    """Uniform grid ``x_min:x_max:n_points``."""

    x_min: float
    x_max: float
    n_points: int = Field(default=2001, ge=9)

    def spec(self) -> GridSpec:
        return GridSpec(self.x_min, self.x_max, self.n_points)


class FreeModel(_Section):
    """Free particle with seeds at ``+energy`` and ``-energy``."""

    kind: Literal["free"] = "free"
    m: float = Field(default=1.0, gt=0, description="Mass")
    energy: float = Field(default=0.6, gt=0, description="Seed energy, 0 < energy < m")
    c: float = Field(default=0.0, description="Mixing constant of the second seed")

    def params(self) -> FreeSeedParams:
        return FreeSeedParams(self.m, self.energy, self.c)


class CoulombModel(_Section):
    """Generalized Coulomb problem with closed-form seeds at two levels."""

    kind: Literal["coulomb"] = "coulomb"
    M: float = Field(default=1.0, gt=0)
    alpha: float = 1.0
    beta: float = -1.0
    k: float = 1.0
    levels: tuple[int, int] = (0, 1)
    signs: tuple[Sign, Sign] = ("+", "-")

    @model_validator(mode="after")
    def _distinct_levels(self) -> "CoulombModel":
        if self.levels[0] == self.levels[1]:
            raise ValueError(f"seed levels must be distinct, got {self.levels}")
        if min(self.levels) < 0:
            raise ValueError("seed levels must be non-negative")
        return self

    def params(self) -> CoulombParams:
        return CoulombParams(self.M, self.alpha, self.beta, self.k)


class TableModel(_Section):
    """Potential read from a CSV of ``x, v11, v12, v22``; seeds come from shooting."""

    kind: Literal["custom-table"] = "custom-table"
    path: Path
    domain: Domain = Domain.FULL_LINE
    energies: tuple[float, float]
    starts: tuple[tuple[float, float], tuple[float, float]] = ((1.0, 0.0), (0.0, 1.0))
    tolerance: float = Field(default=1e-4, gt=0, description="Seed eigen residual bound")

    @model_validator(mode="after")
    def _distinct_energies(self) -> "TableModel":
        if self.energies[0] == self.energies[1]:
            raise ValueError("seed energies must be distinct")
        return self


ModelSection = Annotated[FreeModel | CoulombModel | TableModel, Field(discriminator="kind")]


class OutputSection(_Section):
    path: Path | None = None
    format: Literal["csv", "json"] = "csv"
    sidecar: bool = False
    transport_levels: list[int] = Field(default_factory=list)
    transport_sign: Sign = "-"
    transport_energies: list[float] = Field(default_factory=list)


class VerifySection(_Section):
    threshold: float | None = Field(default=None, gt=0)


class SpectrumSection(_Section):
    n_max: int = Field(default=3, ge=0)


class SampleSection(_Section):
    what: Literal["potential", "seeds", "partner"] = "potential"


class JobConfig(_Section):
    """
    One command-line job.

    Example:
        ```python
        job = JobConfig.model_validate({"model": {"kind": "coulomb"}, "mode": "fd4"})
        job.grid_spec()  # GridSpec(0.1, 20.0, 2001)
        ```
    """

    model: ModelSection = Field(default_factory=FreeModel)
    grid: GridSection | None = None
    mode: DerivativeMode = DerivativeMode.ANALYTIC
    output: OutputSection = Field(default_factory=OutputSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    spectrum: SpectrumSection = Field(default_factory=SpectrumSection)
    sample: SampleSection = Field(default_factory=SampleSection)

    @model_validator(mode="before")
    @classmethod
    def _default_model_kind(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("model"), dict):
            if "kind" not in data["model"]:
                data = {**data, "model": {"kind": "free", **data["model"]}}
        return data

    @model_validator(mode="after")
    def _grid_in_domain(self) -> "JobConfig":
        half_line = isinstance(self.model, CoulombModel) or (
            isinstance(self.model, TableModel) and self.model.domain is Domain.HALF_LINE
        )
        if half_line and self.grid is not None and self.grid.x_min <= 0:
            raise ValueError("half-line models need grid.x_min > 0")
        return self

    def grid_spec(self) -> GridSpec:
        if self.grid is not None:
            return self.grid.spec()
        if isinstance(self.model, CoulombModel):
            return GridSpec(0.1, 20.0, 2001)
        if isinstance(self.model, TableModel):
            x = OutputTable.read(self.model.path).column("x")
            return GridSpec(float(x[0]), float(x[-1]), 2001)
        return GridSpec(-10.0, 10.0, 2001)


# ============================================================================
# Loading
# ============================================================================


def _expand_dotted(data: dict[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, dict):
            value = _expand_dotted(value)
        target = out
        *parents, leaf = str(key).split(".")
        for part in parents:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"key {key!r} conflicts with a scalar value")
        if isinstance(value, dict) and isinstance(target.get(leaf), dict):
            target[leaf] = _merge(target[leaf], value)
        else:
            target[leaf] = value
    return out


def _merge(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: Path) -> dict[str, Any]:
    """
    Read a dotted-key TOML file or a YAML file into a nested dict.

    Raises:
        ConfigError: The file cannot be read or parsed.
    """
    try:
        text = path.read_text(encoding="utf-8")
        if path.suffix in (".yaml", ".yml"):
            loaded = yaml.safe_load(text) or {}
        else:
            loaded = tomllib.loads(text)
    except (OSError, tomllib.TOMLDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if not isinstance(loaded, dict):
        raise ConfigError(f"config {path} must hold key-value pairs")
    return _expand_dotted(loaded)


def parse_override(item: str) -> dict[str, Any]:
    """
    Parse ``key.path=value``; the value is read as a TOML literal, else kept as text.

    Raises:
        ConfigError: No ``=`` in the item.
    """
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override must look like key=value, got {item!r}")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return _expand_dotted({key.strip(): value})


def load_job_config(
    path: Path | None = None,
    overrides: list[dict[str, Any]] | None = None,
) -> JobConfig:
    """
    Load a job from an optional file, then apply overrides in order.

    Raises:
        ConfigError: Unreadable file.
        pydantic.ValidationError: Invalid values.
    """
    data = read_config_file(path) if path is not None else {}
    for extra in overrides or []:
        data = _merge(data, extra)
    job = JobConfig.model_validate(data)
    logger.debug(f"Loaded job: {job.model_dump(mode='json')}")
    return job


# ============================================================================
# Model assembly
# ============================================================================


@dataclass(frozen=True)
class ModelSetup:
    """
    Source Hamiltonian, seed pair and supporting data for a job.

    Attributes:
        h0: Source Hamiltonian.
        seeds: Seed pair.
        tolerance: Eigen and kernel tolerance for building the transform.
        references: Known ``h0`` eigenspinors that start verification shooting runs.
        metadata: Provenance written into output tables.
    """

    h0: DiracHamiltonian
    seeds: tuple[SeedSolution, SeedSolution]
    tolerance: float
    references: list[SeedSolution] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)


def _coulomb_setup(
    model: CoulombModel,
) -> tuple[tuple[SeedSolution, SeedSolution], list[SeedSolution]]:
    p = model.params()
    if model.levels == (0, 1):
        seeds = coulomb_seed_pair_simplified(p, *model.signs)
    else:
        seeds = (
            coulomb_solution(coulomb_energy(p, model.levels[0], model.signs[0])),
            coulomb_solution(coulomb_energy(p, model.levels[1], model.signs[1])),
        )

    references: list[SeedSolution] = []
    top = max(model.levels)
    for n in range(top + 1, top + 1 + REFERENCE_LEVELS):
        try:
            level = coulomb_energy(p, n, model.signs[1], strict=False)
            if level.valid and not level.degenerate:
                references.append(coulomb_solution(level))
        except (InvalidParams, InvalidLevel) as e:
            logger.debug(f"Skipping reference level n={n}: {e}")
    return seeds, references


def _table_setup(
    model: TableModel, grid: GridSpec
) -> tuple[DiracHamiltonian, tuple[SeedSolution, SeedSolution]]:
    table = OutputTable.read(model.path)
    missing = {"x", "v11", "v12", "v22"} - set(table.columns)
    if missing:
        raise ConfigError(f"table {model.path} lacks columns {sorted(missing)}")
    potential = table_potential(
        table.column("x"),
        table.column("v11"),
        table.column("v12"),
        table.column("v22"),
        domain=model.domain,
        descriptor=f"table {model.path.name}",
    )
    h0 = DiracHamiltonian(potential)
    first, second = (
        seed_from_samples(shooting_solve(h0, energy, start, grid), energy, label=f"u{i + 1}")
        for i, (energy, start) in enumerate(zip(model.energies, model.starts, strict=True))
    )
    return h0, (first, second)


def build_model(job: JobConfig, eigen_tolerance: float = 1e-9) -> ModelSetup:
    """
    Assemble ``h0`` and the seed pair a job asks for.

    Args:
        job: Validated job.
        eigen_tolerance: Seed tolerance for closed-form models.

    Raises:
        InvalidParams, BranchInvalid, InvalidLevel: Model or level problems.
        ConfigError: Unreadable or incomplete table.
    """
    model = job.model
    metadata: dict[str, Any] = {"model": model.model_dump(mode="json"), "mode": job.mode.value}
    grid = job.grid_spec()
    metadata["grid"] = str(grid)

    if isinstance(model, FreeModel):
        h0 = DiracHamiltonian(free_particle_potential(model.m))
        seeds = free_seed_pair(model.params())
        setup = ModelSetup(h0, seeds, eigen_tolerance, metadata=metadata)
    elif isinstance(model, CoulombModel):
        h0 = DiracHamiltonian(coulomb_potential(model.params()))
        seeds, references = _coulomb_setup(model)
        setup = ModelSetup(h0, seeds, eigen_tolerance, references, metadata)
    else:
        h0, pair = _table_setup(model, grid)
        if model.tolerance > eigen_tolerance:
            logger.warning(
                f"Tabulated seeds use a loose tolerance {model.tolerance:g}; "
                "spline interpolation limits their accuracy"
            )
        setup = ModelSetup(h0, pair, model.tolerance, metadata=metadata)

    metadata["descriptor"] = h0.potential.descriptor
    metadata["energies"] = [s.energy for s in setup.seeds]
    logger.info(f"Model {h0.potential.descriptor} with seeds {metadata['energies']}")
    return setup
