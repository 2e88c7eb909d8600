"""
Command-line front end.

Verbs: ``transform``, ``verify``, ``spectrum``, ``sample`` and ``reproduce``.
Exit codes: 0 success, 2 configuration error, 3 singular seed matrix,
4 other numerical failure, 5 verification threshold exceeded.
"""

import argparse
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, TextIO

from pydantic import ValidationError

from dirac_darboux import __version__
from dirac_darboux.cli.golden import GOLDEN, run_golden
from dirac_darboux.cli.jobs import (
    CoulombModel,
    FreeModel,
    JobConfig,
    ModelSetup,
    build_model,
    load_job_config,
    parse_override,
)
from dirac_darboux.cli.tables import OutputTable
from dirac_darboux.config import NumericsConfig, configure_logging, get_config
from dirac_darboux.darboux import DarbouxTransform, build_transform, transport_seed
from dirac_darboux.exceptions import (
    ConfigError,
    DiracDarbouxError,
    DomainMismatch,
    GridTooSmall,
    InvalidParams,
    SingularSeedMatrix,
)
from dirac_darboux.matgrid import DerivativeMode, GridSpec
from dirac_darboux.seeds import (
    SeedSolution,
    coulomb_energy,
    coulomb_solution,
    free_exponential_seed,
    l2_norm,
)
from dirac_darboux.susy_verify import SuperPair, full_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SINGULAR = 3
EXIT_NUMERIC = 4
EXIT_VERIFY = 5

CONFIG_ERRORS = (ConfigError, ValidationError, InvalidParams, DomainMismatch, GridTooSmall)


# ============================================================================
# Helpers
# ============================================================================


def _output_path(job: JobConfig, default_stem: str) -> Path:
    if job.output.path is not None:
        return job.output.path
    return Path(f"{default_stem}.{job.output.format}")


def _sibling(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{path.suffix}")


def _metadata(setup: ModelSetup, command: str, **extra: Any) -> dict[str, Any]:
    return {**setup.metadata, "command": command, "version": __version__, **extra}


def _write(table: OutputTable, path: Path, job: JobConfig) -> None:
    for written in table.write(path, job.output.format, job.output.sidecar):
        print(written)


def _transform(job: JobConfig, numerics: NumericsConfig) -> tuple[ModelSetup, DarbouxTransform]:
    setup = build_model(job, numerics.eigen_tolerance)
    s1, s2 = setup.seeds
    # seeds of tabulated models carry their own, looser bound; L u_j inherits it
    kernel_tolerance = max(numerics.kernel_tolerance, setup.tolerance)
    transform = build_transform(
        s1, s2, setup.h0, job.grid_spec(), setup.tolerance, kernel_tolerance
    )
    return setup, transform


def _transport_seeds(job: JobConfig) -> list[SeedSolution]:
    model = job.model
    seeds: list[SeedSolution] = []
    if isinstance(model, FreeModel):
        seeds.extend(free_exponential_seed(model.m, e) for e in job.output.transport_energies)
    elif isinstance(model, CoulombModel):
        p = model.params()
        seeds.extend(
            coulomb_solution(coulomb_energy(p, n, job.output.transport_sign))
            for n in job.output.transport_levels
        )
    elif job.output.transport_levels or job.output.transport_energies:
        logger.warning("Transported spinors are not available for tabulated models")
    return seeds


# ============================================================================
# Commands
# ============================================================================


def cmd_transform(job: JobConfig, numerics: NumericsConfig | None = None) -> int:
    """Write the partner potential and any requested transported spinors."""
    numerics = numerics or NumericsConfig()
    setup, transform = _transform(job, numerics)
    grid = job.grid_spec()
    x = grid.nodes
    path = _output_path(job, "partner")

    table = OutputTable.potential(
        x,
        transform.v1(x),
        _metadata(setup, "transform", partner=transform.v1.descriptor),
    )
    _write(table, path, job)

    for i, seed in enumerate(_transport_seeds(job), start=1):
        image = transport_seed(transform, seed)
        meta = _metadata(setup, "transform", transported=seed.label, energy=seed.energy)
        _write(OutputTable.spinor(x, image(x), meta), _sibling(path, f"transport{i}"), job)
    return EXIT_OK


def cmd_verify(
    job: JobConfig, numerics: NumericsConfig | None = None, stream: TextIO | None = None
) -> int:
    """Run the identity suite; exit 5 when any residual exceeds the threshold."""
    numerics = numerics or NumericsConfig()
    setup, transform = _transform(job, numerics)
    report = full_report(
        SuperPair.from_transform(transform),
        job.grid_spec(),
        job.mode,
        numerics=numerics,
        references=setup.references,
    )
    body = report.to_json().decode() + "\n" if job.output.format == "json" else report.to_text()
    threshold = job.verify.threshold or numerics.verify_threshold
    passed = report.passed(threshold)
    body += f"report.threshold = {threshold:.17g}\nreport.passed = {str(passed).lower()}\n"

    if job.output.path is not None:
        job.output.path.parent.mkdir(parents=True, exist_ok=True)
        job.output.path.write_text(body, encoding="utf-8")
        logger.info(f"Wrote residual report to {job.output.path}")
    else:
        (stream or sys.stdout).write(body)

    if not passed:
        logger.error(f"Max residual {report.max_residual:.3e} exceeds {threshold:.3e}")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_spectrum(job: JobConfig, numerics: NumericsConfig | None = None) -> int:
    """Tabulate Coulomb levels on both branches up to ``spectrum.n_max``."""
    if not isinstance(job.model, CoulombModel):
        raise ConfigError("spectrum needs a coulomb model")
    p = job.model.params()
    grid = job.grid_spec()

    rows: list[tuple[float | int | str, ...]] = []
    for n in range(job.spectrum.n_max + 1):
        for sign in ("+", "-"):
            try:
                level = coulomb_energy(p, n, sign, strict=False)
            except InvalidParams as e:
                logger.warning(f"Level n={n} branch {sign}: {e}")
                continue
            norm = float("nan")
            if level.valid and not level.degenerate:
                norm = l2_norm(coulomb_solution(level).sample(grid))
            rows.append(
                (
                    n,
                    sign,
                    level.mu,
                    level.lam,
                    level.energy,
                    level.round_trip,
                    int(level.valid),
                    norm,
                )
            )

    columns = ("n", "sign", "mu", "lambda", "energy", "round_trip", "valid", "l2_norm")
    metadata = {
        "command": "spectrum",
        "descriptor": p.describe(),
        "grid": str(grid),
        "model": job.model.model_dump(mode="json"),
        "version": __version__,
    }
    _write(OutputTable(columns, rows, metadata), _output_path(job, "spectrum"), job)
    return EXIT_OK


def cmd_sample(job: JobConfig, numerics: NumericsConfig | None = None) -> int:
    """Dump the source potential, the seeds or the partner potential."""
    numerics = numerics or NumericsConfig()
    what = job.sample.what
    x = job.grid_spec().nodes
    path = _output_path(job, f"sample_{what}")

    if what == "partner":
        setup, transform = _transform(job, numerics)
        meta = _metadata(setup, "sample", what=what, partner=transform.v1.descriptor)
        _write(OutputTable.potential(x, transform.v1(x), meta), path, job)
        return EXIT_OK

    setup = build_model(job, numerics.eigen_tolerance)
    if what == "potential":
        meta = _metadata(setup, "sample", what=what)
        _write(OutputTable.potential(x, setup.h0.potential(x), meta), path, job)
    else:
        for i, seed in enumerate(setup.seeds, start=1):
            meta = _metadata(setup, "sample", what=what, seed=seed.label, energy=seed.energy)
            _write(OutputTable.spinor(x, seed(x), meta), _sibling(path, f"u{i}"), job)
    return EXIT_OK


def cmd_reproduce(which: str = "all", stream: TextIO | None = None) -> int:
    """Run the golden comparisons; nonzero exit when any fails."""
    out = stream or sys.stdout
    results = run_golden(which)
    for result in results:
        out.write(result.line() + "\n")
    failed = [r.name for r in results if not r.passed]
    if which == "all":
        summary = "all passed" if not failed else f"failed: {', '.join(failed)}"
        out.write(f"summary: {len(results) - len(failed)}/{len(results)} {summary}\n")
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS: dict[str, Callable[[JobConfig, NumericsConfig], int]] = {
    "transform": cmd_transform,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "sample": cmd_sample,
}


# ============================================================================
# Parser
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Job file (dotted TOML keys or YAML)")
    common.add_argument("--grid", help="Grid as MIN:MAX:N (use --grid=MIN:MAX:N when MIN < 0)")
    common.add_argument("--mode", choices=[m.value for m in DerivativeMode])
    common.add_argument("--out", type=Path, help="Output path")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one dotted config key (repeatable)",
    )
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="dirac-darboux",
        description="Matrix Darboux transformations of 1D Dirac Hamiltonians",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("transform", parents=[common], help="Write the partner potential")
    sub.add_parser("verify", parents=[common], help="Run the supersymmetry identity checks")
    sub.add_parser("spectrum", parents=[common], help="Tabulate Coulomb energy levels")
    sub.add_parser("sample", parents=[common], help="Dump a potential or its seeds")
    reproduce = sub.add_parser("reproduce", parents=[common], help="Run golden comparisons")
    reproduce.add_argument("which", nargs="?", default="all", choices=[*GOLDEN, "all"])
    return parser


def job_from_args(args: argparse.Namespace) -> JobConfig:
    """Merge the config file, ``--set`` overrides and dedicated flags; flags win."""
    overrides = [parse_override(item) for item in args.overrides]
    if args.grid:
        try:
            grid = GridSpec.parse(args.grid)
        except ValueError as e:
            raise ConfigError(f"bad --grid {args.grid!r}: {e}") from e
        overrides.append(
            {"grid": {"x_min": grid.x_min, "x_max": grid.x_max, "n_points": grid.n_points}}
        )
    if args.mode:
        overrides.append({"mode": args.mode})
    output: dict[str, Any] = {}
    if args.out:
        output["path"] = str(args.out)
    if args.format:
        output["format"] = args.format
    if output:
        overrides.append({"output": output})
    return load_job_config(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = get_config()
    log_config = config.logging
    if args.verbose:
        log_config = log_config.model_copy(
            update={"level": "DEBUG" if args.verbose > 1 else "INFO"}
        )
    configure_logging(log_config)

    try:
        if args.command == "reproduce":
            return cmd_reproduce(args.which)
        return COMMANDS[args.command](job_from_args(args), config.numerics)
    except CONFIG_ERRORS as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularSeedMatrix as e:
        print(f"singular seed matrix at x = {e.x!r}: {e}", file=sys.stderr)
        return EXIT_SINGULAR
    except DiracDarbouxError as e:
        logger.debug("Numerical failure", exc_info=True)
        print(f"numerical failure ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
