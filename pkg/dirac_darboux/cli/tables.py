"""
Output tables: CSV with a ``#`` metadata header, or JSON.

Numbers are written with 17 significant digits, independent of locale, so a
write/read round trip reproduces every double exactly. Metadata values are
JSON-encoded; no timestamps are recorded, so identical jobs give
byte-identical files.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np
import orjson

from dirac_darboux.exceptions import ConfigError
from dirac_darboux.matgrid import Array

logger = logging.getLogger(__name__)

Cell = float | int | str
TableFormat = Literal["csv", "json"]

POTENTIAL_COLUMNS = ("x", "v11", "v12", "v22")
SPINOR_COLUMNS = ("x", "psi1", "psi2")
JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def _format_cell(value: Cell) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def _parse_cell(text: str) -> Cell:
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class OutputTable:
    """
    Column-oriented table with provenance metadata.

    Attributes:
        columns: Column names.
        rows: One tuple per row, matching ``columns``.
        metadata: Model, parameters, energies and tool version.
    """

    columns: tuple[str, ...]
    rows: list[tuple[Cell, ...]]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ConfigError(f"row {row!r} does not match columns {self.columns}")
        if self.columns and self.columns[0] == "x":
            xs = [float(row[0]) for row in self.rows]
            if any(b <= a for a, b in zip(xs, xs[1:], strict=False)):
                raise ConfigError("table rows must be sorted by strictly increasing x")

    # ------------------------------------------------------------------
    # Builders
    # ------------------------------------------------------------------

    @classmethod
    def potential(cls, x: Array, v: Array, metadata: dict[str, Any]) -> "OutputTable":
        rows = [
            (float(xi), float(m[0, 0]), float(m[0, 1]), float(m[1, 1]))
            for xi, m in zip(x, v, strict=True)
        ]
        return cls(POTENTIAL_COLUMNS, rows, dict(metadata))

    @classmethod
    def spinor(cls, x: Array, psi: Array, metadata: dict[str, Any]) -> "OutputTable":
        rows = [(float(xi), float(p[0]), float(p[1])) for xi, p in zip(x, psi, strict=True)]
        return cls(SPINOR_COLUMNS, rows, dict(metadata))

    def column(self, name: str) -> Array:
        index = self.columns.index(name)
        return np.array([float(row[index]) for row in self.rows])

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_csv(self) -> str:
        buffer = io.StringIO()
        for key in sorted(self.metadata):
            encoded = orjson.dumps(self.metadata[key], option=JSON_OPTIONS & ~orjson.OPT_INDENT_2)
            buffer.write(f"# {key}: {encoded.decode()}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_format_cell(v) for v in row])
        return buffer.getvalue()

    def to_json(self) -> bytes:
        rows = [
            [None if isinstance(v, float) and math.isnan(v) else v for v in row]
            for row in self.rows
        ]
        return orjson.dumps(
            {"metadata": self.metadata, "columns": list(self.columns), "rows": rows},
            option=JSON_OPTIONS,
        )

    def write(self, path: Path, fmt: TableFormat = "csv", sidecar: bool = False) -> list[Path]:
        """Write the table, plus ``<path>.json`` metadata when ``sidecar`` is set."""
        path.parent.mkdir(parents=True, exist_ok=True)
        written = [path]
        if fmt == "json":
            path.write_bytes(self.to_json())
        else:
            path.write_text(self.to_csv(), encoding="utf-8")
            if sidecar:
                meta_path = path.with_name(path.name + ".json")
                meta_path.write_bytes(orjson.dumps(self.metadata, option=JSON_OPTIONS))
                written.append(meta_path)
        logger.info(f"Wrote {len(self.rows)} rows to {path}")
        return written

    @classmethod
    def read(cls, path: Path) -> "OutputTable":
        """
        Read a table written by :meth:`write` (format chosen by suffix).

        Raises:
            ConfigError: File missing or malformed.
        """
        try:
            if path.suffix == ".json":
                data = orjson.loads(path.read_bytes())
                rows = [
                    tuple(math.nan if v is None else v for v in row) for row in data["rows"]
                ]
                return cls(tuple(data["columns"]), rows, data.get("metadata", {}))
            return cls._from_csv(path.read_text(encoding="utf-8"))
        except (OSError, KeyError, ValueError, orjson.JSONDecodeError) as e:
            raise ConfigError(f"cannot read table {path}: {e}") from e

    @classmethod
    def _from_csv(cls, text: str) -> "OutputTable":
        metadata: dict[str, Any] = {}
        body = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                metadata[key.strip()] = orjson.loads(value.strip()) if value.strip() else None
            elif line.strip():
                body.append(line)
        reader = csv.reader(body)
        header = next(reader)
        rows = [tuple(_parse_cell(cell) for cell in row) for row in reader]
        return cls(tuple(header), rows, metadata)
