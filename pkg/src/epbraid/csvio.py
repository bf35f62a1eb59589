"""Delimited-file persistence with versioned schema headers.

Every file starts with a single comment line

    # epbraid-csv 1 schema=<name> key=value ...

followed by an RFC-4180 body (CRLF line ends, '.' decimal separator).
Floats are written with 17 significant digits so a write-read round trip
is exact.  Readers report malformed content with the offending line
number; operating-system failures propagate untouched so callers can
map them to the I/O exit code.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fitting import ObservationSet

FORMAT_VERSION = 1
_MAGIC = "epbraid-csv"


def format_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    raise ValidationError(f"cannot serialize {type(value).__name__} into a CSV cell")


def _header_line(schema: str, metadata: dict) -> str:
    parts = [f"# {_MAGIC} {FORMAT_VERSION}", f"schema={schema}"]
    for key in sorted(metadata):
        value = format_value(metadata[key])
        if any(ch.isspace() for ch in f"{key}{value}"):
            raise ValidationError(f"metadata entry {key}={value!r} must not contain whitespace")
        parts.append(f"{key}={value}")
    return " ".join(parts)


def write_table(path, schema: str, columns, rows, metadata: dict | None = None) -> None:
    """Write one schema-tagged table; any OSError is the caller's to map."""
    columns = list(columns)
    buffer = io.StringIO()
    buffer.write(_header_line(schema, dict(metadata or {})) + "\r\n")
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        row = list(row)
        if len(row) != len(columns):
            raise ValidationError(
                f"row has {len(row)} cells but the schema {schema!r} has {len(columns)} columns"
            )
        writer.writerow([format_value(cell) for cell in row])
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(buffer.getvalue())


@dataclass(frozen=True)
class CsvTable:
    """Parsed table: schema tag, header metadata, columns, string cells."""

    schema: str
    metadata: dict
    columns: tuple
    rows: tuple

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise ValidationError(
                f"missing column {name!r}; file has {', '.join(self.columns)}"
            ) from None

    def float_column(self, name: str) -> np.ndarray:
        k = self.column_index(name)
        values = np.empty(len(self.rows))
        for i, row in enumerate(self.rows):
            try:
                values[i] = float(row[k])
            except ValueError:
                raise ValidationError(
                    f"line {i + 3}: column {name!r} has non-numeric cell {row[k]!r}"
                ) from None
        return values

    def string_column(self, name: str) -> list:
        k = self.column_index(name)
        return [row[k] for row in self.rows]


def _parse_header(line: str) -> tuple[str, dict]:
    tokens = line.strip().split()
    if len(tokens) < 3 or tokens[0] != "#" or tokens[1] != _MAGIC:
        raise ValidationError(f"line 1: expected '# {_MAGIC} <version> schema=...' header")
    if tokens[2] != str(FORMAT_VERSION):
        raise ValidationError(f"line 1: unsupported format version {tokens[2]!r}")
    metadata = {}
    for token in tokens[3:]:
        if "=" not in token:
            raise ValidationError(f"line 1: malformed header entry {token!r}")
        key, value = token.split("=", 1)
        metadata[key] = value
    schema = metadata.pop("schema", None)
    if schema is None:
        raise ValidationError("line 1: header is missing the schema tag")
    return schema, metadata


def read_table(path, expected_schema: str | None = None) -> CsvTable:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        first = handle.readline()
        if not first:
            raise ValidationError("line 1: file is empty")
        schema, metadata = _parse_header(first)
        reader = csv.reader(handle)
        try:
            columns = next(reader)
        except StopIteration:
            raise ValidationError("line 2: missing column header row") from None
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(columns):
                raise ValidationError(
                    f"line {reader.line_num + 1}: expected {len(columns)} cells, got {len(row)}"
                )
            rows.append(tuple(row))
    if expected_schema is not None and schema != expected_schema:
        raise ValidationError(
            f"expected schema {expected_schema!r}, file {path!s} carries {schema!r}"
        )
    return CsvTable(schema, metadata, tuple(columns), tuple(rows))


OBSERVATIONS_SCHEMA = "observations"
_OBSERVATION_COLUMNS = ("time", "P_g", "P_e", "P_f", "sigma")


def write_observations(path, data: ObservationSet, metadata: dict | None = None) -> None:
    rows = [
        (t, *triple, s)
        for t, triple, s in zip(data.times, data.observed, data.sigma)
    ]
    write_table(path, OBSERVATIONS_SCHEMA, _OBSERVATION_COLUMNS, rows, metadata)


def read_observations(path) -> ObservationSet:
    table = read_table(path, expected_schema=OBSERVATIONS_SCHEMA)
    times = table.float_column("time")
    observed = np.column_stack(
        [table.float_column("P_g"), table.float_column("P_e"), table.float_column("P_f")]
    )
    return ObservationSet(times, observed, table.float_column("sigma"))
