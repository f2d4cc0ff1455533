"""CSV ingestion of experiment summaries.

Two schemas are accepted, distinguished by the header:

    counts form: label,n_control,x_control,n_treatment,x_treatment
    rates form:  label,n_control,rate_control,n_treatment,rate_treatment

A file must use exactly one form.  Rates rows have their conversion
counts rebuilt by nearest-integer rounding and are flagged reconstructed
so downstream consumers know the counts carry rounding error.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, TextIO, Union

from abstat.proportions import ArmCount, ExperimentSummary, counts_from_rate

__all__ = [
    "SchemaError",
    "RowError",
    "parse_experiments",
    "parse_experiments_text",
    "COUNT_COLUMNS",
    "RATE_COLUMNS",
]

COUNT_COLUMNS = ("label", "n_control", "x_control", "n_treatment", "x_treatment")
RATE_COLUMNS = ("label", "n_control", "rate_control", "n_treatment", "rate_treatment")

_REST = "__rest__"


class SchemaError(ValueError):
    """The file header does not match either accepted schema."""


class RowError(ValueError):
    """A data row is malformed; the message carries the line number."""


def _parse_int(row_line: int, column: str, raw: str) -> int:
    try:
        return int(raw.strip())
    except (ValueError, AttributeError):
        raise RowError(f"line {row_line}: column {column!r} must be an integer, got {raw!r}")


def _parse_rate(row_line: int, column: str, raw: str) -> float:
    try:
        value = float(raw.strip())
    except (ValueError, AttributeError, TypeError):
        raise RowError(f"line {row_line}: column {column!r} must be a number, got {raw!r}")
    if not 0.0 <= value <= 1.0:
        raise RowError(f"line {row_line}: column {column!r} must be in [0, 1], got {raw!r}")
    return value


def _detect_schema(fieldnames: Iterable[str]) -> str:
    columns = [c.strip() for c in fieldnames]
    if len(set(columns)) != len(columns):
        raise SchemaError(f"duplicate column in header: {columns}")
    present = set(columns)
    if present == set(COUNT_COLUMNS):
        return "counts"
    if present == set(RATE_COLUMNS):
        return "rates"
    known = set(COUNT_COLUMNS) | set(RATE_COLUMNS)
    unknown = sorted(present - known)
    if unknown:
        raise SchemaError(f"unknown column {unknown[0]!r} in header")
    raise SchemaError(
        "header must be exactly the counts form "
        f"{','.join(COUNT_COLUMNS)} or the rates form {','.join(RATE_COLUMNS)}"
    )


def parse_experiments(source: Union[str, Path, TextIO]) -> list[ExperimentSummary]:
    """Read experiment summaries from a CSV path or open text stream.

    Raises:
        SchemaError: missing, mixed, or unknown header columns.
        RowError: a malformed value, an out-of-range count, or a
            duplicate label, reported with its line number.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as handle:
            return _parse_stream(handle)
    return _parse_stream(source)


def _parse_stream(stream: TextIO) -> list[ExperimentSummary]:
    reader = csv.DictReader(stream, restkey=_REST)
    if reader.fieldnames is None:
        raise SchemaError("empty file: missing header")
    schema = _detect_schema(reader.fieldnames)

    experiments: list[ExperimentSummary] = []
    labels: set[str] = set()
    for row in reader:
        line = reader.line_num
        if _REST in row:
            raise RowError(f"line {line}: more fields than header columns")
        if any(v is None for v in row.values()):
            raise RowError(f"line {line}: fewer fields than header columns")
        row = {k.strip(): v for k, v in row.items()}
        label = row["label"].strip()
        if not label:
            raise RowError(f"line {line}: empty label")
        if label in labels:
            raise RowError(f"line {line}: duplicate label {label!r}")
        labels.add(label)

        n_control = _parse_int(line, "n_control", row["n_control"])
        n_treatment = _parse_int(line, "n_treatment", row["n_treatment"])
        try:
            if schema == "counts":
                control = ArmCount(n_control, _parse_int(line, "x_control", row["x_control"]))
                treatment = ArmCount(
                    n_treatment, _parse_int(line, "x_treatment", row["x_treatment"])
                )
                reconstructed = False
            else:
                control = ArmCount(
                    n_control,
                    counts_from_rate(n_control, _parse_rate(line, "rate_control", row["rate_control"])),
                )
                treatment = ArmCount(
                    n_treatment,
                    counts_from_rate(
                        n_treatment, _parse_rate(line, "rate_treatment", row["rate_treatment"])
                    ),
                )
                reconstructed = True
        except RowError:
            raise
        except ValueError as exc:
            raise RowError(f"line {line}: {exc}") from exc
        experiments.append(
            ExperimentSummary(
                label=label,
                control=control,
                treatment=treatment,
                reconstructed=reconstructed,
            )
        )
    return experiments


def parse_experiments_text(text: str) -> list[ExperimentSummary]:
    """Convenience wrapper for CSV content already held in a string."""
    return _parse_stream(io.StringIO(text))
