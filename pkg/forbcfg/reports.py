"""Tabular artifacts: JSON, CSV and plain-text rendering, plus the reference tables."""

from __future__ import annotations

import csv
import sys
from enum import Enum, StrEnum
from fractions import Fraction
from io import StringIO
from json import dumps
from logging import getLogger
from typing import TYPE_CHECKING, Any, Final

from pydantic import BaseModel, ConfigDict, Field
from wg_utilities.functions import force_mkdir

from forbcfg.common import Alpha
from forbcfg.recurrence import (
    CLOSED_SET_CEILING,
    EXACT_H_VALUES,
    epsilon,
    h2_table,
    h_upper_table,
    power_of_two_exponent,
)
from forbcfg.tcm_opt import h_exact, normalized

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping
    from pathlib import Path

    from forbcfg.config import Settings

LOGGER = getLogger(__name__)

SCHEMA_VERSION: Final[int] = 1
SIGNIFICANT_DIGITS: Final[int] = 6

type Cell = int | float | str | bool | None


class OutputFormat(StrEnum):
    """Artifact encodings accepted by `--format`."""

    JSON = "json"
    CSV = "csv"
    TEXT = "text"


class Table(BaseModel):
    """A named table: ordered columns and one mapping per row."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    columns: tuple[str, ...]
    rows: tuple[dict[str, int | float | str | bool | None], ...] = ()

    @classmethod
    def from_records(
        cls,
        name: str,
        records: Iterable[Mapping[str, Any]],
        columns: Iterable[str] | None = None,
    ) -> Table:
        """Build a table, normalising every value with `cell`."""
        rows = tuple({key: cell(value) for key, value in record.items()} for record in records)
        if columns is None:
            columns = list(dict.fromkeys(key for row in rows for key in row))

        return cls(name=name, columns=tuple(columns), rows=rows)


class Report(BaseModel):
    """Everything one command emits."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str
    parameters: dict[str, int | float | str | bool | None] = Field(default_factory=dict)
    tables: tuple[Table, ...] = ()
    passed: bool | None = None


def cell(value: Any) -> Cell:
    """Normalise a value for output.

    Integers (and integral fractions) are kept whole; other numbers are rounded to six
    significant digits.
    """
    if value is None or isinstance(value, bool | str):
        return value

    if isinstance(value, Enum):
        return str(value.value)

    if isinstance(value, int):
        return value

    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator

    if isinstance(value, Fraction | float):
        return float(f"{float(value):.{SIGNIFICANT_DIGITS}g}")

    if isinstance(value, tuple | list):
        return " ".join(str(cell(item)) for item in value)

    return str(value)


def _text_cell(value: Cell) -> str:
    if value is None:
        return ""

    if isinstance(value, bool):
        return str(value).lower()

    return str(value)


def render_json(report: Report) -> str:
    """Render the report as a JSON document with a schema version."""
    return (
        dumps(
            {
                "schema": SCHEMA_VERSION,
                "command": report.command,
                "parameters": report.parameters,
                "passed": report.passed,
                "tables": {
                    table.name: [
                        {column: row.get(column) for column in table.columns}
                        for row in table.rows
                    ]
                    for table in report.tables
                },
            },
            indent=2,
            ensure_ascii=False,
        )
        + "\n"
    )


def render_csv(report: Report) -> str:
    """Render the tables as CSV; several tables are separated by `# name` lines."""
    buffer = StringIO()
    for index, table in enumerate(report.tables):
        if len(report.tables) > 1:
            if index:
                buffer.write("\n")
            buffer.write(f"# {table.name}\n")

        writer = csv.DictWriter(buffer, fieldnames=table.columns, lineterminator="\n")
        writer.writeheader()
        for row in table.rows:
            writer.writerow({column: _text_cell(row.get(column)) for column in table.columns})

    return buffer.getvalue()


def render_text(report: Report) -> str:
    """Render aligned columns for reading in a terminal."""
    lines = [f"{report.command}: " + ", ".join(f"{k}={v}" for k, v in report.parameters.items())]
    for table in report.tables:
        cells = [[_text_cell(row.get(column)) for column in table.columns] for row in table.rows]
        widths = [
            max([len(column), *(len(line[index]) for line in cells)])
            for index, column in enumerate(table.columns)
        ]
        lines.extend(("", f"[{table.name}]"))
        lines.extend(
            "  ".join(value.rjust(width) for value, width in zip(line, widths, strict=True))
            for line in [list(table.columns), *cells]
        )

    if report.passed is not None:
        lines.extend(("", "PASSED" if report.passed else "FAILED"))

    return "\n".join(lines) + "\n"


RENDERERS: Final = {
    OutputFormat.JSON: render_json,
    OutputFormat.CSV: render_csv,
    OutputFormat.TEXT: render_text,
}


def render(report: Report, output_format: OutputFormat) -> str:
    """Render a report in the requested format."""
    return RENDERERS[output_format](report)


def write_report(report: Report, output_format: OutputFormat, output: Path | None = None) -> str:
    """Render a report and write it to `output`, or to standard output."""
    text = render(report, output_format)
    if output is None:
        sys.stdout.write(text)
    else:
        force_mkdir(output, path_is_file=True).write_text(text)
        LOGGER.info("Wrote %s report to %s", report.command, output)

    return text


# Reference tables

H_TABLE_EXPECTED: Final[dict[int, int]] = {
    m: value for m, value in EXACT_H_VALUES.items() if m >= 3  # noqa: PLR2004
}
H2_TABLE_EXPECTED: Final[dict[int, int]] = {
    1: 0,
    2: 1,
    3: 4,
    4: 12,
    5: 30,
    6: 73,
    7: 172,
    8: 400,
}


def h_table(m_max: int = 6, *, settings: Settings | None = None) -> Table:
    """H(m, 2) and h(m) from the exact search, against the known values."""
    records = []
    for m in range(3, m_max + 1):
        result = h_exact(m, 2, settings=settings)
        expected = H_TABLE_EXPECTED.get(m)
        records.append(
            {
                "m": m,
                "H": result.value,
                "h": normalized(result.value, m, 2),
                "status": result.status,
                "expected": expected,
                "match": expected == result.value if expected is not None else None,
            },
        )

    return Table.from_records("h_table", records)


def upper_table(m_max: int = 12) -> Table:
    """u(m) + ⅔·2^{−m} against the ceiling 5/12 + ε(m)."""
    records = [
        {
            "m": row.m,
            "h_bound": row.bound,
            "h_bound_plus_two_thirds": row.slack,
            "ceiling": CLOSED_SET_CEILING + epsilon(row.m),
            "exact": row.exact,
            "expected": True,
            "match": row.within_ceiling and row.below_coefficient,
        }
        for row in h_upper_table(m_max)
        if row.m >= 3  # noqa: PLR2004
    ]

    return Table.from_records("upper_table", records)


def h2_rows(m_max: int = 8, alpha: Alpha = 2) -> Table:
    """H₂(m, α), h₂ and the optimal split, with the reference values where α = 2."""
    table = h2_table(m_max, alpha)
    records = []
    for row in table.rows:
        split = row.split
        expected = H2_TABLE_EXPECTED.get(row.m) if alpha == 2 else None  # noqa: PLR2004
        records.append(
            {
                "m": row.m,
                "H2": row.value,
                "h2": table.normalized(row.m),
                "split_a": split[0] if split else None,
                "split_b": split[1] if split else None,
                "predicted_k": power_of_two_exponent(row.m) if row.m >= 3 else None,  # noqa: PLR2004
                "agrees_with_theorem": row.agrees,
                "expected": expected,
                "match": expected == row.value if expected is not None else None,
            },
        )

    return Table.from_records("h2_table", records)


def reference_tables(*, settings: Settings | None = None) -> Report:
    """Emit the H, upper-bound and H₂ tables."""
    tables = (h_table(settings=settings), upper_table(), h2_rows())
    passed = all(row["match"] is not False for table in tables for row in table.rows)
    return Report(command="emit-tables", tables=tables, passed=passed)
