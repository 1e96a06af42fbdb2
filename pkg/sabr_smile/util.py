"""Table output helpers for the command line."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import orjson

from .const import FLOAT_FORMAT

if TYPE_CHECKING:
    from pathlib import Path


@dataclass(slots=True)
class Table:
    """Rows of one command's output plus metadata for JSON."""

    columns: tuple[str, ...]
    rows: list[tuple[Any, ...]] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def add(self, *values: Any) -> None:
        """Append a row; its width must match the columns."""
        if len(values) != len(self.columns):
            msg = f"Row has {len(values)} values for {len(self.columns)} columns"
            raise ValueError(msg)
        self.rows.append(values)


def format_cell(value: Any) -> str:
    """
    Format one CSV cell.

    Floats use 17 significant digits so they round-trip; None marks a
    point that could not be evaluated and becomes an empty cell.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, FLOAT_FORMAT)
    return str(value)


def render_csv(table: Table) -> str:
    """Render a table as CSV with LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(value) for value in row])
    return buffer.getvalue()


def _json_default(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    msg = f"Cannot serialize {type(value).__name__}"
    raise TypeError(msg)


def render_json(table: Table) -> str:
    """Render a table as JSON records; NaN becomes null."""
    records = [dict(zip(table.columns, row, strict=True)) for row in table.rows]
    payload = {"columns": list(table.columns), "rows": records, **table.meta}
    return orjson.dumps(
        payload,
        default=_json_default,
        option=orjson.OPT_INDENT_2 | orjson.OPT_APPEND_NEWLINE,
    ).decode()


def write_table(table: Table, fmt: str, out: Path | None, stream: Any) -> None:
    """Write a table as csv or json to out, or to stream when out is None."""
    text = render_json(table) if fmt == "json" else render_csv(table)
    if out is None:
        stream.write(text)
        return
    out.write_text(text, encoding="utf-8", newline="\n")
