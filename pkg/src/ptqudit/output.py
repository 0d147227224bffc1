"""Deterministic CSV/JSON rendering of record tables."""

from __future__ import annotations

import json
import math
from typing import Sequence

CSV_DIGITS = 12
JSON_DIGITS = 17


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, f".{CSV_DIGITS}g")
    return str(value)


def _json_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "null"
        return format(value, f".{JSON_DIGITS}g")
    return json.dumps(value)


def to_csv(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_csv_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def to_json(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    records = []
    for row in rows:
        fields = ", ".join(f"{json.dumps(c)}: {_json_value(v)}" for c, v in zip(columns, row))
        records.append("  {" + fields + "}")
    return "[\n" + ",\n".join(records) + "\n]\n"


def render(columns: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "csv":
        return to_csv(columns, rows)
    if fmt == "json":
        return to_json(columns, rows)
    raise ValueError(f"unknown format {fmt!r}")
