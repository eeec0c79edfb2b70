"""CSV and JSON input/output for count tables, reports and benchmarks."""
from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

from ._validation import parse_rational
from .core import CountTable
from .exceptions import InputError

__all__ = [
    "TABLE_HEADER",
    "read_count_table",
    "write_count_table",
    "write_json",
    "write_rows_csv",
    "read_rationals",
]

TABLE_HEADER = ("category", "count")


def read_count_table(path, n: int) -> CountTable:
    """Read a ``category,count`` CSV, top-coding counts at ``n - 1``."""
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TABLE_HEADER:
            raise InputError(f"{path}: expected header 'category,count', got {header}")
        categories, counts = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise InputError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            text = row[1].strip()
            if not text.isdigit():
                raise InputError(f"{path}:{lineno}: count {text!r} is not a nonnegative integer")
            categories.append(row[0])
            counts.append(int(text))
    if not counts:
        raise InputError(f"{path}: table has no rows")
    if len(set(categories)) != len(categories):
        raise InputError(f"{path}: duplicate category ids")
    return CountTable.from_counts(counts, n, categories)


def write_count_table(path, table: CountTable) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TABLE_HEADER)
        for cat, count in zip(table.categories, table.counts):
            writer.writerow((cat, int(count)))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_rows_csv(path_or_handle, rows: list, fields: list) -> None:
    """Write dict rows with a fixed header to a path or an open text handle."""
    def emit(handle):
        writer = csv.DictWriter(handle, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)

    if hasattr(path_or_handle, "write"):
        emit(path_or_handle)
    else:
        with Path(path_or_handle).open("w", newline="", encoding="utf-8") as handle:
            emit(handle)


def read_rationals(text: str) -> list[Fraction]:
    """Parse a comma-separated list of rationals (``"1/3,1/3,1/3"``)."""
    parts = [t for t in text.split(",") if t.strip()]
    if not parts:
        raise InputError("expected a comma-separated list of rationals")
    return [parse_rational(t) for t in parts]
