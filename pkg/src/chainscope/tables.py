"""Labeled count/percentage tables and their CSV form.

Percent views are rendered to one decimal, half away from zero; internal
values keep full precision. The CSV layout is one label column followed
by one column per category, with an optional leading '#' comment line.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Sequence


def round1(value: float) -> float:
    """One-decimal rounding, half away from zero (handles the 33.3 rows)."""
    quantized = Decimal(repr(value)).quantize(
        Decimal("0.1"), rounding=ROUND_HALF_UP)
    return float(quantized)


@dataclass
class LabeledTable:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    label_header: str = "label"

    def __post_init__(self):
        assert len(self.values) == len(self.row_labels)
        assert all(len(r) == len(self.col_labels) for r in self.values)

    def row(self, label: str) -> tuple[float, ...]:
        return self.values[self.row_labels.index(label)]

    def cell(self, row_label: str, col_label: str) -> float:
        return self.row(row_label)[self.col_labels.index(col_label)]

    def row_percent(self) -> "LabeledTable":
        """Per-row percentage view; rows with a zero total stay zero."""
        rows = []
        for values in self.values:
            total = sum(values)
            if total == 0:
                rows.append(tuple(0.0 for _ in values))
            else:
                rows.append(tuple(round1(100.0 * v / total) for v in values))
        return LabeledTable(self.row_labels, self.col_labels, tuple(rows),
                            self.label_header)

    def to_csv_text(self, comment: str | None = None) -> str:
        out = io.StringIO()
        if comment:
            out.write(f"# {comment}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow([self.label_header, *self.col_labels])
        for label, values in zip(self.row_labels, self.values):
            writer.writerow([label, *(_format_cell(v) for v in values)])
        return out.getvalue()

    def to_csv(self, path, comment: str | None = None) -> None:
        Path(path).write_text(self.to_csv_text(comment), encoding="utf-8")


def _format_cell(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def load_table_csv(path) -> LabeledTable:
    text = Path(path).read_text(encoding="utf-8")
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    row_labels, rows = [], []
    for record in reader:
        if not record:
            continue
        row_labels.append(record[0])
        rows.append(tuple(float(v) for v in record[1:]))
    return LabeledTable(tuple(row_labels), tuple(header[1:]), tuple(rows),
                        label_header=header[0])


def cross_count(pairs: Sequence[tuple[str, str]],
                row_order: Sequence[str] | None = None,
                col_order: Sequence[str] | None = None,
                label_header: str = "label") -> LabeledTable:
    """Count table over (row label, column label) observation pairs."""
    counts: dict[tuple[str, str], int] = {}
    for r, c in pairs:
        counts[(r, c)] = counts.get((r, c), 0) + 1
    rows = (tuple(row_order) if row_order is not None
            else tuple(sorted({r for r, _ in counts})))
    cols = (tuple(col_order) if col_order is not None
            else tuple(sorted({c for _, c in counts})))
    values = tuple(
        tuple(float(counts.get((r, c), 0)) for c in cols) for r in rows)
    return LabeledTable(rows, cols, values, label_header)
