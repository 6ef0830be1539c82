"""Correspondence factor analysis of contingency tables.

The factorization decomposes the standardized residuals of the table:
with relative frequencies P, row masses r and column masses c, the matrix
S with S_ij = (P_ij - r_i c_j) / sqrt(r_i c_j) is taken through a
singular value decomposition. Principal coordinates scale the singular
vectors by the singular values and the inverse square-root masses; the
inertia of axis k is the squared singular value, and the total inertia
equals the Pearson chi-square statistic of the table divided by its grand
total.

A table that is exactly independent has no signal: the result carries
zero axes and zero inertia rather than failing. Axis signs are
canonicalized (the largest-magnitude coordinate on each axis is made
positive) so repeated fits are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AxisOutOfRange, EmptyInput
from .tables import LabeledTable

# Trailing singular values below this fraction of the leading one are
# numerical residue of the centering, not axes.
SINGULAR_VALUE_FLOOR = 1e-10


@dataclass(frozen=True)
class ContingencyTable:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: np.ndarray  # non-negative integers, shape (rows, cols)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape != (len(self.row_labels),
                                                len(self.col_labels)):
            raise ValueError("counts shape does not match the labels")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(counts == np.round(counts)):
                raise ValueError("counts must be integers")
            counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if counts.sum() == 0:
            raise ValueError("grand total must be positive")
        if len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("row labels must be unique")
        if len(set(self.col_labels)) != len(self.col_labels):
            raise ValueError("column labels must be unique")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def drop_empty(self) -> tuple["ContingencyTable", tuple[str, ...],
                                  tuple[str, ...]]:
        """Copy without all-zero rows/columns, plus the dropped labels."""
        row_keep = self.counts.sum(axis=1) > 0
        col_keep = self.counts.sum(axis=0) > 0
        dropped_rows = tuple(l for l, k in zip(self.row_labels, row_keep)
                             if not k)
        dropped_cols = tuple(l for l, k in zip(self.col_labels, col_keep)
                             if not k)
        if not dropped_rows and not dropped_cols:
            return self, (), ()
        table = ContingencyTable(
            tuple(l for l, k in zip(self.row_labels, row_keep) if k),
            tuple(l for l, k in zip(self.col_labels, col_keep) if k),
            self.counts[np.ix_(row_keep, col_keep)],
        )
        return table, dropped_rows, dropped_cols

    def chi_square(self) -> float:
        """Pearson chi-square of the table (zero-margin cells excluded)."""
        kept, _, _ = self.drop_empty()
        observed = kept.counts.astype(float)
        n = observed.sum()
        expected = np.outer(observed.sum(axis=1),
                            observed.sum(axis=0)) / n
        return float(((observed - expected) ** 2 / expected).sum())

    @staticmethod
    def from_table(table: LabeledTable) -> "ContingencyTable":
        return ContingencyTable(
            table.row_labels, table.col_labels,
            np.asarray(table.values, dtype=float))


def cross_tab(row_labels: Sequence[str],
              col_labels: Sequence[str]) -> ContingencyTable:
    """Contingency table counting paired observations; cell (i, j) is the
    number of observations labeled (i, j)."""
    if len(row_labels) != len(col_labels):
        raise ValueError("row and column observation sequences must align")
    if len(row_labels) == 0:
        raise EmptyInput("no observations to cross-tabulate")
    rows = tuple(sorted(set(row_labels)))
    cols = tuple(sorted(set(col_labels)))
    row_index = {l: i for i, l in enumerate(rows)}
    col_index = {l: j for j, l in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for r, c in zip(row_labels, col_labels):
        counts[row_index[r], col_index[c]] += 1
    return ContingencyTable(rows, cols, counts)


@dataclass(frozen=True)
class CAResult:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    row_coords: np.ndarray      # (rows, axes) principal coordinates
    col_coords: np.ndarray      # (cols, axes)
    singular_values: np.ndarray
    row_masses: np.ndarray
    col_masses: np.ndarray
    dropped_rows: tuple[str, ...]
    dropped_cols: tuple[str, ...]

    @property
    def n_axes(self) -> int:
        return len(self.singular_values)

    @property
    def axis_inertias(self) -> np.ndarray:
        return self.singular_values ** 2

    @property
    def total_inertia(self) -> float:
        return float((self.singular_values ** 2).sum())

    @property
    def axis_shares(self) -> np.ndarray:
        total = self.total_inertia
        if total == 0.0:
            return np.zeros(0)
        return self.axis_inertias / total


def fit_ca(table: ContingencyTable) -> CAResult:
    """Correspondence analysis of the table.

    All-zero rows and columns are dropped first (their masses would leave
    the residuals undefined) and reported on the result. An exactly
    independent table comes back with zero axes and zero inertia.
    """
    kept, dropped_rows, dropped_cols = table.drop_empty()
    counts = kept.counts.astype(float)
    n = counts.sum()
    P = counts / n
    r = P.sum(axis=1)
    c = P.sum(axis=0)
    expected = np.outer(r, c)
    S = (P - expected) / np.sqrt(expected)

    U, sv, Vt = np.linalg.svd(S, full_matrices=False)

    max_axes = min(len(r), len(c)) - 1
    if max_axes <= 0 or sv.size == 0 or sv[0] <= 0.0:
        keep = 0
    else:
        keep = min(max_axes, int(np.sum(sv >= SINGULAR_VALUE_FLOOR * sv[0])))

    sv = sv[:keep]
    row_coords = (U[:, :keep] * sv) / np.sqrt(r)[:, None]
    col_coords = (Vt.T[:, :keep] * sv) / np.sqrt(c)[:, None]

    # Sign canonicalization: largest-magnitude coordinate on each axis
    # (rows first, then columns) is made positive.
    for k in range(keep):
        stacked = np.concatenate([row_coords[:, k], col_coords[:, k]])
        if stacked[int(np.argmax(np.abs(stacked)))] < 0:
            row_coords[:, k] = -row_coords[:, k]
            col_coords[:, k] = -col_coords[:, k]

    return CAResult(
        row_labels=kept.row_labels,
        col_labels=kept.col_labels,
        row_coords=row_coords,
        col_coords=col_coords,
        singular_values=sv,
        row_masses=r,
        col_masses=c,
        dropped_rows=dropped_rows,
        dropped_cols=dropped_cols,
    )


@dataclass(frozen=True)
class AxisReport:
    axes: int
    cumulative_inertia_share: float
    row_contributions: np.ndarray  # (rows, axes), each axis sums to 1
    col_contributions: np.ndarray  # (cols, axes)
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]


def axis_report(result: CAResult, k: int) -> AxisReport:
    """Summary of the first k axes: cumulative inertia share and the
    per-point contributions (squared coordinate times mass over axis
    inertia)."""
    if k < 0 or k > result.n_axes:
        raise AxisOutOfRange(
            f"k={k}, result holds {result.n_axes} axis/axes")
    shares = result.axis_shares
    cumulative = float(shares[:k].sum()) if k > 0 else 0.0
    inertias = result.axis_inertias[:k]
    row_contrib = (result.row_masses[:, None]
                   * result.row_coords[:, :k] ** 2)
    col_contrib = (result.col_masses[:, None]
                   * result.col_coords[:, :k] ** 2)
    if k > 0:
        row_contrib = row_contrib / inertias
        col_contrib = col_contrib / inertias
    return AxisReport(
        axes=k,
        cumulative_inertia_share=cumulative,
        row_contributions=row_contrib,
        col_contributions=col_contrib,
        row_labels=result.row_labels,
        col_labels=result.col_labels,
    )


def ca_result_json(result: CAResult, axes: int | None = None) -> dict:
    """JSON-serializable view of a fit, optionally trimmed to k axes."""
    k = result.n_axes if axes is None else min(axes, result.n_axes)
    return {
        "axes": k,
        "singular_values": [float(s) for s in result.singular_values[:k]],
        "axis_inertias": [float(v) for v in result.axis_inertias[:k]],
        "axis_shares": [float(s) for s in result.axis_shares[:k]],
        "total_inertia": result.total_inertia,
        "cumulative_share_reported_axes": float(
            result.axis_shares[:k].sum()) if k else 0.0,
        "dropped_rows": list(result.dropped_rows),
        "dropped_cols": list(result.dropped_cols),
        "rows": {
            label: [float(v) for v in result.row_coords[i, :k]]
            for i, label in enumerate(result.row_labels)
        },
        "cols": {
            label: [float(v) for v in result.col_coords[j, :k]]
            for j, label in enumerate(result.col_labels)
        },
    }
