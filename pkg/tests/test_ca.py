import numpy as np
import pytest
from scipy.stats import chi2_contingency

from chainscope.ca import ContingencyTable, axis_report, cross_tab, fit_ca
from chainscope.errors import AxisOutOfRange, EmptyInput
from chainscope.reference import (
    SIZE_BY_ORIENTATION_COUNTS,
    size_by_orientation_table,
)


def random_table(rng, max_rows=50, max_cols=9):
    rows = rng.integers(2, max_rows + 1)
    cols = rng.integers(2, max_cols + 1)
    counts = rng.integers(0, 40, size=(rows, cols))
    if counts.sum() == 0:
        counts[0, 0] = 1
    return ContingencyTable(
        tuple(f"r{i}" for i in range(rows)),
        tuple(f"c{j}" for j in range(cols)),
        counts,
    )


class TestContingencyTable:
    def test_rejects_negative_counts(self):
        with pytest.raises(ValueError):
            ContingencyTable(("a",), ("x", "y"), np.array([[1, -1]]))

    def test_rejects_fractional_counts(self):
        with pytest.raises(ValueError):
            ContingencyTable(("a",), ("x",), np.array([[1.5]]))

    def test_rejects_empty_total(self):
        with pytest.raises(ValueError):
            ContingencyTable(("a",), ("x",), np.array([[0]]))

    def test_drop_empty(self):
        table = ContingencyTable(
            ("a", "b", "c"), ("x", "y", "z"),
            np.array([[1, 0, 2], [0, 0, 0], [3, 0, 4]]))
        kept, dropped_rows, dropped_cols = table.drop_empty()
        assert dropped_rows == ("b",)
        assert dropped_cols == ("y",)
        assert kept.counts.tolist() == [[1, 2], [3, 4]]

    def test_chi_square_matches_scipy(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            table = random_table(rng, max_rows=10, max_cols=6)
            kept, _, _ = table.drop_empty()
            if min(kept.counts.shape) < 2:
                continue
            expected = chi2_contingency(kept.counts, correction=False)[0]
            assert table.chi_square() == pytest.approx(expected, rel=1e-9)


class TestCrossTab:
    def test_counts_pairs(self):
        table = cross_tab(["a", "a", "b"], ["x", "y", "x"])
        assert table.row_labels == ("a", "b")
        assert table.col_labels == ("x", "y")
        assert table.counts.tolist() == [[1, 1], [1, 0]]

    def test_single_observation(self):
        table = cross_tab(["a"], ["x"])
        assert table.counts.tolist() == [[1]]

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            cross_tab([], [])

    def test_misaligned_inputs(self):
        with pytest.raises(ValueError):
            cross_tab(["a"], [])


class TestFitCA:
    def test_independent_table_has_zero_inertia(self):
        result = fit_ca(ContingencyTable(
            ("a", "b"), ("x", "y"), np.array([[1, 1], [1, 1]])))
        assert result.n_axes == 0
        assert result.total_inertia == 0.0

    def test_diagonal_table_inertia_one(self):
        # chi-square oracle: X2 = 20 on n = 20, so inertia = X2/n = 1
        result = fit_ca(ContingencyTable(
            ("a", "b"), ("x", "y"), np.array([[10, 0], [0, 10]])))
        assert result.total_inertia == pytest.approx(1.0, abs=1e-9)

    def test_chi_square_identity_on_random_tables(self):
        rng = np.random.default_rng(99)
        for _ in range(100):
            table = random_table(rng)
            result = fit_ca(table)
            chi2 = table.chi_square()
            assert result.total_inertia * table.n == pytest.approx(
                chi2, rel=1e-9, abs=1e-9)

    def test_axis_count_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            table = random_table(rng, max_rows=8, max_cols=5)
            kept, _, _ = table.drop_empty()
            result = fit_ca(table)
            assert result.n_axes <= min(kept.counts.shape) - 1

    def test_shares_sum_to_one(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            result = fit_ca(random_table(rng))
            if result.n_axes:
                assert result.axis_shares.sum() == pytest.approx(
                    1.0, abs=1e-12)

    def test_row_column_duality(self):
        # transition formula: row coords from column coords
        rng = np.random.default_rng(21)
        for _ in range(10):
            table = random_table(rng, max_rows=12, max_cols=7)
            kept, _, _ = table.drop_empty()
            result = fit_ca(table)
            if result.n_axes == 0:
                continue
            P = kept.counts / kept.counts.sum()
            profile = P / P.sum(axis=1, keepdims=True)
            derived = (profile @ result.col_coords) / result.singular_values
            assert np.allclose(derived, result.row_coords,
                               rtol=1e-9, atol=1e-9)

    def test_scaling_invariance(self):
        rng = np.random.default_rng(31)
        table = random_table(rng, max_rows=9, max_cols=6)
        scaled = ContingencyTable(table.row_labels, table.col_labels,
                                  table.counts * 7)
        a, b = fit_ca(table), fit_ca(scaled)
        assert np.allclose(a.row_coords, b.row_coords, rtol=1e-9, atol=1e-12)
        assert np.allclose(a.col_coords, b.col_coords, rtol=1e-9, atol=1e-12)
        assert a.total_inertia == pytest.approx(b.total_inertia, rel=1e-9)

    def test_sign_canonicalization(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            result = fit_ca(random_table(rng, max_rows=8, max_cols=5))
            for k in range(result.n_axes):
                stacked = np.concatenate(
                    [result.row_coords[:, k], result.col_coords[:, k]])
                assert stacked[np.argmax(np.abs(stacked))] > 0

    def test_deterministic_across_fits(self):
        table = size_by_orientation_table()
        a, b = fit_ca(table), fit_ca(table)
        assert np.array_equal(a.row_coords, b.row_coords)
        assert np.array_equal(a.col_coords, b.col_coords)
        assert np.array_equal(a.singular_values, b.singular_values)

    def test_zero_row_dropped_with_diagnostic(self):
        table = ContingencyTable(
            ("a", "b", "c"), ("x", "y"),
            np.array([[5, 1], [0, 0], [2, 8]]))
        result = fit_ca(table)
        assert result.dropped_rows == ("b",)
        assert result.row_labels == ("a", "c")

    def test_single_row_is_zero_inertia(self):
        result = fit_ca(ContingencyTable(
            ("a",), ("x", "y", "z"), np.array([[3, 4, 5]])))
        assert result.n_axes == 0
        assert result.total_inertia == 0.0


class TestReferenceTable:
    def test_loads_and_fits(self):
        table = size_by_orientation_table()
        assert table.counts.tolist() == [list(r)
                                         for r in SIZE_BY_ORIENTATION_COUNTS]
        result = fit_ca(table)
        assert result.n_axes == 2
        assert result.axis_shares.sum() == pytest.approx(1.0, abs=1e-12)

    def test_inertia_equals_chi_square_over_n(self):
        table = size_by_orientation_table()
        result = fit_ca(table)
        assert result.total_inertia == pytest.approx(
            table.chi_square() / table.n, rel=1e-9)


def scratch_axis_summary(table: ContingencyTable, k: int):
    """Independent reimplementation of the axis summary formulas."""
    counts = table.counts.astype(float)
    n = counts.sum()
    P = counts / n
    r, c = P.sum(axis=1), P.sum(axis=0)
    S = (P - np.outer(r, c)) / np.sqrt(np.outer(r, c))
    U, sv, Vt = np.linalg.svd(S, full_matrices=False)
    keep = min(min(P.shape) - 1, int((sv > 1e-10 * sv[0]).sum()))
    sv = sv[:keep]
    F = (U[:, :keep] * sv) / np.sqrt(r)[:, None]
    G = (Vt.T[:, :keep] * sv) / np.sqrt(c)[:, None]
    inertias = sv**2
    cumulative = inertias[:k].sum() / inertias.sum()
    row_contrib = r[:, None] * F[:, :k] ** 2 / inertias[:k]
    col_contrib = c[:, None] * G[:, :k] ** 2 / inertias[:k]
    return cumulative, row_contrib, col_contrib


class TestAxisReport:
    def test_all_axes_cumulate_to_one(self):
        result = fit_ca(size_by_orientation_table())
        report = axis_report(result, result.n_axes)
        assert report.cumulative_inertia_share == pytest.approx(
            1.0, abs=1e-12)

    def test_zero_axes(self):
        result = fit_ca(size_by_orientation_table())
        assert axis_report(result, 0).cumulative_inertia_share == 0.0

    def test_out_of_range(self):
        result = fit_ca(size_by_orientation_table())
        with pytest.raises(AxisOutOfRange):
            axis_report(result, result.n_axes + 1)

    def test_contributions_sum_to_one_per_axis(self):
        rng = np.random.default_rng(51)
        for _ in range(10):
            result = fit_ca(random_table(rng, max_rows=10, max_cols=6))
            if result.n_axes == 0:
                continue
            report = axis_report(result, result.n_axes)
            assert np.allclose(report.row_contributions.sum(axis=0),
                               1.0, atol=1e-9)
            assert np.allclose(report.col_contributions.sum(axis=0),
                               1.0, atol=1e-9)

    def test_agrees_with_scratch_reimplementation(self):
        table = size_by_orientation_table()
        result = fit_ca(table)
        report = axis_report(result, 2)
        cumulative, row_contrib, col_contrib = scratch_axis_summary(table, 2)
        assert report.cumulative_inertia_share == pytest.approx(
            cumulative, abs=1e-9)
        assert np.allclose(np.abs(report.row_contributions),
                           np.abs(row_contrib), atol=1e-9)
        assert np.allclose(np.abs(report.col_contributions),
                           np.abs(col_contrib), atol=1e-9)
