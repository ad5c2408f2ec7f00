"""Tests for the statistical-randomness criterion on architecture matrices."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate

from md_iqp.evaluation.criteria import (
    CriterionThresholds,
    criterion1,
    hamming_statistics,
    merged_chisquare,
    min_depth_scan,
    mp_cdf,
    mp_density,
    mp_distance,
    mp_edges,
    spectral_histogram,
    spectrum,
    standardized_covariance,
    submatrix_rank_fraction,
    write_spectral_csv,
)
from md_iqp.evaluation.generators import layout_for, make_architecture
from md_iqp.layout.grid import AllToAllLayout, GridLayout
from md_iqp.linalg.gf2 import BitMatrix


@pytest.fixture
def random_matrix() -> BitMatrix:
    """I.i.d. uniform 400x100 matrix."""
    return BitMatrix.random(400, 100, np.random.default_rng(21))


class TestMarchenkoPastur:
    """Law, CDF and spectral distance."""

    def test_edges(self) -> None:
        assert mp_edges(0.25) == pytest.approx((0.25, 2.25))

    @pytest.mark.parametrize("gamma", [0.1, 0.5, 1.0])
    def test_density_normalizes(self, gamma: float) -> None:
        lo, hi = mp_edges(gamma)
        total, _ = integrate.quad(lambda x: float(mp_density(x, gamma)), lo, hi, limit=200)
        assert total == pytest.approx(1.0, abs=1e-4)

    @pytest.mark.parametrize("gamma", [0.2, 0.7])
    def test_cdf_endpoints_and_monotonicity(self, gamma: float) -> None:
        lo, hi = mp_edges(gamma)
        grid = np.linspace(lo, hi, 25)
        cdf = mp_cdf(grid, gamma)
        assert cdf[0] == pytest.approx(0.0, abs=1e-12)
        assert cdf[-1] == pytest.approx(1.0, abs=1e-8)
        assert np.all(np.diff(cdf) >= -1e-12)

    def test_cdf_atom_for_wide_ratio(self) -> None:
        assert mp_cdf([0.0], 2.0)[0] == pytest.approx(0.5)

    def test_invalid_gamma(self) -> None:
        with pytest.raises(ValueError):
            mp_cdf([1.0], 0.0)
        with pytest.raises(ValueError):
            mp_distance([], 0.5)

    def test_random_matrix_follows_the_law(self, random_matrix: BitMatrix) -> None:
        cov = standardized_covariance(random_matrix)
        assert cov.shape == (100, 100)
        assert np.allclose(np.diag(cov), 1.0)
        eigs, gamma = spectrum(random_matrix)
        assert gamma == pytest.approx(0.25)
        assert mp_distance(eigs, gamma) < 0.1

    def test_structured_matrix_does_not(self) -> None:
        eigs, gamma = spectrum(BitMatrix.zeros(40, 10))
        assert mp_distance(eigs, gamma) > 0.5

    def test_histogram_rows(self, random_matrix: BitMatrix, tmp_path: Path) -> None:
        eigs, gamma = spectrum(random_matrix)
        rows = spectral_histogram(eigs, gamma, bins=20)
        assert len(rows) == 20
        out = tmp_path / "spectrum.csv"
        write_spectral_csv(rows, out)
        assert out.read_text(encoding="utf-8").startswith("bin_center,empirical_density,mp_density")


class TestHammingAndRank:
    """Binomial weight statistics and submatrix ranks."""

    def test_binomial_samples_pass(self) -> None:
        values = np.random.default_rng(0).binomial(20, 0.5, size=2000)
        assert merged_chisquare(values, 20) > 1e-3

    def test_constant_values_fail(self) -> None:
        assert merged_chisquare(np.full(500, 3), 20) < 1e-6
        assert merged_chisquare([], 20) == 0.0

    def test_random_matrix_statistics(self, random_matrix: BitMatrix) -> None:
        report = hamming_statistics(random_matrix, seed=4)
        assert report.rows_pass and report.cols_pass and report.pairwise_pass
        assert sum(report.row_weight_hist) == 400
        assert len(report.col_weight_hist) == 401

    def test_rank_fraction(self, random_matrix: BitMatrix) -> None:
        assert submatrix_rank_fraction(random_matrix, trials=20, seed=1) >= 0.9
        assert submatrix_rank_fraction(BitMatrix.zeros(20, 20), trials=5) == 0.0
        with pytest.raises(ValueError):
            submatrix_rank_fraction(BitMatrix.zeros(4, 4))


class TestCriterion:
    """Combined verdict and depth scans."""

    def test_thresholds_validated(self) -> None:
        with pytest.raises(ValidationError):
            CriterionThresholds(mp_max_distance=0.0)

    def test_random_matrix_passes(self, random_matrix: BitMatrix) -> None:
        th = CriterionThresholds(mp_max_distance=0.1, rank_trials=30)
        report = criterion1(random_matrix, th, seed=2)
        assert report.overall
        assert report.model_dump()["overall"] is True

    def test_zero_matrix_fails(self) -> None:
        report = criterion1(BitMatrix.zeros(40, 10), CriterionThresholds(rank_trials=5))
        assert not report.mp_pass and not report.overall

    def test_layouts_for_connectivity(self) -> None:
        assert isinstance(layout_for("all-to-all", 5), AllToAllLayout)
        grid = layout_for("grid", 9)
        assert isinstance(grid, GridLayout) and grid.n_system == 9
        with pytest.raises(ValueError):
            layout_for("grid", 8)

    def test_generators_shapes(self) -> None:
        layout = AllToAllLayout(6)
        assert make_architecture("measurement-driven", layout, 1, seed=0).shape == (6, 6)
        assert make_architecture("ancilla-free", layout, 3, seed=0).shape == (6, 6)

    def test_depth_scan_rows(self) -> None:
        th = CriterionThresholds(rank_trials=5)
        rows = min_depth_scan(
            "ancilla-free", "all-to-all", [8], seed=1, seeds_per_depth=2, max_depth=4, thresholds=th
        )
        assert len(rows) == 1
        row = rows[0]
        assert row.size == 8 and row.generator == "ancilla-free"
        assert row.depth is None or 1 <= row.depth <= 4
