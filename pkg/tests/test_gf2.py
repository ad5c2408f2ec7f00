"""Tests for packed GF(2) linear algebra."""

from __future__ import annotations

import numpy as np
import pytest

from md_iqp.errors import DimensionMismatchError, SingularMatrixError
from md_iqp.linalg.gf2 import (
    BitMatrix,
    CxGateList,
    hstack,
    inverse_gf2,
    kolchin_limit,
    kolchin_probability,
    mat_mul_gf2,
    mat_vec_gf2,
    rank_gf2,
    replay_cx_circuit,
    synthesize_cx_circuit,
    vstack,
)


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator shared by the randomized checks."""
    return np.random.default_rng(1234)


def _random_invertible(n: int, rng: np.random.Generator) -> BitMatrix:
    while True:
        m = BitMatrix.random(n, n, rng)
        if rank_gf2(m) == n:
            return m


class TestBitMatrix:
    """Construction, views and serialization."""

    def test_dense_roundtrip_across_word_boundary(self, rng: np.random.Generator) -> None:
        dense = rng.integers(0, 2, size=(5, 130), dtype=np.uint8)
        m = BitMatrix.from_dense(dense)
        assert m.words.shape == (5, 3)
        assert np.array_equal(m.to_dense(), dense)

    def test_entries_must_be_bits(self) -> None:
        with pytest.raises(ValueError):
            BitMatrix.from_dense([[0, 2]])

    def test_from_rows_and_indexing(self) -> None:
        m = BitMatrix.from_rows(["101", "011"])
        assert m.shape == (2, 3)
        assert m[0, 0] == 1 and m[0, 1] == 0 and m[1, 2] == 1
        assert m.row_support(1) == (1, 2)
        assert m.popcount() == 4

    def test_transpose_and_json(self) -> None:
        m = BitMatrix.from_rows(["110", "001"])
        assert m.transpose().to_json()["data"] == ["10", "10", "01"]
        assert BitMatrix.from_json(m.to_json()) == m

    def test_bytes_layout(self) -> None:
        m = BitMatrix.identity(3)
        blob = m.to_bytes()
        assert blob[:8] == b"\x03\x00\x00\x00\x03\x00\x00\x00"
        assert BitMatrix.from_bytes(blob) == m

    def test_truncated_bytes_rejected(self) -> None:
        blob = BitMatrix.identity(3).to_bytes()
        with pytest.raises(DimensionMismatchError):
            BitMatrix.from_bytes(blob[:-8])

    def test_stacking(self) -> None:
        a = BitMatrix.from_rows(["10", "01"])
        b = BitMatrix.from_rows(["11"])
        assert vstack([a, b]).to_json()["data"] == ["10", "01", "11"]
        assert hstack([a, a]).to_json()["data"] == ["1010", "0101"]
        with pytest.raises(DimensionMismatchError):
            hstack([a, b])

    def test_nonzero_rows(self) -> None:
        m = BitMatrix.from_rows(["00", "10", "00", "01"])
        assert list(m.nonzero_rows()) == [1, 3]


class TestElimination:
    """Rank, inverse and products."""

    def test_rank_examples(self) -> None:
        assert rank_gf2(BitMatrix.from_rows(["11", "11"])) == 1
        assert rank_gf2(BitMatrix.identity(70)) == 70
        assert rank_gf2(BitMatrix.from_rows(["110", "011", "101"])) == 2

    def test_rank_of_empty_rejected(self) -> None:
        with pytest.raises(ValueError):
            rank_gf2(BitMatrix.zeros(0, 3))

    def test_inverse(self, rng: np.random.Generator) -> None:
        m = _random_invertible(12, rng)
        assert mat_mul_gf2(m, inverse_gf2(m)) == BitMatrix.identity(12)
        assert mat_mul_gf2(inverse_gf2(m), m) == BitMatrix.identity(12)

    def test_singular_inverse_rejected(self) -> None:
        with pytest.raises(SingularMatrixError):
            inverse_gf2(BitMatrix.from_rows(["11", "11"]))

    def test_product_matches_dense(self, rng: np.random.Generator) -> None:
        a = BitMatrix.random(7, 90, rng)
        b = BitMatrix.random(90, 5, rng)
        expected = (a.to_dense().astype(int) @ b.to_dense().astype(int)) % 2
        assert np.array_equal(mat_mul_gf2(a, b).to_dense(), expected)

    def test_product_shape_mismatch(self) -> None:
        with pytest.raises(DimensionMismatchError):
            mat_mul_gf2(BitMatrix.identity(2), BitMatrix.identity(3))

    def test_mat_vec(self) -> None:
        m = BitMatrix.from_rows(["110", "011"])
        assert list(mat_vec_gf2(m, [1, 1, 1])) == [0, 0]
        assert list(mat_vec_gf2(m, [1, 0, 0])) == [1, 0]


class TestCxSynthesis:
    """Replay and Gaussian-elimination synthesis of CX networks."""

    def test_replay_single_gate(self) -> None:
        m = replay_cx_circuit(CxGateList(3, ((0, 2),)))
        assert m.to_json()["data"] == ["100", "010", "101"]

    def test_invalid_gate_rejected(self) -> None:
        with pytest.raises(ValueError):
            CxGateList(2, ((1, 1),))
        with pytest.raises(ValueError):
            CxGateList(2, ((0, 2),))

    def test_synthesis_reproduces_matrix(self, rng: np.random.Generator) -> None:
        for n in (1, 2, 5, 9):
            m = _random_invertible(n, rng)
            assert replay_cx_circuit(synthesize_cx_circuit(m)) == m

    def test_identity_needs_no_gates(self) -> None:
        assert synthesize_cx_circuit(BitMatrix.identity(6)).count == 0

    def test_singular_synthesis_rejected(self) -> None:
        with pytest.raises(SingularMatrixError):
            synthesize_cx_circuit(BitMatrix.from_rows(["10", "10"]))


class TestKolchin:
    """Rank-deficiency probabilities of uniform square matrices."""

    def test_small_cases(self) -> None:
        assert kolchin_probability(1, 0) == pytest.approx(0.5)
        assert kolchin_probability(2, 0) == pytest.approx(6 / 16)
        assert kolchin_probability(2, 1) == pytest.approx(9 / 16)
        assert kolchin_probability(2, 2) == pytest.approx(1 / 16)

    def test_distribution_sums_to_one(self) -> None:
        assert sum(kolchin_probability(8, k) for k in range(9)) == pytest.approx(1.0)

    def test_limit(self) -> None:
        assert kolchin_limit(0) == pytest.approx(0.288788095, abs=1e-9)
        assert kolchin_probability(60, 1) == pytest.approx(kolchin_limit(1), rel=1e-9)

    def test_invalid_arguments(self) -> None:
        with pytest.raises(ValueError):
            kolchin_probability(3, 4)
        with pytest.raises(ValueError):
            kolchin_limit(-1)
