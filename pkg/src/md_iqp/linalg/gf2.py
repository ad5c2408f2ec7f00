"""Bit-packed linear algebra over GF(2).

Rows are packed little-endian into 64-bit words: column ``j`` of a row lives in
word ``j // 64`` at bit ``j % 64``. Padding bits past ``cols`` are always zero.
Elimination routines XOR whole rows of words at a time.
"""

from __future__ import annotations

import math
import struct
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from md_iqp.errors import DimensionMismatchError, SingularMatrixError

WORD_BITS = 64
_HEADER = struct.Struct("<II")


def _n_words(cols: int) -> int:
    return max(1, (cols + WORD_BITS - 1) // WORD_BITS)


def _bit(col: int) -> tuple[int, np.uint64]:
    word, offset = divmod(col, WORD_BITS)
    return word, np.uint64(1 << offset)


def _pack(dense: np.ndarray) -> np.ndarray:
    rows, cols = dense.shape
    padded = np.zeros((rows, _n_words(cols) * WORD_BITS), dtype=np.uint8)
    padded[:, :cols] = dense
    packed = np.ascontiguousarray(np.packbits(padded, axis=1, bitorder="little"))
    return packed.view("<u8").astype(np.uint64)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Immutable binary matrix over GF(2).

    Attributes:
        rows: Number of rows.
        cols: Number of columns.
        words: Packed row-major entries, shape ``(rows, ceil(cols / 64))``.
    """

    rows: int
    cols: int
    words: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("BitMatrix dimensions must be non-negative")
        words = np.array(self.words, dtype=np.uint64, copy=True).reshape(
            self.rows, _n_words(self.cols)
        )
        words.flags.writeable = False
        object.__setattr__(self, "words", words)

    # Construction
    @classmethod
    def from_dense(cls, dense: Any) -> BitMatrix:
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("BitMatrix entries must be 0 or 1")
        rows, cols = arr.shape
        return cls(rows, cols, _pack(arr.astype(np.uint8)))

    @classmethod
    def from_rows(cls, rows: Sequence[str], cols: int | None = None) -> BitMatrix:
        """Build from row bitstrings such as ``["101", "011"]``."""
        width = cols if cols is not None else (len(rows[0]) if rows else 0)
        if any(len(r) != width for r in rows):
            raise DimensionMismatchError("row bitstrings must share one length")
        dense = np.array([[int(ch) for ch in r] for r in rows], dtype=np.uint8).reshape(
            len(rows), width
        )
        return cls.from_dense(dense)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols, np.zeros((rows, _n_words(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> BitMatrix:
        return cls.from_dense(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))

    # Views
    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_dense(self) -> np.ndarray:
        return _unpack(self.words, self.cols)

    def __getitem__(self, index: tuple[int, int]) -> int:
        r, c = index
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"entry {index} outside {self.shape}")
        word, mask = _bit(c)
        return int(bool(self.words[r, word] & mask))

    def row(self, r: int) -> np.ndarray:
        return _unpack(self.words[r : r + 1], self.cols)[0]

    def row_support(self, r: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.row(r)))

    def row_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=1, dtype=np.int64)

    def col_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0, dtype=np.int64)

    def popcount(self) -> int:
        return int(self.row_weights().sum())

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_dense(self.to_dense().T)

    @property
    def T(self) -> BitMatrix:  # noqa: N802
        return self.transpose()

    def take_rows(self, indices: Iterable[int]) -> BitMatrix:
        idx = np.fromiter(indices, dtype=np.int64)
        return BitMatrix(len(idx), self.cols, self.words[idx])

    def take_cols(self, indices: Iterable[int]) -> BitMatrix:
        idx = np.fromiter(indices, dtype=np.int64)
        return BitMatrix.from_dense(self.to_dense()[:, idx])

    def nonzero_rows(self) -> np.ndarray:
        return np.flatnonzero(self.words.any(axis=1))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.words, other.words))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"BitMatrix(rows={self.rows}, cols={self.cols}, ones={self.popcount()})"

    # Serialization
    def to_json(self) -> dict[str, Any]:
        dense = self.to_dense()
        return {
            "rows": self.rows,
            "cols": self.cols,
            "data": ["".join("1" if b else "0" for b in row) for row in dense],
        }

    @classmethod
    def from_json(cls, payload: dict[str, Any]) -> BitMatrix:
        rows, cols = int(payload["rows"]), int(payload["cols"])
        data = list(payload["data"])
        if len(data) != rows:
            raise DimensionMismatchError(f"expected {rows} row strings, got {len(data)}")
        return cls.from_rows(data, cols=cols) if rows else cls.zeros(0, cols)

    def to_bytes(self) -> bytes:
        return _HEADER.pack(self.rows, self.cols) + self.words.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> BitMatrix:
        rows, cols = _HEADER.unpack_from(blob)
        body = np.frombuffer(blob, dtype="<u8", offset=_HEADER.size)
        expected = rows * _n_words(cols)
        if body.size != expected:
            raise DimensionMismatchError(f"expected {expected} packed words, got {body.size}")
        return cls(rows, cols, body.astype(np.uint64))


def hstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
    if len({b.rows for b in blocks}) > 1:
        raise DimensionMismatchError("hstack needs equal row counts")
    return BitMatrix.from_dense(np.hstack([b.to_dense() for b in blocks]))


def vstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
    if len({b.cols for b in blocks}) > 1:
        raise DimensionMismatchError("vstack needs equal column counts")
    cols = blocks[0].cols
    return BitMatrix(sum(b.rows for b in blocks), cols, np.vstack([b.words for b in blocks]))


def rank_gf2(m: BitMatrix) -> int:
    """Rank over GF(2) by forward elimination on packed rows."""
    if m.rows == 0 or m.cols == 0:
        raise ValueError("rank_gf2 needs a nonempty matrix")
    w = m.words.copy()
    rank = 0
    for col in range(m.cols):
        if rank == m.rows:
            break
        word, mask = _bit(col)
        hits = np.flatnonzero(w[rank:, word] & mask)
        if hits.size == 0:
            continue
        pivot = rank + int(hits[0])
        if pivot != rank:
            w[[rank, pivot]] = w[[pivot, rank]]
        below = rank + 1 + np.flatnonzero(w[rank + 1 :, word] & mask)
        w[below] ^= w[rank]
        rank += 1
    return rank


def inverse_gf2(m: BitMatrix) -> BitMatrix:
    """Inverse by Gauss-Jordan elimination.

    Raises:
        SingularMatrixError: If ``m`` is not invertible.
    """
    if m.rows != m.cols:
        raise DimensionMismatchError(f"inverse needs a square matrix, got {m.shape}")
    n = m.rows
    a = m.words.copy()
    inv = BitMatrix.identity(n).words.copy()
    for col in range(n):
        word, mask = _bit(col)
        hits = np.flatnonzero(a[col:, word] & mask)
        if hits.size == 0:
            raise SingularMatrixError(f"matrix is singular (no pivot in column {col})")
        pivot = col + int(hits[0])
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            inv[[col, pivot]] = inv[[pivot, col]]
        others = np.flatnonzero(a[:, word] & mask)
        others = others[others != col]
        a[others] ^= a[col]
        inv[others] ^= inv[col]
    return BitMatrix(n, n, inv)


def mat_mul_gf2(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.cols != b.rows:
        raise DimensionMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    out = np.zeros((a.rows, _n_words(b.cols)), dtype=np.uint64)
    selector = a.to_dense().astype(bool)
    for k in range(a.cols):
        hit = selector[:, k]
        if hit.any():
            out[hit] ^= b.words[k]
    return BitMatrix(a.rows, b.cols, out)


def mat_vec_gf2(m: BitMatrix, v: Sequence[int] | np.ndarray) -> np.ndarray:
    vec = np.asarray(v, dtype=np.int64).reshape(-1)
    if vec.size != m.cols:
        raise DimensionMismatchError(f"vector of length {vec.size} for matrix {m.shape}")
    return ((m.to_dense().astype(np.int64) @ vec) % 2).astype(np.uint8)


@dataclass(frozen=True)
class CxGateList:
    """Ordered CX gates acting on ``n`` wires; each gate is ``(control, target)``."""

    n: int
    gates: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for c, t in self.gates:
            if c == t:
                raise ValueError(f"CX control equals target ({c})")
            if not (0 <= c < self.n and 0 <= t < self.n):
                raise ValueError(f"CX({c}, {t}) outside {self.n} wires")

    @property
    def count(self) -> int:
        return len(self.gates)


def replay_cx_circuit(gates: CxGateList) -> BitMatrix:
    """GF(2) action of a CX list: ``x_t ^= x_c`` for each gate in order."""
    g = BitMatrix.identity(gates.n).words.copy()
    for c, t in gates.gates:
        g[t] ^= g[c]
    return BitMatrix(gates.n, gates.n, g)


def synthesize_cx_circuit(m: BitMatrix) -> CxGateList:
    """Synthesize an invertible GF(2) matrix as CX gates by Gaussian elimination.

    Row additions that reduce ``m`` to the identity are recorded in elimination
    order (forward sweep, then backward sweep). Each addition is an involution,
    so the circuit is the recorded list played back in reverse.

    Args:
        m: Square matrix, invertible over GF(2).

    Returns:
        Gate list whose replay on the identity reproduces ``m``.

    Raises:
        SingularMatrixError: If ``m`` is singular.
    """
    if m.rows != m.cols:
        raise DimensionMismatchError(f"synthesis needs a square matrix, got {m.shape}")
    n = m.rows
    w = m.words.copy()
    ops: list[tuple[int, int]] = []

    def add(target: int, source: int) -> None:
        w[target] ^= w[source]
        ops.append((source, target))

    for col in range(n):
        word, mask = _bit(col)
        if not w[col, word] & mask:
            below = np.flatnonzero(w[col + 1 :, word] & mask)
            if below.size == 0:
                raise SingularMatrixError(f"matrix is singular (no pivot in column {col})")
            add(col, col + 1 + int(below[0]))
        for r in col + 1 + np.flatnonzero(w[col + 1 :, word] & mask):
            add(int(r), col)
    for col in reversed(range(n)):
        word, mask = _bit(col)
        for r in np.flatnonzero(w[:col, word] & mask):
            add(int(r), col)
    return CxGateList(n=n, gates=tuple(reversed(ops)))


def kolchin_probability(n: int, k: int) -> float:
    """Exact probability that a uniform ``n x n`` GF(2) matrix has rank ``n - k``.

    The ordered sum over ``0 <= i_1 <= ... <= i_k <= n - k`` of ``2^-(i_1+...+i_k)``
    is accumulated by dynamic programming over (count, largest index).
    """
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    log_p = -(k * k) * math.log(2.0)
    log_p += math.fsum(math.log1p(-(2.0 ** -(n - ell))) for ell in range(n - k))
    sums = [1.0] + [0.0] * k
    for j in range(n - k + 1):
        weight = 2.0**-j
        for count in range(1, k + 1):
            sums[count] += sums[count - 1] * weight
    return math.exp(log_p) * sums[k]


def kolchin_limit(k: int) -> float:
    """Limit of :func:`kolchin_probability` as ``n`` grows, for fixed deficit ``k``."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    log_p = -(k * k) * math.log(2.0)
    i = k + 1
    while 2.0**-i > 1e-18:
        log_p += math.log1p(-(2.0**-i))
        i += 1
    log_p -= math.fsum(math.log1p(-(2.0**-i)) for i in range(1, k + 1))
    return math.exp(log_p)
