"""Bit-packed GF(2) matrices: rank, row reduction and kernel bases."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from app.core.exceptions import DimensionError

WORD_BITS = 64
_ONE = np.uint64(1)


def _words_for(cols: int) -> int:
    return max(1, (cols + WORD_BITS - 1) // WORD_BITS)


@dataclass(frozen=True)
class BinaryMatrix:
    """Row-major GF(2) matrix packed into 64-bit words (bit j of a row lives in word j // 64)."""

    rows: int
    cols: int
    words: np.ndarray

    def __post_init__(self) -> None:
        if self.words.shape != (self.rows, _words_for(self.cols)):
            raise DimensionError(
                f"word array shape {self.words.shape} does not fit a {self.rows}x{self.cols} matrix"
            )

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinaryMatrix":
        return cls(rows, cols, np.zeros((rows, _words_for(cols)), dtype=np.uint64))

    @classmethod
    def from_dense(cls, dense: np.ndarray | Sequence[Sequence[int]]) -> "BinaryMatrix":
        array = np.asarray(dense, dtype=np.uint8) & 1
        if array.ndim != 2:
            raise DimensionError("expected a 2-D 0/1 array")
        rows, cols = array.shape
        nwords = _words_for(cols)
        padded = np.zeros((rows, nwords * WORD_BITS), dtype=np.uint8)
        padded[:, :cols] = array
        packed = np.packbits(padded, axis=1, bitorder="little")
        words = packed.view("<u8").astype(np.uint64).reshape(rows, nwords)
        return cls(rows, cols, words)

    @classmethod
    def from_int_rows(cls, rows: Sequence[int], cols: int) -> "BinaryMatrix":
        """Build from integer bitsets (bit j = column j)."""
        nwords = _words_for(cols)
        nbytes = nwords * 8
        buffer = b"".join(int(r).to_bytes(nbytes, "little") for r in rows)
        words = np.frombuffer(buffer, dtype="<u8").astype(np.uint64).reshape(len(rows), nwords)
        return cls(len(rows), cols, words)

    def to_dense(self) -> np.ndarray:
        if self.rows == 0:
            return np.zeros((0, self.cols), dtype=np.uint8)
        as_bytes = self.words.astype("<u8").view(np.uint8).reshape(self.rows, -1)
        bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
        return bits[:, : self.cols].copy()

    def column(self, col: int) -> np.ndarray:
        word, bit = divmod(col, WORD_BITS)
        return ((self.words[:, word] >> np.uint64(bit)) & _ONE).astype(np.uint8)

    def multiply(self, vector: np.ndarray) -> np.ndarray:
        """Matrix-vector product over GF(2)."""
        vector = np.asarray(vector, dtype=np.uint8)
        if vector.shape != (self.cols,):
            raise DimensionError(f"vector of length {vector.shape} for {self.cols} columns")
        return (self.to_dense().astype(np.int64) @ vector.astype(np.int64) % 2).astype(np.uint8)

    def row_reduce(self) -> Tuple["BinaryMatrix", List[int]]:
        """Reduced row-echelon form and the pivot column of each nonzero row."""
        words = self.words.copy()
        pivots: List[int] = []
        row = 0
        for col in range(self.cols):
            if row == self.rows:
                break
            word, bit = divmod(col, WORD_BITS)
            shift = np.uint64(bit)
            below = np.flatnonzero((words[row:, word] >> shift) & _ONE)
            if below.size == 0:
                continue
            pivot = row + int(below[0])
            if pivot != row:
                words[[row, pivot]] = words[[pivot, row]]
            hits = ((words[:, word] >> shift) & _ONE).astype(bool)
            hits[row] = False
            if hits.any():
                words[hits] ^= words[row]
            pivots.append(col)
            row += 1
        return BinaryMatrix(self.rows, self.cols, words), pivots

    def rank(self) -> int:
        return len(self.row_reduce()[1])


def gf2_rank(matrix: BinaryMatrix) -> int:
    return matrix.rank()


def gf2_kernel(matrix: BinaryMatrix) -> np.ndarray:
    """Basis of {v : Hv = 0} as rows of a (cols - rank) x cols uint8 array."""
    reduced, pivots = matrix.row_reduce()
    pivot_set = set(pivots)
    free = [c for c in range(matrix.cols) if c not in pivot_set]
    basis = np.zeros((len(free), matrix.cols), dtype=np.uint8)
    if not free:
        return basis
    pivot_cols = np.asarray(pivots, dtype=np.int64)
    rank = len(pivots)
    for i, col in enumerate(free):
        basis[i, col] = 1
        if rank:
            entries = reduced.column(col)[:rank].astype(bool)
            basis[i, pivot_cols[entries]] = 1
    return basis
