"""
Dense bit-packed linear algebra over GF(2).

A `BinaryMatrix` keeps each row as a run of 64-bit words, least significant
bit first, with the padding bits of the last word always zero. Instances are
immutable, so every function here is pure and safe to call from several
threads at once.

Example:
    >>> h = BinaryMatrix(["110", "011"])
    >>> h
    BinaryMatrix(['110', '011'])
    >>> rank(h)
    2
    >>> [v.tolist() for v in kernel_basis(h)]
    [[1, 1, 1]]
    >>> matmul(h, h.T)
    BinaryMatrix(['01', '10'])
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from qmem.errors import CapacityError, DimensionError, DomainError

logger = logging.getLogger(__name__)

WORD_BITS = 64

#: largest number of entries a matrix may hold
MAX_BITS = 1 << 32

RowLike = Union[str, Sequence[int], np.ndarray]


def _n_words(cols: int) -> int:
    return (cols + WORD_BITS - 1) // WORD_BITS


def _pack(dense: np.ndarray) -> np.ndarray:
    rows, cols = dense.shape
    n_words = _n_words(cols)
    if n_words == 0:
        return np.zeros((rows, 0), dtype=np.uint64)
    padded = np.zeros((rows, n_words * WORD_BITS), dtype=np.uint8)
    padded[:, :cols] = dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    rows = words.shape[0]
    if words.shape[1] == 0:
        return np.zeros((rows, cols), dtype=np.uint8)
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


def _check_size(rows: int, cols: int) -> None:
    if rows < 0 or cols < 0:
        raise DimensionError(f"negative shape ({rows}, {cols})")
    if rows * cols > MAX_BITS:
        raise CapacityError(
            f"a {rows}x{cols} matrix exceeds the packed limit of {MAX_BITS} bits"
        )


def _as_bits(values: Union[RowLike, Iterable[int]]) -> np.ndarray:
    if isinstance(values, str):
        if set(values) - {"0", "1"}:
            raise DomainError(f"row {values!r} holds characters other than 0 and 1")
        return np.fromiter((ch == "1" for ch in values), dtype=np.uint8, count=len(values))
    arr = np.asarray(values)
    if arr.dtype == bool:
        return arr.astype(np.uint8)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise DomainError(f"entries must be 0 or 1, got {arr.tolist()!r}")
    return arr.astype(np.uint8)


class BinaryMatrix:
    """
    An immutable matrix over GF(2).

    Rows may be given as '0'/'1' strings, as sequences of ints or as a 2-D
    array. An empty row list needs `cols` to fix the width.

    Example:
        >>> BinaryMatrix([[1, 0], [1, 1]]).shape
        (2, 2)
        >>> BinaryMatrix([], cols=3).shape
        (0, 3)
        >>> BinaryMatrix(["10", "1"])
        Traceback (most recent call last):
        ...
        qmem.errors.DimensionError: row 1 has 1 entries, expected 2
    """

    __slots__ = ("_rows", "_cols", "_words")

    def __init__(self, rows: Iterable[RowLike] = (), cols: Optional[int] = None):
        if isinstance(rows, np.ndarray) and rows.ndim == 2:
            dense = _as_bits(rows)
        else:
            bit_rows = [_as_bits(row) for row in rows]
            if cols is None:
                if not bit_rows:
                    cols = 0
                else:
                    cols = len(bit_rows[0])
            for i, row in enumerate(bit_rows):
                if row.ndim != 1 or len(row) != cols:
                    raise DimensionError(f"row {i} has {row.size} entries, expected {cols}")
            dense = (
                np.stack(bit_rows) if bit_rows else np.zeros((0, cols), dtype=np.uint8)
            )
        if cols is not None and dense.shape[1] != cols:
            raise DimensionError(f"got {dense.shape[1]} columns, expected {cols}")
        _check_size(*dense.shape)
        self._rows, self._cols = (int(s) for s in dense.shape)
        self._words = _pack(dense)
        self._words.setflags(write=False)

    @classmethod
    def _from_words(cls, rows: int, cols: int, words: np.ndarray) -> "BinaryMatrix":
        self = object.__new__(cls)
        self._rows = rows
        self._cols = cols
        self._words = np.array(words, dtype=np.uint64, copy=True).reshape(
            rows, _n_words(cols)
        )
        self._words.setflags(write=False)
        return self

    @classmethod
    def from_dense(cls, dense: Union[np.ndarray, Sequence[Sequence[int]]]) -> "BinaryMatrix":
        """
        Build from any 2-D array of zeros and ones.

        Example:
            >>> BinaryMatrix.from_dense(np.eye(2, dtype=int))
            BinaryMatrix(['10', '01'])
        """
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-D array, got {arr.ndim} dimensions")
        return cls(arr)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinaryMatrix":
        _check_size(rows, cols)
        return cls._from_words(rows, cols, np.zeros((rows, _n_words(cols)), np.uint64))

    @classmethod
    def identity(cls, size: int) -> "BinaryMatrix":
        """
        Example:
            >>> BinaryMatrix.identity(3)
            BinaryMatrix(['100', '010', '001'])
        """
        _check_size(size, size)
        return cls(np.eye(size, dtype=np.uint8))

    @classmethod
    def from_text(cls, text: str) -> "BinaryMatrix":
        """
        Parse newline-separated rows of '0'/'1' characters; blank lines are
        skipped.

        Example:
            >>> BinaryMatrix.from_text("11\\n01\\n")
            BinaryMatrix(['11', '01'])
        """
        return cls([line.strip() for line in text.splitlines() if line.strip()])

    def to_text(self) -> str:
        return "\n".join(self._row_strings())

    def _row_strings(self) -> List[str]:
        dense = self.to_dense()
        return ["".join("1" if bit else "0" for bit in row) for row in dense]

    def to_dense(self) -> np.ndarray:
        """A fresh ``uint8`` array of zeros and ones."""
        return _unpack(self._words, self._cols)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def words(self) -> np.ndarray:
        """The read-only packed storage, one row of words per matrix row."""
        return self._words

    @property
    def T(self) -> "BinaryMatrix":
        return self.transpose()

    def transpose(self) -> "BinaryMatrix":
        return BinaryMatrix(self.to_dense().T)

    def row(self, index: int) -> np.ndarray:
        if not -self._rows <= index < self._rows:
            raise IndexError(f"row {index} out of range")
        return _unpack(self._words[[index]], self._cols)[0]

    def __getitem__(self, key: Tuple[int, int]) -> int:
        i, j = key
        if not (0 <= i < self._rows and 0 <= j < self._cols):
            raise IndexError(f"entry {key} out of range for shape {self.shape}")
        word = int(self._words[i, j // WORD_BITS])
        return (word >> (j % WORD_BITS)) & 1

    def is_zero(self) -> bool:
        return not self._words.any()

    def row_weights(self) -> np.ndarray:
        """Hamming weight of every row."""
        return self.to_dense().sum(axis=1, dtype=np.int64)

    def __len__(self) -> int:
        return self._rows

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._rows, self._cols, self._words.tobytes()))

    def __repr__(self) -> str:
        if self._rows == 0:
            return f"{self.__class__.__name__}([], cols={self._cols})"
        return f"{self.__class__.__name__}({self._row_strings()!r})"


def _as_vector(v: Union[RowLike, Iterable[int]], length: int) -> np.ndarray:
    bits = _as_bits(v if isinstance(v, (str, np.ndarray)) else list(v))
    if bits.ndim != 1 or bits.size != length:
        raise DimensionError(f"vector of length {bits.size} does not match {length} columns")
    return bits


def vstack(*mats: BinaryMatrix) -> BinaryMatrix:
    """
    Example:
        >>> vstack(BinaryMatrix(["10"]), BinaryMatrix(["11"]))
        BinaryMatrix(['10', '11'])
    """
    if not mats:
        raise DimensionError("nothing to stack")
    cols = mats[0].cols
    for m in mats:
        if m.cols != cols:
            raise DimensionError(f"cannot stack {m.cols} columns onto {cols}")
    rows = sum(m.rows for m in mats)
    _check_size(rows, cols)
    return BinaryMatrix._from_words(rows, cols, np.concatenate([m.words for m in mats]))


def hstack(*mats: BinaryMatrix) -> BinaryMatrix:
    """
    Example:
        >>> hstack(BinaryMatrix(["1", "0"]), BinaryMatrix(["01", "10"]))
        BinaryMatrix(['101', '010'])
    """
    if not mats:
        raise DimensionError("nothing to stack")
    rows = mats[0].rows
    for m in mats:
        if m.rows != rows:
            raise DimensionError(f"cannot place {m.rows} rows beside {rows}")
    cols = sum(m.cols for m in mats)
    _check_size(rows, cols)
    return BinaryMatrix(np.concatenate([m.to_dense() for m in mats], axis=1), cols=cols)


def matmul(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    """
    Matrix product over GF(2): row i of the result is the XOR of the rows of
    `b` selected by row i of `a`.

    Example:
        >>> matmul(BinaryMatrix(["11"]), BinaryMatrix(["1", "1"]))
        BinaryMatrix(['0'])
    """
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    selectors = a.to_dense().astype(bool)
    out = np.zeros((a.rows, _n_words(b.cols)), dtype=np.uint64)
    for i, chosen in enumerate(selectors):
        if chosen.any():
            out[i] = np.bitwise_xor.reduce(b.words[chosen], axis=0)
    return BinaryMatrix._from_words(a.rows, b.cols, out)


def kron(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    """
    Kronecker product.

    Example:
        >>> kron(BinaryMatrix.identity(2), BinaryMatrix(["11"]))
        BinaryMatrix(['1100', '0011'])
        >>> kron(BinaryMatrix(["11"]), BinaryMatrix.identity(2))
        BinaryMatrix(['1010', '0101'])
    """
    rows, cols = a.rows * b.rows, a.cols * b.cols
    _check_size(rows, cols)
    dense = np.kron(a.to_dense(), b.to_dense()).reshape(rows, cols)
    return BinaryMatrix(dense, cols=cols)


def row_reduce(a: BinaryMatrix) -> Tuple[BinaryMatrix, List[int]]:
    """
    Reduced row echelon form and its pivot columns.

    Columns are scanned left to right and the first row holding a one below
    the current pivot row becomes the pivot, so the output is deterministic.

    Example:
        >>> r, pivots = row_reduce(BinaryMatrix(["011", "110"]))
        >>> r, pivots
        (BinaryMatrix(['101', '011']), [0, 1])
    """
    work = np.array(a.words, copy=True)
    pivots: List[int] = []
    pivot_row = 0
    for col in range(a.cols):
        if pivot_row == a.rows:
            break
        w = col // WORD_BITS
        mask = np.uint64(1) << np.uint64(col % WORD_BITS)
        candidates = np.flatnonzero(work[pivot_row:, w] & mask)
        if candidates.size == 0:
            continue
        chosen = pivot_row + int(candidates[0])
        if chosen != pivot_row:
            work[[pivot_row, chosen]] = work[[chosen, pivot_row]]
        hits = np.flatnonzero(work[:, w] & mask)
        hits = hits[hits != pivot_row]
        if hits.size:
            work[hits] ^= work[pivot_row]
        pivots.append(col)
        pivot_row += 1
    logger.debug("row reduced %dx%d matrix to rank %d", a.rows, a.cols, len(pivots))
    return BinaryMatrix._from_words(a.rows, a.cols, work), pivots


def rank(a: BinaryMatrix) -> int:
    """
    Example:
        >>> rank(BinaryMatrix(["11", "11"]))
        1
        >>> rank(BinaryMatrix.identity(3))
        3
    """
    return len(row_reduce(a)[1])


def kernel_basis(a: BinaryMatrix) -> List[np.ndarray]:
    """
    Basis of the right null space, one vector per free column in ascending
    column order.

    Example:
        >>> [v.tolist() for v in kernel_basis(BinaryMatrix(["11"]))]
        [[1, 1]]
        >>> kernel_basis(BinaryMatrix.identity(2))
        []
        >>> len(kernel_basis(BinaryMatrix.zeros(1, 3)))
        3
    """
    reduced, pivots = row_reduce(a)
    dense = reduced.to_dense()[: len(pivots)]
    pivot_set = set(pivots)
    basis = []
    for free in range(a.cols):
        if free in pivot_set:
            continue
        v = np.zeros(a.cols, dtype=np.uint8)
        v[free] = 1
        if pivots:
            v[pivots] = dense[:, free]
        basis.append(v)
    return basis


def kernel_matrix(a: BinaryMatrix) -> BinaryMatrix:
    """The kernel basis as the rows of a matrix."""
    return BinaryMatrix(kernel_basis(a), cols=a.cols)


def kernel_intersection(a: BinaryMatrix, b: BinaryMatrix) -> List[np.ndarray]:
    """
    Basis of ``ker(a) ∩ ker(b)``, the kernel of ``a`` stacked over ``b``.

    Example:
        >>> len(kernel_intersection(BinaryMatrix(["11"]), BinaryMatrix(["11"])))
        1
        >>> kernel_intersection(BinaryMatrix(["10"]), BinaryMatrix(["01"]))
        []
    """
    if a.cols != b.cols:
        raise DimensionError(f"kernels live in different spaces: {a.cols} vs {b.cols} columns")
    return kernel_basis(vstack(a, b))


def row_space_contains(a: BinaryMatrix, v: Union[RowLike, Iterable[int]]) -> bool:
    """
    Whether `v` is a GF(2) combination of the rows of `a`.

    Example:
        >>> row_space_contains(BinaryMatrix(["11"]), [1, 0])
        False
        >>> row_space_contains(BinaryMatrix(["11"]), "00")
        True
    """
    bits = _as_vector(v, a.cols)
    return rank(vstack(a, BinaryMatrix([bits], cols=a.cols))) == rank(a)


def apply(a: BinaryMatrix, v: Union[RowLike, Iterable[int]]) -> np.ndarray:
    """
    The product ``a @ v`` for a single vector.

    Example:
        >>> apply(BinaryMatrix(["110", "011"]), [1, 1, 1]).tolist()
        [0, 0]
    """
    bits = _as_vector(v, a.cols)
    return ((a.to_dense().astype(np.int64) @ bits.astype(np.int64)) & 1).astype(np.uint8)
