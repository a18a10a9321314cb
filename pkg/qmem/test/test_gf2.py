import numpy as np
import pytest

from qmem.errors import CapacityError, DimensionError, DomainError
from qmem.gf2 import (
    BinaryMatrix,
    apply,
    hstack,
    kernel_basis,
    kernel_intersection,
    kernel_matrix,
    kron,
    matmul,
    rank,
    row_reduce,
    row_space_contains,
    vstack,
)


def random_matrix(rng, rows, cols):
    return BinaryMatrix(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))


def test_text_forms():
    h = BinaryMatrix(["1011", "0110"])
    assert h.to_text() == "1011\n0110"
    assert BinaryMatrix.from_text(h.to_text()) == h
    assert h[0, 2] == 1 and h[1, 0] == 0
    assert h.row(1).tolist() == [0, 1, 1, 0]
    assert h.row_weights().tolist() == [3, 2]
    assert len(h) == 2


def test_wide_rows_cross_word_boundary():
    bits = np.zeros(130, dtype=np.uint8)
    bits[[0, 63, 64, 129]] = 1
    h = BinaryMatrix([bits])
    assert h.words.shape == (1, 3)
    assert h.to_dense()[0].tolist() == bits.tolist()
    assert h.T.shape == (130, 1)
    assert rank(h) == 1


def test_immutable_storage():
    h = BinaryMatrix(["11"])
    with pytest.raises(ValueError):
        h.words[0, 0] = 0


def test_equality_and_hash():
    a = BinaryMatrix(["10", "01"])
    assert a == BinaryMatrix.identity(2)
    assert hash(a) == hash(BinaryMatrix.identity(2))
    assert a != BinaryMatrix(["10"])
    assert BinaryMatrix([], cols=2) != BinaryMatrix([], cols=3)


@pytest.mark.parametrize("row", ["102", [0, 2], "1a"])
def test_non_binary_entries(row):
    with pytest.raises(DomainError):
        BinaryMatrix([row])


def test_shape_errors():
    with pytest.raises(DimensionError):
        BinaryMatrix(["10", "1"])
    with pytest.raises(DimensionError):
        matmul(BinaryMatrix(["10"]), BinaryMatrix(["10"]))
    with pytest.raises(DimensionError):
        vstack(BinaryMatrix(["10"]), BinaryMatrix(["1"]))
    with pytest.raises(DimensionError):
        hstack(BinaryMatrix(["1"]), BinaryMatrix(["1", "0"]))
    with pytest.raises(DimensionError):
        kernel_intersection(BinaryMatrix(["1"]), BinaryMatrix(["11"]))
    with pytest.raises(DimensionError):
        apply(BinaryMatrix(["11"]), [1])


def test_kron_capacity():
    big = BinaryMatrix.zeros(1 << 16, 1)
    with pytest.raises(CapacityError):
        kron(big, BinaryMatrix.zeros(1 << 16, 2))


def test_row_reduce_is_deterministic():
    r, pivots = row_reduce(BinaryMatrix(["011", "110", "101"]))
    assert pivots == [0, 1]
    assert r == BinaryMatrix(["101", "011", "000"])


def test_empty_and_zero_matrices():
    empty = BinaryMatrix([], cols=4)
    assert rank(empty) == 0
    assert len(kernel_basis(empty)) == 4
    assert rank(BinaryMatrix.zeros(3, 5)) == 0
    assert BinaryMatrix.zeros(2, 2).is_zero()


def test_kernel_basis_order():
    # free columns 1 and 3, in that order
    basis = kernel_basis(BinaryMatrix(["1100", "0011"]))
    assert [v.tolist() for v in basis] == [[1, 1, 0, 0], [0, 0, 1, 1]]


def test_rank_nullity_on_random_matrices():
    rng = np.random.default_rng(7)
    for _ in range(50):
        rows, cols = rng.integers(1, 12, size=2)
        a = random_matrix(rng, int(rows), int(cols))
        basis = kernel_basis(a)
        assert rank(a) + len(basis) == a.cols
        for v in basis:
            assert not apply(a, v).any()
        if basis:
            assert rank(kernel_matrix(a)) == len(basis)


def test_matmul_matches_dense():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = random_matrix(rng, 5, 70)
        b = random_matrix(rng, 70, 9)
        expected = (a.to_dense().astype(int) @ b.to_dense().astype(int)) % 2
        assert np.array_equal(matmul(a, b).to_dense(), expected)


def test_transpose_twice():
    rng = np.random.default_rng(11)
    a = random_matrix(rng, 4, 90)
    assert a.T.T == a
    assert np.array_equal(a.T.to_dense(), a.to_dense().T)


def test_kernel_intersection():
    a = BinaryMatrix(["1100", "0011"])
    b = BinaryMatrix(["1111"])
    basis = kernel_intersection(a, b)
    assert len(basis) == 2
    for v in basis:
        assert not apply(a, v).any() and not apply(b, v).any()


def test_row_space_membership():
    a = BinaryMatrix(["1100", "0110"])
    assert row_space_contains(a, "1010")
    assert not row_space_contains(a, "0001")
    assert row_space_contains(a, [0, 0, 0, 0])


def _dense_rank(dense):
    """Scalar Gaussian elimination over GF(2)."""
    rows = [list(map(int, r)) for r in dense]
    rank_, cols = 0, len(rows[0]) if rows else 0
    for c in range(cols):
        pivot = next((i for i in range(rank_, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[rank_], rows[pivot] = rows[pivot], rows[rank_]
        for i in range(len(rows)):
            if i != rank_ and rows[i][c]:
                rows[i] = [x ^ y for x, y in zip(rows[i], rows[rank_])]
        rank_ += 1
    return rank_


def test_rank_matches_scalar_elimination_up_to_64():
    rng = np.random.default_rng(64)
    for size in (1, 7, 31, 63, 64):
        for density in (0.05, 0.5):
            dense = (rng.random((size, size)) < density).astype(np.uint8)
            assert rank(BinaryMatrix(dense)) == _dense_rank(dense)
    low = random_matrix(rng, 64, 10).to_dense().astype(int) @ random_matrix(rng, 10, 64).to_dense()
    assert rank(BinaryMatrix((low % 2).astype(np.uint8))) <= 10


def test_rank_of_kron_is_product_of_ranks():
    rng = np.random.default_rng(21)
    for _ in range(30):
        ra, ca, rb, cb = (int(x) for x in rng.integers(1, 7, size=4))
        a, b = random_matrix(rng, ra, ca), random_matrix(rng, rb, cb)
        assert rank(kron(a, b)) == rank(a) * rank(b)


def test_kernel_intersection_against_enumeration():
    rng = np.random.default_rng(88)
    vectors = (np.arange(256)[:, None] >> np.arange(8)) & 1
    for _ in range(100):
        a, b = random_matrix(rng, 8, 8), random_matrix(rng, 8, 8)
        both = ((vectors @ a.to_dense().T.astype(int)) % 2 == 0).all(axis=1)
        both &= ((vectors @ b.to_dense().T.astype(int)) % 2 == 0).all(axis=1)
        basis = kernel_intersection(a, b)
        assert 2 ** len(basis) == int(both.sum())
        for v in basis:
            assert both[int(np.dot(np.asarray(v, dtype=int), 1 << np.arange(8)))]
        if basis:
            assert rank(BinaryMatrix(basis)) == len(basis)
