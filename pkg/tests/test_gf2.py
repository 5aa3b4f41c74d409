import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qmargulis.gf2 import (
    BinMatrix,
    InfeasibleSystem,
    from_alist,
    pack_bits,
    read_alist,
    to_alist,
    unpack_bits,
    write_alist,
)

from oracles import dense_rank_gf2, dense_span


def binary_matrices(max_rows=8, max_cols=12):
    shapes = st.tuples(st.integers(1, max_rows), st.integers(1, max_cols))
    return shapes.flatmap(lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


@settings(max_examples=150, deadline=None)
@given(binary_matrices())
def test_rank_matches_dense_elimination(a):
    assert BinMatrix.from_dense(a).rank() == dense_rank_gf2(a)


@settings(max_examples=100, deadline=None)
@given(binary_matrices())
def test_kernel_basis_is_complete(a):
    m = BinMatrix.from_dense(a)
    ker = m.kernel_basis()
    assert ker.nrows == a.shape[1] - m.rank()
    if ker.nrows:
        assert not np.any((a.astype(int) @ ker.to_dense().T.astype(int)) % 2)
        assert ker.rank() == ker.nrows


@settings(max_examples=100, deadline=None)
@given(binary_matrices(max_rows=6, max_cols=8), st.data())
def test_row_space_membership_matches_span(a, data):
    m = BinMatrix.from_dense(a)
    span = dense_span(a)
    v = data.draw(arrays(np.uint8, a.shape[1], elements=st.integers(0, 1)))
    expected = v.tobytes() in span
    assert m.in_row_space(v) == expected
    assert m.row_space_reducer().contains(v) == expected


@settings(max_examples=100, deadline=None)
@given(binary_matrices(max_rows=6, max_cols=10), st.data())
def test_solve_particular(a, data):
    m = BinMatrix.from_dense(a)
    x_true = data.draw(arrays(np.uint8, a.shape[1], elements=st.integers(0, 1)))
    s = m.mul_vec(x_true)
    x = m.solve_particular(s)
    assert np.array_equal(m.mul_vec(x), s)


def test_solve_infeasible():
    m = BinMatrix.from_dense([[1, 1], [1, 1]])
    with pytest.raises(InfeasibleSystem):
        m.solve_particular([1, 0])


@settings(max_examples=80, deadline=None)
@given(binary_matrices(max_rows=5, max_cols=7), binary_matrices(max_rows=7, max_cols=5))
def test_multiply_matches_numpy(a, b):
    if a.shape[1] != b.shape[0]:
        b = np.resize(b, (a.shape[1], b.shape[1]))
    got = BinMatrix.from_dense(a).multiply(BinMatrix.from_dense(b)).to_dense()
    assert np.array_equal(got, (a.astype(int) @ b.astype(int)) % 2)


def test_multiply_shape_mismatch():
    with pytest.raises(ValueError):
        BinMatrix.zeros(2, 3).multiply(BinMatrix.zeros(2, 3))


@settings(max_examples=60, deadline=None)
@given(binary_matrices())
def test_transpose_stack_and_add(a):
    m = BinMatrix.from_dense(a)
    assert np.array_equal(m.T.to_dense(), a.T)
    assert m.add(m).is_zero()
    assert np.array_equal(m.hstack(m).to_dense(), np.hstack([a, a]))
    assert np.array_equal(m.vstack(m).to_dense(), np.vstack([a, a]))
    assert np.array_equal(m.row_weights(), a.sum(axis=1))
    assert np.array_equal(m.col_weights(), a.sum(axis=0))


@settings(max_examples=60, deadline=None)
@given(binary_matrices())
def test_json_and_alist_round_trip(a):
    m = BinMatrix.from_dense(a)
    assert BinMatrix.from_json(m.to_json()) == m
    assert from_alist(to_alist(m)) == m


def test_pack_unpack():
    v = np.array([1, 0, 1, 1, 0, 0, 0, 0, 1], dtype=np.uint8)
    assert pack_bits(v) == 0b100001101
    assert np.array_equal(unpack_bits(pack_bits(v), v.size), v)


def test_from_positions_cancels_repeats():
    m = BinMatrix.from_positions(2, 3, [0, 0, 1], [1, 1, 2])
    assert np.array_equal(m.to_dense(), [[0, 0, 0], [0, 0, 1]])


def test_identity_and_validation():
    assert BinMatrix.identity(3).rank() == 3
    with pytest.raises(ValueError):
        BinMatrix.from_dense([[0, 2]])
    with pytest.raises(ValueError):
        BinMatrix([8], 3)


def test_alist_file_round_trip(tmp_path):
    m = BinMatrix.from_dense([[1, 1, 0, 1], [0, 1, 1, 0], [1, 0, 0, 1]])
    write_alist(m, tmp_path / "m.alist")
    assert read_alist(tmp_path / "m.alist") == m
    text = to_alist(m)
    assert text.splitlines()[0] == "4 3"


@pytest.mark.parametrize(
    "text",
    [
        "3",
        "2 1\n1 2\n1 1\n2\n1\n",  # column lists truncated
        "2 1\n1 2\n1 1\n2\n1\n1\n1 0\n",  # row list disagrees with columns
        "2 1\n1 2\n2 1\n2\n1\n1\n1 2\n",  # declared column degree wrong
    ],
)
def test_alist_rejects_malformed(text):
    with pytest.raises(ValueError):
        from_alist(text)


def test_json_rejects_wrong_format():
    d = BinMatrix.identity(2).to_json_dict()
    d["format"] = "other/1"
    with pytest.raises(ValueError):
        BinMatrix.from_json_dict(d)
