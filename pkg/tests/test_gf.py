from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffma import gf
from ffma.gf import FfMatrix, FfVector, ModulusMismatch, ShapeMismatch


def span_size(a: np.ndarray, p: int) -> int:
    """Number of distinct vectors in the row space, by enumerating all combinations."""
    rows = a.shape[0]
    coeffs = np.array(list(itertools.product(range(p), repeat=rows)), dtype=np.int64)
    return np.unique((coeffs @ a) % p, axis=0).shape[0]


@st.composite
def matrices(draw, max_rows=4, max_cols=5, primes=(2, 3, 7)):
    p = draw(st.sampled_from(primes))
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    vals = draw(st.lists(st.integers(0, p - 1), min_size=r * c, max_size=r * c))
    return FfMatrix(np.array(vals).reshape(r, c), p)


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_matches_row_space_size(a):
    # |row space| = p^rank is an independent characterisation of rank
    assert a.p ** gf.rank(a) == span_size(a.a, a.p)


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_nullspace_is_annihilated_and_complementary(a):
    ns = gf.nullspace(a)
    dim = 0 if ns is None else ns.rows
    assert dim == a.cols - gf.rank(a)
    if ns is not None:
        assert (a @ ns.T).is_zero()
        assert gf.rank(ns) == dim


@settings(max_examples=100, deadline=None)
@given(st.sampled_from((2, 3, 7)), st.integers(1, 4), st.data())
def test_inverse_roundtrip(p, n, data):
    vals = data.draw(st.lists(st.integers(0, p - 1), min_size=n * n, max_size=n * n))
    a = FfMatrix(np.array(vals).reshape(n, n), p)
    if gf.rank(a) < n:
        with pytest.raises(ValueError):
            gf.inverse(a)
    else:
        inv = gf.inverse(a)
        assert a @ inv == gf.identity(n, p)
        assert inv @ a == gf.identity(n, p)


@settings(max_examples=100, deadline=None)
@given(matrices(), st.data())
def test_solve_left_recovers_a_preimage(a, data):
    x = FfVector(data.draw(st.lists(st.integers(0, a.p - 1), min_size=a.rows, max_size=a.rows)), a.p)
    w = x @ a
    sol = gf.solve_left(a, w)
    assert sol is not None and sol @ a == w


def test_solve_left_inconsistent():
    a = FfMatrix([[1, 0, 0], [0, 1, 0]], 3)
    assert gf.solve_left(a, FfVector([0, 0, 1], 3)) is None


@settings(max_examples=100, deadline=None)
@given(matrices(max_rows=3, max_cols=3, primes=(3,)), matrices(max_rows=3, max_cols=3, primes=(3,)))
def test_kronecker_mixed_product(a, b):
    # (A⊗B)(A⊗B)^T = (AA^T)⊗(BB^T)
    k = gf.kronecker(a, b)
    assert k @ k.T == gf.kronecker(a @ a.T, b @ b.T)


@given(st.sampled_from((2, 3, 7)), st.integers(1, 6))
def test_inv_mod(p, x):
    if x % p == 0:
        with pytest.raises(ZeroDivisionError):
            gf.inv_mod(x, p)
    else:
        assert (x * gf.inv_mod(x, p)) % p == 1


def test_vector_arithmetic():
    u = FfVector.from_str("1021", 3)
    v = FfVector.from_str("2212", 3)
    assert str(u + v) == "0200"
    assert str(u - v) == "2112"
    assert str(-u) == "2012"
    assert str(2 * u) == "2012"
    assert gf.dot(u, v) == (2 + 0 + 2 + 2) % 3
    assert str(gf.vsum([u, v, u])) == "1221"
    assert str(gf.concat([u, v])) == "10212212"
    assert [str(b) for b in gf.concat([u, v]).blocks(4)] == ["1021", "2212"]


def test_values_are_immutable():
    u = FfVector([1, 0], 2)
    with pytest.raises(ValueError):
        u.elems[0] = 0
    a = FfMatrix([[1]], 2)
    with pytest.raises(ValueError):
        a.a[0, 0] = 0


def test_mismatches_raise():
    with pytest.raises(ModulusMismatch):
        FfVector([1], 2) + FfVector([1], 3)
    with pytest.raises(ShapeMismatch):
        FfVector([1, 1], 2) + FfVector([1], 2)
    with pytest.raises(ShapeMismatch):
        FfMatrix([[1, 0]], 2) @ FfMatrix([[1, 0]], 2)
    with pytest.raises(ValueError):
        FfVector([3], 3)
    with pytest.raises(ValueError):
        FfVector([1], 5)
    with pytest.raises(ShapeMismatch):
        FfVector.from_str("101", 2).blocks(2)


def test_row_reduce_first_nonzero_pivot():
    red, piv = gf.row_reduce(np.array([[0, 2, 1], [1, 1, 0]]), 3)
    assert piv == [0, 1]
    assert red.tolist() == [[1, 0, 1], [0, 1, 2]]


@settings(max_examples=50, deadline=None)
@given(matrices())
def test_text_roundtrip(a):
    assert gf.from_text(gf.to_text(a)) == a


def test_text_digit_rows_and_multiple(tmp_path):
    a = gf.from_text("3 2 4\n1021\n0112\n")
    assert a == FfMatrix.from_rows(["1021", "0112"], 3)
    mats, rest = gf.read_matrices(gf.to_text(a) + gf.to_text(a.T) + "tail", 2)
    assert mats == [a, a.T] and rest == "tail"
    path = tmp_path / "m.txt"
    path.write_text(gf.to_text(a))
    assert gf.load_matrix(path) == a
    with pytest.raises(ValueError):
        gf.from_text("3 2 2\n1 2 0")
