import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knotss.config import CapExceeded
from knotss.linalg import (
    SmithForm,
    SparseIntMatrix,
    is_prime,
    rank_mod_prime,
    rank_over_rationals,
    smith_normal_form,
)
from knotss.oracle import _dense_smith_divisors, dense_rank


@st.composite
def dense_matrices(draw, max_side=30, max_abs=4):
    r = draw(st.integers(0, max_side))
    c = draw(st.integers(0, max_side))
    density = draw(st.floats(0.05, 1.0))
    cells = draw(st.lists(st.integers(-max_abs, max_abs), min_size=r * c, max_size=r * c))
    rnd = random.Random(draw(st.integers(0, 2**32)))
    rows = [[v if rnd.random() < density else 0 for v in cells[i * c:(i + 1) * c]] for i in range(r)]
    return r, c, rows


def test_matrix_validation():
    with pytest.raises(ValueError):
        SparseIntMatrix(2, 2, ((0, 0, 0),))
    with pytest.raises(ValueError):
        SparseIntMatrix(2, 2, ((0, 0, 1), (0, 0, 2)))
    with pytest.raises(ValueError):
        SparseIntMatrix(2, 2, ((1, 0, 1), (0, 0, 2)))
    with pytest.raises(ValueError):
        SparseIntMatrix(2, 2, ((2, 0, 1),))


def test_coordinate_round_trip():
    M = SparseIntMatrix.from_dense([[0, -3, 0], [7, 0, 10**30]])
    text = M.to_coordinate_text()
    assert text.splitlines()[0] == "2 3 3"
    assert SparseIntMatrix.from_coordinate_text(text) == M
    with pytest.raises(ValueError):
        SparseIntMatrix.from_coordinate_text("2 2 2\n1 1 1\n")


def test_rank_examples():
    assert rank_over_rationals(SparseIntMatrix(4, 5)) == 0
    assert rank_over_rationals(SparseIntMatrix.identity(6)) == 6
    assert rank_mod_prime(SparseIntMatrix.identity(3), 7) == 3
    assert rank_mod_prime(SparseIntMatrix.from_dense([[2, 0], [0, 4]]), 2) == 0
    with pytest.raises(ValueError):
        rank_mod_prime(SparseIntMatrix.identity(2), 4)


def test_smith_examples():
    assert smith_normal_form(SparseIntMatrix.from_dense([[2, 0], [0, 4]])).divisors == (2, 4)
    assert smith_normal_form(SparseIntMatrix.from_dense([[2, 0], [0, 3]])).divisors == (1, 6)
    assert smith_normal_form(SparseIntMatrix(0, 0)).divisors == ()
    with pytest.raises(ValueError):
        SmithForm((2, 3))


def test_smith_cap_applies_to_dense_core():
    M = SparseIntMatrix.from_dense([[2, 0, 0], [0, 2, 0], [0, 0, 2]])
    with pytest.raises(CapExceeded):
        smith_normal_form(M, max_core_cols=2)
    # unit pivots never reach the dense core
    assert smith_normal_form(SparseIntMatrix.identity(50), max_core_cols=0).divisors == (1,) * 50


def test_is_prime():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@settings(max_examples=150, deadline=None)
@given(dense_matrices())
def test_ranks_agree_with_dense_oracle(data):
    r, c, rows = data
    M = SparseIntMatrix.from_dense(rows, cols=c)
    q = rank_over_rationals(M)
    assert q == dense_rank(rows) if rows else q == 0
    snf = smith_normal_form(M)
    assert snf.rank == q
    for ell in (2, 3, 5):
        assert rank_mod_prime(M, ell) == (dense_rank(rows, ell) if rows else 0)
        # reduction mod ell kills exactly the divisors it divides
        assert rank_mod_prime(M, ell) == q - sum(1 for d in snf.divisors if d % ell == 0)


@settings(max_examples=60, deadline=None)
@given(dense_matrices(max_side=10, max_abs=9))
def test_smith_matches_dense_oracle(data):
    r, c, rows = data
    M = SparseIntMatrix.from_dense(rows, cols=c)
    expected = sorted(d for d in _dense_smith_divisors(rows) if d) if rows else []
    # the oracle's diagonal is already a divisibility chain
    assert list(smith_normal_form(M).divisors) == expected


@settings(max_examples=80, deadline=None)
@given(dense_matrices(max_side=15, max_abs=6), st.randoms(use_true_random=False))
def test_smith_permutation_invariant(data, rnd):
    r, c, rows = data
    M = SparseIntMatrix.from_dense(rows, cols=c)
    rp, cp = list(range(r)), list(range(c))
    rnd.shuffle(rp)
    rnd.shuffle(cp)
    P = M.permuted(rp, cp)
    assert smith_normal_form(P) == smith_normal_form(M)
    assert rank_over_rationals(P) == rank_over_rationals(M)


@settings(max_examples=50, deadline=None)
@given(dense_matrices(max_side=8), dense_matrices(max_side=8))
def test_matmul_against_dense(a, b):
    ra, ca, A = a
    rb, cb, B = b
    B = [[(x if k < rb else 0) for x in (B[k] if k < rb else [0] * cb)] for k in range(ca)]
    MA = SparseIntMatrix.from_dense(A, cols=ca)
    MB = SparseIntMatrix.from_dense(B, cols=cb)
    expected = [[sum(A[i][k] * B[k][j] for k in range(ca)) for j in range(cb)] for i in range(ra)]
    assert (MA @ MB).to_dense() == expected
