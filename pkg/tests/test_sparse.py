from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmrank import sparse as S
from cmrank.ffield import FieldSpec
from cmrank.sparse import (FrozenStatus, SparseMatrix, VariableType, attach_perturbation,
                           classify_all, classify_variable, enumerate_proper_relations, frozen_status,
                           rank, rank_drop, read_matrix, row_space_contains, solution_count_oracle,
                           write_matrix)

from oracles import dense_rank

GF2, GF3, GF5, Q = FieldSpec.gf(2), FieldSpec.gf(3), FieldSpec.gf(5), FieldSpec.rationals()
SWAP = [[0, 1], [1, 0]]


def M(data, F, sym=False):
    return SparseMatrix.from_dense(data, F, symmetric=sym)


def random_matrix(rng, m, n, F, density=0.5, symmetric=False):
    rows = [{} for _ in range(m)]
    for i in range(m):
        for j in range(i if symmetric else 0, n):
            if rng.random() < density:
                v = F.random_raw(rng)
                rows[i][j] = v
                if symmetric:
                    rows[j][i] = v
    return SparseMatrix(m, n, F, rows, symmetric)


# -- examples -------------------------------------------------------------


def test_rank_examples():
    assert rank(M([[0, 1, 0], [1, 0, 1], [0, 1, 0]], GF2)) == 2
    K3 = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    assert rank(M(K3, GF2)) == 2
    assert rank(M(K3, GF3)) == 3
    assert rank(SparseMatrix.zeros(4, 4, GF5)) == 0


def test_zero_rows_cols_examples():
    K3 = M([[0, 1, 1], [1, 0, 1], [1, 1, 0]], GF3)
    assert K3.zero_rows_cols([0], [0]).rank() == 2
    assert K3.zero_rows_cols() == K3
    assert K3.zero_rows_cols(range(3)).rank() == 0
    with pytest.raises(IndexError):
        K3.zero_rows_cols([3])


def test_row_space_examples():
    assert row_space_contains(M(SWAP, GF2), [1, 0])
    assert not row_space_contains(SparseMatrix.zeros(2, 2, GF2), [1, 0])
    assert row_space_contains(M([[1, 1]], GF3), [2, 2])
    with pytest.raises(ValueError):
        row_space_contains(M(SWAP, GF2), [1, 0, 0])


def test_frozen_examples():
    assert frozen_status(M(SWAP, GF2), 0) is FrozenStatus.FIRM
    assert frozen_status(SparseMatrix.zeros(2, 2, GF2), 1) is FrozenStatus.NOT_FROZEN
    D = M([[1, 0], [0, 0]], GF2)
    # zeroing row 0 leaves the zero matrix, so e(0) is frozen but only frailly
    assert frozen_status(D, 0) is FrozenStatus.FRAIL
    assert frozen_status(D, 1) is FrozenStatus.NOT_FROZEN
    with pytest.raises(IndexError):
        frozen_status(D, 2)


def test_frail_example():
    # e(0) lies in the span of row 0 only, so zeroing row 0 unfreezes it
    A = M([[1, 0], [0, 1]], GF2)
    assert frozen_status(A, 0) is FrozenStatus.FRAIL
    assert classify_variable(A, 0) is VariableType.X
    assert rank_drop(A, 0) == 1


def test_classify_examples(rng):
    assert classify_variable(M(SWAP, GF2), 0) is VariableType.Y
    assert classify_variable(M(SWAP, GF2), 1) is VariableType.Y
    assert classify_variable(SparseMatrix.zeros(3, 3, GF2), 2) is VariableType.Z
    for _ in range(20):
        A = random_matrix(rng, 8, 8, GF3, 0.4, symmetric=True)
        for i in range(8):
            assert rank_drop(A, i) == classify_variable(A, i).drop


def test_u_and_v_types():
    # row 0 = e(1): column 0 zero, so 0 is unfrozen in A but firm in A^T
    A = M([[0, 1], [0, 0]], GF2)
    assert classify_variable(A, 0) is VariableType.U
    assert classify_variable(A.transpose(), 0) is VariableType.V
    assert rank_drop(A, 0) == 1


def test_rank_drop_examples():
    assert rank_drop(M(SWAP, GF2), 0) == 2
    assert rank_drop(SparseMatrix.zeros(2, 2, GF2), 0) == 0
    assert rank_drop(M([[1, 0], [0, 0]], GF2), 1) == 0


def test_perturbation_examples(rng):
    Z = SparseMatrix.zeros(2, 2, GF2)
    for _ in range(50):
        B, pert = attach_perturbation(Z, 1, rng)
        assert pert.theta_r == pert.theta_c == 1
        assert B.shape == (3, 3) and B.rank() in (1, 2)
    A = M([[0, 1, 0], [1, 0, 1], [0, 1, 0]], GF2)
    b1, p1 = attach_perturbation(A, 2, np.random.default_rng(7))
    b2, p2 = attach_perturbation(A, 2, np.random.default_rng(7))
    assert p1 == p2 and b1 == b2
    for _ in range(100):
        A = random_matrix(rng, 10, 10, GF3, 0.3, symmetric=True)
        P = int(rng.integers(1, 5))
        B, pert = attach_perturbation(A, P, rng)
        assert B.shape == (10 + pert.theta_r, 10 + pert.theta_c)
        assert 1 <= pert.theta_r <= P and 1 <= pert.theta_c <= P
        assert 0 <= B.rank() - A.rank() <= 2 * P


def test_relation_examples():
    assert enumerate_proper_relations(M(SWAP, GF2), 2) == []
    assert enumerate_proper_relations(SparseMatrix.zeros(3, 3, GF2), 2) == []
    assert enumerate_proper_relations(M([[1, 1], [0, 0]], GF2), 2) == [(0, 1)]
    with pytest.raises(ValueError):
        enumerate_proper_relations(SparseMatrix.zeros(25, 25, GF2), 2)


def test_relation_by_brute_force(rng):
    # a size-2 set I is a relation iff some y with y != 0 combination has support in I
    for _ in range(30):
        A = random_matrix(rng, 4, 5, GF2, 0.4)
        rows = [[A.get(i, j).value for j in range(5)] for i in range(4)]
        combos = []
        for y in range(1, 16):
            v = [sum(rows[i][j] for i in range(4) if y >> i & 1) % 2 for j in range(5)]
            if any(v):
                combos.append({j for j in range(5) if v[j]})
        frozen = {j for j in range(5) if {j} in combos}
        expected = []
        for I in [(a, b) for a in range(5) for b in range(a + 1, 5)]:
            rest = set(I) - frozen
            if any(c <= set(I) for c in combos) and rest and any(c <= rest for c in combos):
                expected.append(I)
        assert enumerate_proper_relations(A, 2) == expected


def test_solution_count_examples():
    assert solution_count_oracle(M(SWAP, GF2)) == 1
    assert solution_count_oracle(SparseMatrix.zeros(3, 3, GF2)) == 8
    assert solution_count_oracle(M([[0, 1, 1], [1, 0, 1], [1, 1, 0]], GF3)) == 1
    with pytest.raises(ValueError):
        solution_count_oracle(SparseMatrix.zeros(2, 30, GF2))
    with pytest.raises(ValueError):
        solution_count_oracle(SparseMatrix.zeros(2, 2, Q))


# -- against the textbook oracle ----------------------------------------------


@pytest.mark.parametrize("F,p", [(GF2, 2), (GF3, 3), (GF5, 5), (FieldSpec.gf(101), 101), (Q, None)])
def test_rank_matches_dense_oracle(rng, F, p):
    for _ in range(150):
        m, n = int(rng.integers(0, 12)), int(rng.integers(1, 12))
        A = random_matrix(rng, m, n, F, rng.random())
        assert A.rank() == dense_rank(A.to_dense(), p)


def test_rational_entries_with_denominators(rng):
    F = FieldSpec.rationals((-5, 5), den_max=7)
    for _ in range(100):
        A = random_matrix(rng, 7, 6, F, 0.6)
        assert A.rank() == dense_rank(A.to_dense())


@pytest.mark.parametrize("F,p", [(GF2, 2), (GF3, 3), (FieldSpec.gf(7), 7)])
def test_dense_switch_matches_oracle(rng, F, p, monkeypatch):
    # force the hand-off to the dense kernel early and compare both paths
    for _ in range(6):
        n = int(rng.integers(60, 140))
        A = random_matrix(rng, n, n + 5, F, 4 / n)
        expected = dense_rank(A.to_dense(), p)
        monkeypatch.setattr(S, "MARKOWITZ_LIMIT", 0)
        monkeypatch.setattr(S, "DENSE_MIN_SIZE", 1)
        assert S._rank_rows(A.rows_raw(), A.ncols, F) == expected
        monkeypatch.setattr(S, "MARKOWITZ_LIMIT", 10**9)
        assert S._rank_rows(A.rows_raw(), A.ncols, F) == expected


def test_gf2_kernel_wide_and_tall(rng):
    for shape in [(3, 200), (200, 3), (130, 130), (64, 64), (65, 63)]:
        d = (rng.random(shape) < 0.3).astype(np.int64)
        assert S.dense_rank(d, GF2) == dense_rank(d.tolist(), 2)


def test_not_mutated(rng):
    A = random_matrix(rng, 30, 30, GF3, 0.2)
    before = A.to_dense()
    A.rank()
    A.zero_rows_cols([1], [2]).rank()
    assert A.to_dense() == before


# -- invariants -----------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 5]))
def test_invariants_property(seed, p):
    r = np.random.default_rng(seed)
    F = FieldSpec.gf(p)
    m, n = int(r.integers(1, 8)), int(r.integers(1, 8))
    A = random_matrix(r, m, n, F, r.random())
    assert A.rank() == A.transpose().rank() <= min(m, n)
    for i in range(min(m, n)):
        st_a = frozen_status(A, i)
        assert (st_a is not FrozenStatus.NOT_FROZEN) == (A.rank() - A.zero_rows_cols(cols=[i]).rank() == 1)
        assert (st_a is FrozenStatus.FRAIL) == (frozen_status(A.transpose(), i) is FrozenStatus.FRAIL)
        if st_a is FrozenStatus.FIRM:
            assert row_space_contains(A, {i: 1})
        assert rank_drop(A, i) == classify_variable(A, i).drop
        assert A.zero_rows_cols(rows=[i]).rank() <= A.rank()
    i = int(r.integers(m))
    B = A.scale_row(i, F.random_raw(r))
    assert B.rank() == A.rank()
    assert all(frozen_status(A, j) == frozen_status(B, j) for j in range(min(m, n)))
    Z = A.zero_rows_cols(rows=[i])
    assert Z.zero_rows_cols(rows=[i]).rank() == Z.rank()


def test_fast_classification_agrees(rng):
    for F in (GF2, GF3, Q):
        for _ in range(40):
            m, n = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            A = random_matrix(rng, m, n, F, rng.random())
            assert classify_all(A) == [classify_variable(A, i) for i in range(min(m, n))]


def test_solution_count_consistency(rng):
    for F in (GF2, GF3, GF5):
        for _ in range(40):
            n = int(rng.integers(1, 7))
            A = random_matrix(rng, int(rng.integers(1, 7)), n, F, rng.random())
            assert solution_count_oracle(A) == F.modulus ** (n - A.rank())


def test_matrix_round_trip(tmp_path, rng):
    for F in (GF2, FieldSpec.gf(13), FieldSpec.rationals((-4, 4), den_max=5)):
        A = random_matrix(rng, 9, 7, F, 0.4)
        write_matrix(A, tmp_path / "a.txt")
        B = read_matrix(tmp_path / "a.txt")
        assert B == A and B.field == F
    text = (tmp_path / "a.txt").read_text().splitlines()
    assert text[0] == "9 7 q"


def test_constructor_validation():
    with pytest.raises(ValueError):
        SparseMatrix(2, 2, GF2, [{0: 0}, {}])
    with pytest.raises(IndexError):
        SparseMatrix(2, 2, GF2, [{2: 1}, {}])
    with pytest.raises(ValueError):
        SparseMatrix.from_dense([[0, 1], [0, 0]], GF2, symmetric=True)
    assert SparseMatrix.from_dense([[0, 1], [1, 0]], GF2, symmetric=True).transpose().symmetric
    assert M([[Fraction(1, 2), 0]], Q).get(0, 0).value == Fraction(1, 2)
