"""パレート対による行列簡約のテスト"""
from __future__ import annotations

import numpy as np
import pytest

from src.algebra.field import make_field
from src.algebra.spmat import (
    GradedOrder,
    SparseMatrix,
    is_f_upper_triangular,
    multiply,
    rank,
    reorder,
    submatrix,
)
from src.errors import DimensionMismatch, SingularPivotBlock
from src.reduction.pareto import (
    ParetoPairing,
    build_factors,
    light_reduce,
    matrix_reduce,
    pareto_pairs,
    reduce_step,
)

GF2 = make_field(2)


@pytest.fixture
def small():
    """A = [[1, 1], [1, 0]]（行 r0, r1・列 c0, c1）"""
    return SparseMatrix(
        ["r0", "r1"], ["c0", "c1"], {"c0": {"r0": 1, "r1": 1}, "c1": {"r0": 1}}, GF2
    )


def random_matrix(seed: int, p: int, shape: tuple[int, int] = (6, 7)) -> SparseMatrix:
    rng = np.random.default_rng(seed)
    dense = rng.integers(0, p, size=shape) * (rng.random(shape) < 0.4)
    return SparseMatrix.from_dense(dense, make_field(p))


class TestParetoPairing:
    """ParetoPairingのテスト"""

    def test_lookup(self):
        """S, T と包含・等価の判定"""
        P = ParetoPairing([("r1", "c0"), ("r0", "c1")])
        assert P.S == frozenset({"r0", "r1"})
        assert P.T == frozenset({"c0", "c1"})
        assert ("r1", "c0") in P
        assert ("r1", "c1") not in P
        assert P == ParetoPairing([("r0", "c1"), ("r1", "c0")])
        assert not ParetoPairing()

    def test_rejects_non_matching(self):
        """同じ行を 2 度使う対は拒否"""
        with pytest.raises(DimensionMismatch):
            ParetoPairing([("r0", "c0"), ("r0", "c1")])


class TestParetoPairs:
    """pareto_pairsのテスト"""

    def test_small(self, small):
        """2×2 の行列のパレート対"""
        assert pareto_pairs(small) == ParetoPairing([("r1", "c0")])

    def test_zero_matrix(self):
        """零行列には対がない"""
        assert not pareto_pairs(SparseMatrix.zeros(["r"], ["c"], GF2))

    @pytest.mark.parametrize("seed", range(10))
    def test_pairs_are_extremal(self, seed):
        """対は列の最大行かつ行の最小列"""
        A = random_matrix(seed, 3)
        for f, g in pareto_pairs(A):
            column = list(A.column(g))
            assert column[-1] == f
            first = next(c for c in A.cols if A.entry(f, c))
            assert first == g

    @pytest.mark.parametrize("seed", range(10))
    def test_nonzero_matrix_has_a_pair(self, seed):
        """非零行列には少なくとも 1 つ対がある"""
        A = random_matrix(seed, 2)
        if not A.is_zero():
            assert pareto_pairs(A)


class TestBuildFactors:
    """build_factorsのテスト"""

    def test_factors_of_small(self, small):
        """2×2 の行列の L と R"""
        factors = build_factors(small, pareto_pairs(small))
        assert factors.L.entry("r0", "r1") == 1
        assert factors.L.entry("r1", "r1") == 1
        assert np.array_equal(factors.R.to_dense(), np.eye(2, dtype=np.int64))

    def test_singular_pivot_block(self):
        """パレート対でない組からは因子を作れない"""
        A = SparseMatrix.from_dense(np.ones((2, 2), dtype=np.int64), GF2)
        with pytest.raises(SingularPivotBlock):
            build_factors(A, ParetoPairing([(0, 0), (1, 1)]))

    @pytest.mark.parametrize("seed", range(10))
    def test_pivot_block_becomes_identity(self, seed):
        """1 段の簡約で対の列が単位ベクトルになる"""
        A = random_matrix(seed, 3)
        step = reduce_step(A)
        for f, g in step.pairing:
            column = step.reduced.column(g)
            assert column.get(f) == 1
            assert all(r == f for r in column)


class TestMatrixReduce:
    """matrix_reduceとlight_reduceのテスト"""

    def test_small(self, small):
        """2×2 の行列は 1 段で置換行列になる"""
        result = matrix_reduce(small)
        assert result.pairing == ParetoPairing([("r1", "c0"), ("r0", "c1")])
        assert result.iterations == 1
        assert np.array_equal(result.reduced.to_dense(), np.array([[0, 1], [1, 0]]))

    @pytest.mark.parametrize("p", [2, 3, 101])
    @pytest.mark.parametrize("seed", range(8))
    def test_pairs_reach_rank(self, p, seed):
        """対の数が階数に達し LAR が簡約結果に等しい"""
        A = random_matrix(seed, p)
        result = matrix_reduce(A)
        r = rank(A)
        assert len(result.pairing) == r
        assert result.iterations <= r
        product = multiply(multiply(result.L, A), result.R)
        assert np.array_equal(product.to_dense(), result.reduced.to_dense())

    @pytest.mark.parametrize("p", [2, 3])
    @pytest.mark.parametrize("seed", range(8))
    def test_light_matches_full(self, p, seed):
        """左側だけの簡約は両側簡約と同じ対と L"""
        A = random_matrix(seed, p)
        full = matrix_reduce(A)
        light = light_reduce(A)
        assert light.pairing == full.pairing
        assert np.array_equal(light.L.to_dense(), full.L.to_dense())

    @pytest.mark.parametrize("p", [2, 3])
    @pytest.mark.parametrize("seed", range(6))
    def test_transforms_are_upper_triangular(self, p, seed):
        """L と R は与えた順序で上三角"""
        A = random_matrix(seed, p)
        result = matrix_reduce(A)
        row_pos = {r: i for i, r in enumerate(A.rows)}
        col_pos = {c: j for j, c in enumerate(A.cols)}
        assert is_f_upper_triangular(result.L, row_pos, row_pos)
        assert is_f_upper_triangular(result.R, col_pos, col_pos)

    def test_zero_matrix(self):
        """零行列は 0 段で終わる"""
        result = matrix_reduce(SparseMatrix.zeros(["r"], ["c"], GF2))
        assert result.iterations == 0
        assert not result.pairing


def random_graded_matrix(seed: int, p: int):
    """50×50 以下のランダムな疎行列と、行・列のランダムな次数"""
    rng = np.random.default_rng(seed)
    m, n = (int(v) for v in rng.integers(1, 51, size=2))
    density = float(rng.uniform(0.05, 0.4))
    dense = rng.integers(0, p, size=(m, n)) * (rng.random((m, n)) < density)
    A = SparseMatrix.from_dense(dense, make_field(p))
    row_grade = {r: int(rng.integers(0, 5)) for r in A.rows}
    col_grade = {c: int(rng.integers(0, 5)) for c in A.cols}
    return A, row_grade, col_grade


class TestRandomMatrices:
    """ランダムな疎行列での 1 段ごとの性質のテスト"""

    @pytest.mark.parametrize("p", [2, 101])
    @pytest.mark.parametrize("seed", range(500))
    def test_each_step(self, seed, p):
        """各段で対のブロックが単位行列、他のブロックが零、残差の階数が rank - |S|"""
        A, row_grade, col_grade = random_graded_matrix(seed, p)
        r = rank(A)
        current = reorder(
            A, GradedOrder.from_grades(row_grade), GradedOrder.from_grades(col_grade)
        )
        for _ in range(r):
            step = reduce_step(current)
            pi = step.pairing.row_to_col
            owner = step.pairing.col_to_row
            reduced = step.reduced

            for col in reduced.cols:
                column = reduced.column(col)
                if col in owner:
                    assert column == {owner[col]: 1}
                else:
                    assert not any(row in pi for row in column)

            residual = submatrix(
                reduced,
                [row for row in reduced.rows if row not in pi],
                [col for col in reduced.cols if col not in owner],
            )
            assert rank(residual) == r - len(step.pairing)
            assert rank(reduced) == r

            assert is_f_upper_triangular(step.L, row_grade, row_grade)
            assert is_f_upper_triangular(step.R, col_grade, col_grade)
            factors = build_factors(current, step.pairing, right=False)
            assert is_f_upper_triangular(factors.pivot_inverse, row_grade, row_grade)

            current = reduced
            if len(step.pairing) == r:
                break
        assert len(pareto_pairs(current)) == r
