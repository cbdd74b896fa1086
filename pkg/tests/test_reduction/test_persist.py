"""鎖複体の簡約とパーシステンスのテスト"""
from __future__ import annotations

import math

import pytest

from src.algebra.field import make_field
from src.complex.combinatorial import chessboard_complex, matching_complex
from src.complex.rips import DistanceMatrix, rips_morse_skeleton, vietoris_rips
from src.data.distance import sample_point_cloud
from src.errors import DimensionMismatch, NotAMatching, TransformsNotAccumulated
from src.matroid.linear import (
    LinearMatroid,
    check_modular_pair,
    doubly_minimal_basis,
    intersection_ranks_match,
)
from src.reduction.morse import (
    Matching,
    greedy_matching,
    is_filtration_acyclic,
    linearize,
    seed_check,
)
from src.reduction.oracle import standard_reduction_oracle
from src.reduction.persist import (
    barcode,
    betti_numbers,
    chain_reduce,
    generators,
    kernel_image_filtrations,
    persistence,
)
from tests.factories import lower_star_complex, random_graded_complex

PRIMES = (2, 3, 5, 7)


def assert_cycles(K, result):
    """代表元がサイクルで、生成セルを含み、最大次数が生成の次数に等しいこと

    有限区間では証拠鎖の境界が代表元に等しく、証拠鎖は消滅セルを含み、
    最大次数が消滅の次数に等しい。
    """
    for iv in result:
        z = iv.representative
        assert z, iv
        assert K.apply_boundary(iv.dim, z) == {}
        assert iv.birth_cell in z
        assert max(K.grade(e) for e in z) == iv.birth_grade
        if iv.is_essential:
            assert iv.witness is None
            continue
        w = iv.witness
        assert w, iv
        assert K.apply_boundary(iv.dim + 1, w) == dict(z)
        assert iv.death_cell in w
        assert max(K.grade(e) for e in w) == iv.death_grade


def assert_matching(K):
    """貪欲マッチングがフィルトレーション非巡回で、線形化した順序のパレート対に入ること"""
    V = greedy_matching(K)
    assert is_filtration_acyclic(V, K)
    assert seed_check(V, K, linearize(V, K))


def euler_characteristic(K) -> int:
    return sum((-1) ** n * count for n, count in enumerate(K.cell_counts()))


def random_rips(seed: int, n_points: int = 7, dim_max: int = 2, p: int = 2):
    d = DistanceMatrix.from_points(sample_point_cloud(n_points, 2, seed))
    return d, vietoris_rips(d, dim_max, field=make_field(p))


def rips_case(seed: int):
    """5〜25 点、2〜4 次元の点群（10 点以下は 3 次元単体まで、それ以外は 2 次元まで）"""
    n_points = 5 + seed % 21
    ambient_dim = 2 + seed % 3
    dim_max = 3 if n_points <= 10 else 2
    d = DistanceMatrix.from_points(sample_point_cloud(n_points, ambient_dim, seed))
    return d, vietoris_rips(d, dim_max, field=make_field(2))


def abstract_case(seed: int):
    """下方スター複体と一般の次数付き複体を交互に、素数を巡回させて作る"""
    p = PRIMES[seed % len(PRIMES)]
    if seed % 2:
        return random_graded_complex(seed, n_vertices=6 + seed % 3, p=p)
    return lower_star_complex(seed, n_vertices=5 + seed % 4, p=p)


def dense(K, n, chain) -> list[int]:
    return [chain.get(e, 0) for e in K.order(n)]


class TestChainReduce:
    """chain_reduceとbarcodeのテスト"""

    def test_filtered_triangle(self, filtered_triangle):
        """三角形のバーコード"""
        result = persistence(filtered_triangle)
        assert result.signature() == ((0, 0, 1), (0, 0, 1), (0, 0, math.inf), (1, 2, 3))
        assert result.reported() == result

    def test_pairs(self, filtered_triangle):
        """次元ごとの対"""
        state = chain_reduce(filtered_triangle)
        assert len(state.pairing(1)) == 2
        assert list(state.pairing(2)) == [((0, 2), (0, 1, 2))]
        assert not state.accumulated

    def test_square_cycle(self, square_cycle):
        """GF(3) 上の 4 辺サイクル"""
        result = persistence(square_cycle)
        assert [iv.key for iv in result.in_dim(1)] == [(1, 2, math.inf)]
        assert result.betti(1) == [1, 1]

    def test_flat_sphere_zero_length(self, flat_sphere):
        """次数がすべて 0 の球面では長さ 0 の区間を除くと (1, 0, 1)"""
        result = persistence(flat_sphere)
        assert len(result) == 8
        assert result.reported().signature() == ((0, 0, math.inf), (2, 0, math.inf))

    def test_verify_each_sweep(self, tetrahedron_boundary):
        """掃引ごとの検算を有効にしても結果は同じ"""
        state = chain_reduce(tetrahedron_boundary, verify=True)
        assert barcode(state).betti(2) == [1, 0, 1]

    def test_homology_dim(self, tetrahedron_boundary):
        """homology_dim 以下の次元だけを返す"""
        result = persistence(tetrahedron_boundary, homology_dim=0)
        assert {iv.dim for iv in result} == {0}
        assert len(result) == 4
        with pytest.raises(DimensionMismatch):
            chain_reduce(tetrahedron_boundary, homology_dim=-1)

    def test_betti_numbers(self, tetrahedron_boundary):
        """最終段のベッチ数"""
        assert betti_numbers(tetrahedron_boundary, 2) == [1, 0, 1]
        assert betti_numbers(tetrahedron_boundary, 0) == [1]

    def test_rejects_matching_outside_pareto_pairs(self, filtered_triangle):
        """パレート対に入らないマッチングは拒否"""
        V = Matching((((1,), (1, 2)),))
        with pytest.raises(NotAMatching):
            chain_reduce(filtered_triangle, matching=V)

    def test_known_spaces(self, tetrahedron_boundary):
        """円は (1, 1)、球面は (1, 0, 1)"""
        circle = DistanceMatrix.from_points(
            [[math.cos(2 * math.pi * k / 8), math.sin(2 * math.pi * k / 8)] for k in range(8)]
        )
        K = vietoris_rips(circle, 2, threshold=0.8)
        assert persistence(K, morse=True).betti(1) == [1, 1]
        assert persistence(tetrahedron_boundary, morse=True).betti(2) == [1, 0, 1]


class TestGenerators:
    """代表サイクルのテスト"""

    def test_requires_accumulation(self, filtered_triangle):
        """証拠鎖なしの簡約からは代表元を出せない"""
        with pytest.raises(TransformsNotAccumulated):
            generators(chain_reduce(filtered_triangle))

    def test_filtered_triangle(self, filtered_triangle):
        """三角形のループの代表元と証拠鎖"""
        result = persistence(filtered_triangle, with_generators=True)
        (loop,) = result.in_dim(1)
        assert dict(loop.representative) == {(0, 1): 1, (1, 2): 1, (0, 2): 1}
        assert dict(loop.witness) == {(0, 1, 2): 1}
        assert_cycles(filtered_triangle, result)

    def test_square_cycle_over_gf3(self, square_cycle):
        """GF(3) 上の代表元"""
        result = persistence(square_cycle, with_generators=True)
        (loop,) = result.in_dim(1)
        assert len(loop.representative) == 4
        assert_cycles(square_cycle, result)

    @pytest.mark.parametrize("morse", [False, True])
    def test_tetrahedron_boundary(self, tetrahedron_boundary, morse):
        """球面の基本類は 4 つの三角形すべて"""
        result = persistence(tetrahedron_boundary, morse=morse, with_generators=True)
        assert_cycles(tetrahedron_boundary, result)
        (sphere,) = result.in_dim(2)[-1:]
        assert sphere.is_essential
        assert len(sphere.representative) == 4

    @pytest.mark.parametrize("seed", range(4))
    def test_random_rips(self, seed):
        """乱数点群の Rips 複体の代表元（モースあり・なし）"""
        _, K = random_rips(seed, p=3)
        assert_cycles(K, persistence(K, with_generators=True))
        assert_cycles(K, persistence(K, morse=True, with_generators=True))


class TestAgainstOracle:
    """オラクルとの一致のテスト"""

    @pytest.mark.parametrize("seed", range(100))
    def test_rips(self, seed):
        """乱数点群の Rips 複体でモースあり・なしともオラクルと一致"""
        _, K = rips_case(seed)
        expected = standard_reduction_oracle(K).reported().signature()
        plain = persistence(K)
        assert plain.reported().signature() == expected
        assert persistence(K, morse=True).reported().signature() == expected
        assert sum((-1) ** n * b for n, b in enumerate(plain.betti(K.top_dim))) == (
            euler_characteristic(K)
        )
        assert_matching(K)

    @pytest.mark.parametrize("seed", range(120))
    def test_abstract_complexes(self, seed):
        """ランダムな抽象単体複体で、代表元付きの簡約がオラクルと一致"""
        K = abstract_case(seed)
        expected = standard_reduction_oracle(K).reported().signature()
        for morse in (False, True):
            result = persistence(K, morse=morse, with_generators=True)
            assert result.reported().signature() == expected
            assert_cycles(K, result)
        assert sum((-1) ** n * b for n, b in enumerate(result.betti(K.top_dim))) == (
            euler_characteristic(K)
        )
        assert_matching(K)

    @pytest.mark.parametrize("seed", range(10))
    def test_rips_skeleton(self, seed):
        """省略骨格は dim_max 未満の次元で完全な複体と一致"""
        d, K = random_rips(seed)
        skeleton = rips_morse_skeleton(d, 2)
        expected = standard_reduction_oracle(K).restrict([0, 1]).reported().signature()
        result = persistence(skeleton.complex, morse=True, homology_dim=1)
        assert result.reported().signature() == expected
        assert persistence(skeleton.complex, homology_dim=1).reported().signature() == expected

    @pytest.mark.parametrize("seed", range(3))
    def test_top_columns_dropped(self, seed):
        """上向きに対になる最高次元の列を落としても低次元は変わらない"""
        d, K = random_rips(seed, n_points=6, dim_max=3)
        expected = standard_reduction_oracle(K).restrict([0, 1]).reported().signature()
        V = greedy_matching(K)
        state = chain_reduce(K, linearize(V, K), homology_dim=1, matching=V)
        assert barcode(state).reported().signature() == expected
        assert 3 not in state.reduced

    def test_combinatorial_complexes(self):
        """チェス盤複体・マッチング複体のベッチ数"""
        assert persistence(chessboard_complex(2, 2), morse=True).betti(1) == [2, 0]
        assert persistence(chessboard_complex(2, 3), morse=True).betti(1) == [1, 1]
        assert persistence(matching_complex(5), morse=True).betti(1) == [1, 6]


class TestKernelImageFiltrations:
    """核・像フィルトレーションのテスト"""

    def test_filtered_triangle(self, filtered_triangle):
        """三角形では 1 本のサイクルが次数 2 で生まれ 3 で境界になる"""
        KI = kernel_image_filtrations(filtered_triangle, 1)
        assert KI.matroid.rank == 1
        assert KI.F.chi == {0: 2}
        assert KI.G.chi == {0: 3}

    def test_modular_pair(self, tetrahedron_boundary):
        """四面体の境界の 1 次サイクル"""
        KI = kernel_image_filtrations(tetrahedron_boundary, 1)
        assert KI.matroid.rank == 3
        assert check_modular_pair(KI.matroid, KI.F, KI.G)
        B = doubly_minimal_basis(KI.matroid, KI.F, KI.G)
        assert intersection_ranks_match(KI.matroid, B, KI.F, KI.G)

    @pytest.mark.parametrize("seed", range(100))
    def test_random_pairs_have_doubly_minimal_bases(self, seed):
        """ランダムな複体の核・像の対はモジュラーで、二重最小基底が交わりの階数を実現する"""
        K = abstract_case(seed)
        n = seed % max(K.top_dim, 1)
        KI = kernel_image_filtrations(K, n)
        assert check_modular_pair(KI.matroid, KI.F, KI.G)
        B = doubly_minimal_basis(KI.matroid, KI.F, KI.G)
        assert KI.matroid.is_basis(B)
        assert intersection_ranks_match(KI.matroid, B, KI.F, KI.G)

    @pytest.mark.parametrize("seed", range(30))
    def test_representatives_are_doubly_minimal(self, seed):
        """代表サイクルは核・像の両方で最小な基底（交わりごとの本数が階数に等しい）"""
        K = abstract_case(seed)
        n = seed % max(K.top_dim, 1)
        KI = kernel_image_filtrations(K, n)
        cycles = persistence(K, with_generators=True).in_dim(n)

        vectors = {k: dense(K, n, iv.representative) for k, iv in enumerate(cycles)}
        assert LinearMatroid(list(vectors), vectors, K.field).rank == len(cycles)
        assert len(cycles) == KI.matroid.rank

        never = K.max_grade + 1
        deaths = [never if iv.is_essential else iv.death_grade for iv in cycles]
        for i in range(K.max_grade + 1):
            for j in range(never + 1):
                count = sum(
                    1 for iv, d in zip(cycles, deaths) if iv.birth_grade <= i and d <= j
                )
                assert count == KI.matroid.rank_of(KI.F.level(i) & KI.G.level(j)), (i, j)

        B = doubly_minimal_basis(KI.matroid, KI.F, KI.G)
        assert sorted((KI.F.chi[b], KI.G.chi[b]) for b in B) == sorted(
            (iv.birth_grade, d) for iv, d in zip(cycles, deaths)
        )

    def test_dimension_zero(self, square_cycle):
        """0 次元では消えない成分の次数が最終段 + 1"""
        KI = kernel_image_filtrations(square_cycle, 0)
        assert KI.matroid.rank == 4
        assert max(KI.G.chi.values()) == 3
        assert check_modular_pair(KI.matroid, KI.F, KI.G)
