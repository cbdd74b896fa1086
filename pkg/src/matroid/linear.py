"""線形マトロイドとフィルトレーション

独立性は列ベクトルの消去で判定する。マトロイドを外延的に保持することはしない。
"""
from __future__ import annotations

import itertools
from collections import Counter
from collections.abc import Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np
import numpy.typing as npt
import structlog

from src.algebra.field import PrimeField
from src.algebra.spmat import SparseMatrix, is_f_upper_triangular
from src.errors import (
    DimensionMismatch,
    MissingGrade,
    NotABasis,
    NotAFiltration,
    NotModular,
    OverlapError,
    UnknownElement,
)

logger = structlog.get_logger()

Element = Hashable

_SPAN_CACHE_LIMIT = 4096


class _Eliminator:
    """ピボット列付きの逐次消去"""

    __slots__ = ("field", "pivots")

    def __init__(self, field: PrimeField):
        self.field = field
        # ピボット位置 -> ピボット係数 1 に正規化済みのベクトル
        self.pivots: dict[int, list[int]] = {}

    def copy(self) -> _Eliminator:
        other = _Eliminator(self.field)
        other.pivots = dict(self.pivots)
        return other

    def reduce(self, vector: Sequence[int]) -> list[int]:
        p = self.field.p
        w = [v % p for v in vector]
        for idx, basis in self.pivots.items():
            c = w[idx]
            if c:
                w = [(a - c * b) % p for a, b in zip(w, basis)]
        return w

    def add(self, vector: Sequence[int]) -> bool:
        """独立なら取り込んで True"""
        w = self.reduce(vector)
        for idx, value in enumerate(w):
            if value:
                scale = self.field.inv(value)
                self.pivots[idx] = [(a * scale) % self.field.p for a in w]
                return True
        return False

    def contains(self, vector: Sequence[int]) -> bool:
        return not any(self.reduce(vector))

    @property
    def rank(self) -> int:
        return len(self.pivots)


class LinearMatroid:
    """体上の表現 φ: E -> 𝕜^r で与えられるマトロイド"""

    def __init__(
        self,
        ground: Sequence[Element],
        vectors: Mapping[Element, Sequence[int]],
        field: PrimeField,
    ):
        self.ground: tuple[Element, ...] = tuple(ground)
        self.field = field
        self._position = {e: i for i, e in enumerate(self.ground)}
        if len(self._position) != len(self.ground):
            raise DimensionMismatch("Duplicate elements in ground set")
        missing = [e for e in self.ground if e not in vectors]
        if missing:
            raise UnknownElement(f"No vector for elements {missing[:5]}")
        lengths = {len(vectors[e]) for e in self.ground}
        if len(lengths) > 1:
            raise DimensionMismatch(f"Vectors have differing lengths {sorted(lengths)}")
        self.ambient_dim = lengths.pop() if lengths else 0
        self.vectors: dict[Element, tuple[int, ...]] = {
            e: tuple(int(v) % field.p for v in vectors[e]) for e in self.ground
        }
        self._span_cache: dict[frozenset[Element], _Eliminator] = {}

    @classmethod
    def from_columns(
        cls,
        matrix: npt.ArrayLike,
        field: PrimeField,
        ids: Sequence[Element] | None = None,
    ) -> LinearMatroid:
        """行列の列を要素とするマトロイド"""
        arr = np.asarray(matrix, dtype=np.int64)
        ids = list(range(arr.shape[1])) if ids is None else list(ids)
        return cls(ids, {e: arr[:, j].tolist() for j, e in enumerate(ids)}, field)

    @classmethod
    def uniform(
        cls,
        r: int,
        n: int,
        field: PrimeField,
        ids: Sequence[Element] | None = None,
    ) -> LinearMatroid:
        """一様マトロイド U_{r,n} の一般位置表現

        n <= r+1 なら単位ベクトルと全 1 ベクトル、それ以外は Vandermonde 列を使う。
        """
        ids = list(range(n)) if ids is None else list(ids)
        if len(ids) != n:
            raise DimensionMismatch(f"Expected {n} ids, got {len(ids)}")
        columns: list[list[int]] = []
        if n <= r:
            columns = [[1 if i == j else 0 for i in range(r)] for j in range(n)]
        elif n == r + 1:
            columns = [[1 if i == j else 0 for i in range(r)] for j in range(r)]
            columns.append([1] * r)
        else:
            if n > field.p:
                raise DimensionMismatch(
                    f"U_{{{r},{n}}} needs {n} distinct field elements, GF({field.p}) has {field.p}"
                )
            columns = [[pow(x, k, field.p) for k in range(r)] for x in range(n)]
        return cls(ids, dict(zip(ids, columns)), field)

    # --- 基本操作 ---

    def _elements(self, S: Iterable[Element]) -> list[Element]:
        items = list(S)
        unknown = [e for e in items if e not in self._position]
        if unknown:
            raise UnknownElement(f"Unknown elements {unknown[:5]}")
        return sorted(set(items), key=self._position.__getitem__)

    def _span(self, S: Iterable[Element]) -> _Eliminator:
        key = frozenset(self._elements(S))
        cached = self._span_cache.get(key)
        if cached is not None:
            return cached
        elim = _Eliminator(self.field)
        for e in sorted(key, key=self._position.__getitem__):
            elim.add(self.vectors[e])
        if len(self._span_cache) >= _SPAN_CACHE_LIMIT:
            self._span_cache.clear()
        self._span_cache[key] = elim
        return elim

    def rank_of(self, S: Iterable[Element]) -> int:
        return self._span(S).rank

    @property
    def rank(self) -> int:
        return self.rank_of(self.ground)

    def is_independent(self, S: Iterable[Element]) -> bool:
        items = list(S)
        elements = self._elements(items)
        if len(elements) != len(items):
            return False
        elim = _Eliminator(self.field)
        return all(elim.add(self.vectors[e]) for e in elements)

    def is_basis(self, B: Iterable[Element]) -> bool:
        items = list(B)
        return len(items) == self.rank and self.is_independent(items)

    def closure(self, S: Iterable[Element]) -> frozenset[Element]:
        """φ(e) が span φ(S) に入る要素全体"""
        elim = self._span(S)
        return frozenset(e for e in self.ground if elim.contains(self.vectors[e]))

    def is_flat(self, S: Iterable[Element]) -> bool:
        items = frozenset(self._elements(S))
        return self.closure(items) == items

    def minor_independent(self, I: Iterable[Element], C: Iterable[Element]) -> bool:
        """I が縮約 M/C で独立か

        rk(I ∪ C) = |I| + rk(C) と同値。
        """
        independent = self._elements(I)
        contracted = self._elements(C)
        overlap = set(independent) & set(contracted)
        if overlap:
            raise OverlapError(f"Elements {sorted(overlap, key=repr)[:5]} lie in both sets")
        elim = self._span(contracted).copy()
        return all(elim.add(self.vectors[e]) for e in independent)

    def contraction_rank(self, S: Iterable[Element]) -> int:
        """M/S の階数を商空間への射影で計算"""
        contracted = set(self._elements(S))
        quotient = self._span(contracted)
        elim = _Eliminator(self.field)
        for e in self.ground:
            if e not in contracted:
                elim.add(quotient.reduce(self.vectors[e]))
        return elim.rank

    # --- 貪欲法 ---

    def greedy_max_basis(self, weight: Mapping[Element, float]) -> frozenset[Element]:
        """重み和が最大の基底（降順走査、同値は台集合の順）"""
        order = sorted(self.ground, key=lambda e: -weight[e])
        elim = _Eliminator(self.field)
        basis = [e for e in order if elim.add(self.vectors[e])]
        return frozenset(basis)

    def greedy_min_basis(self, weight: Mapping[Element, float]) -> frozenset[Element]:
        return self.greedy_max_basis({e: -weight[e] for e in self.ground})

    @staticmethod
    def basis_weight(B: Iterable[Element], weight: Mapping[Element, float]) -> float:
        return sum(weight[b] for b in B)

    def _require_basis(self, B: Iterable[Element]) -> list[Element]:
        items = list(B)
        if not self.is_basis(items):
            raise NotABasis(f"{items[:5]}... is not a basis")
        return self._elements(items)

    def replacement_row(self, B: Iterable[Element], b: Element) -> frozenset[Element]:
        """B - b + e が基底となる e 全体（R_B の b 行）"""
        basis = self._require_basis(B)
        if b not in basis:
            raise NotABasis(f"{b!r} is not in the basis")
        rest = [x for x in basis if x != b]
        hyperplane = self._span(rest)
        return frozenset(e for e in self.ground if not hyperplane.contains(self.vectors[e]))

    def exchange_matrix(self, B: Iterable[Element], F: Iterable[Element]) -> SparseMatrix:
        """R_B[B, F]: B - b + e が基底なら 1"""
        basis = self._require_basis(B)
        other = self._elements(F)
        data: dict[Element, dict[Element, int]] = {e: {} for e in other}
        for b in basis:
            row = self.replacement_row(basis, b)
            for e in other:
                if e in row:
                    data[e][b] = 1
        return SparseMatrix(basis, other, data, self.field)

    def enumerate_bases(self) -> Iterator[frozenset[Element]]:
        """全基底の列挙（小さな例専用）"""
        r = self.rank
        for combo in itertools.combinations(self.ground, r):
            if self.is_independent(combo):
                yield frozenset(combo)

    def is_minimal_basis(self, B: Iterable[Element], F: Filtration) -> bool:
        """B が χ_F の重み和を最小にするか（貪欲解と比較）"""
        basis = self._require_basis(B)
        F.require_grades(self.ground)
        best = self.greedy_min_basis(F.chi)
        return self.basis_weight(basis, F.chi) == self.basis_weight(best, F.chi)

    def is_minimal_basis_by_exchange(
        self,
        B_min: Iterable[Element],
        candidate: Iterable[Element],
        F: Filtration,
    ) -> bool:
        """交換行列の三角性による最小性判定

        R_B[B, candidate] の χ_F 上三角性に加え、次数ごとの要素数が B と一致することを要求する。
        """
        basis = self._require_basis(B_min)
        other = self._require_basis(candidate)
        F.require_grades(self.ground)
        R = self.exchange_matrix(basis, other)
        triangular = is_f_upper_triangular(R, F.chi, F.chi)
        square = Counter(F.chi[b] for b in basis) == Counter(F.chi[e] for e in other)
        return triangular and square

    def __repr__(self) -> str:
        return f"LinearMatroid(|E|={len(self.ground)}, {self.field!r})"


class Filtration:
    """平坦集合の列 F_0 ⊆ … ⊆ F_L = E（特性関数 χ で保持）"""

    def __init__(self, chi: Mapping[Element, int]):
        if any(v < 0 for v in chi.values()):
            raise NotAFiltration("Levels must be non-negative")
        self.chi: dict[Element, int] = {e: int(v) for e, v in chi.items()}
        self.depth = max(self.chi.values(), default=0)

    @classmethod
    def from_levels(cls, levels: Sequence[Iterable[Element]]) -> Filtration:
        """入れ子の集合列から構築"""
        chi: dict[Element, int] = {}
        previous: set[Element] = set()
        for k, level in enumerate(levels):
            current = set(level)
            if not previous <= current:
                raise NotAFiltration(f"Level {k} does not contain level {k - 1}")
            for e in current - previous:
                chi[e] = k
            previous = current
        return cls(chi)

    @property
    def ground(self) -> frozenset[Element]:
        return frozenset(self.chi)

    def level(self, k: int) -> frozenset[Element]:
        return frozenset(e for e, v in self.chi.items() if v <= k)

    def levels(self) -> list[frozenset[Element]]:
        return [self.level(k) for k in range(self.depth + 1)]

    def require_grades(self, elements: Iterable[Element]) -> None:
        missing = [e for e in elements if e not in self.chi]
        if missing:
            raise MissingGrade(f"No level for elements {missing[:5]}")

    def validate(self, M: LinearMatroid) -> None:
        """台集合の一致と各段が平坦集合であることを確認"""
        if self.ground != frozenset(M.ground):
            raise NotAFiltration("Filtration does not cover exactly the ground set")
        for k, level in enumerate(self.levels()):
            if not M.is_flat(level):
                raise NotAFiltration(f"Level {k} is not a flat")


def check_modular_pair(M: LinearMatroid, F: Filtration, G: Filtration) -> bool:
    """rk(F_i ∩ G_j) + rk(F_i ∪ G_j) = rk(F_i) + rk(G_j) がすべての i, j で成り立つか"""
    F.validate(M)
    G.validate(M)
    f_levels = F.levels()
    g_levels = G.levels()
    for i, Fi in enumerate(f_levels):
        rank_f = M.rank_of(Fi)
        for j, Gj in enumerate(g_levels):
            lhs = M.rank_of(Fi & Gj) + M.rank_of(Fi | Gj)
            if lhs != rank_f + M.rank_of(Gj):
                logger.debug("Modularity fails", i=i, j=j)
                return False
    return True


def doubly_minimal_basis(M: LinearMatroid, F: Filtration, G: Filtration) -> frozenset[Element]:
    """χ_F と χ_G の両方について最小な基底

    各段 F_i / F_{i-1} の縮約上で χ_G 順の貪欲法を行い、それらを合併する。

    Args:
        M: マトロイド
        F: フィルトレーション
        G: フィルトレーション（F とモジュラー）

    Returns:
        基底
    """
    if not check_modular_pair(M, F, G):
        raise NotModular("Filtrations are not a modular pair")
    position = {e: i for i, e in enumerate(M.ground)}
    basis: set[Element] = set()
    previous: frozenset[Element] = frozenset()
    for i in range(F.depth + 1):
        current = F.level(i)
        block: list[Element] = []
        for e in sorted(current - previous, key=lambda x: (G.chi[x], position[x])):
            if M.minor_independent([*block, e], previous):
                block.append(e)
        basis.update(block)
        previous = current
    return frozenset(basis)


def intersection_ranks_match(
    M: LinearMatroid,
    B: Iterable[Element],
    F: Filtration,
    G: Filtration,
) -> bool:
    """|B ∩ F_i ∩ G_j| = rk(F_i ∩ G_j) がすべての i, j で成り立つか"""
    basis = frozenset(B)
    for Fi in F.levels():
        for Gj in G.levels():
            block = Fi & Gj
            if len(basis & block) != M.rank_of(block):
                return False
    return True
