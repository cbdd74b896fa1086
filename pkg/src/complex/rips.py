"""Vietoris-Rips 複体

単体の次数は直径が閾値以下の相異なる距離値の中で何番目か（1 始まり、頂点は 0）。
"""
from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import structlog
from sklearn.metrics import pairwise_distances

from src.algebra.field import PrimeField, make_field
from src.complex.filtered import FilteredComplex
from src.complex.simplicial import Simplex, from_simplices
from src.config.settings import get_settings
from src.errors import InvalidDistanceMatrix, TooLarge

logger = structlog.get_logger()


class DistanceMatrix:
    """対称・非負・対角 0 の距離行列"""

    def __init__(self, values: npt.ArrayLike):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidDistanceMatrix(f"Distance matrix must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidDistanceMatrix("Distance matrix contains non-finite values")
        if np.any(arr < 0):
            raise InvalidDistanceMatrix("Distance matrix contains negative values")
        if np.any(np.diag(arr) != 0):
            raise InvalidDistanceMatrix("Distance matrix must have a zero diagonal")
        if not np.array_equal(arr, arr.T):
            raise InvalidDistanceMatrix("Distance matrix is not symmetric")
        self.values = arr

    @classmethod
    def from_points(cls, points: npt.ArrayLike) -> DistanceMatrix:
        """点群のユークリッド距離"""
        X = np.atleast_2d(np.asarray(points, dtype=np.float64))
        d = pairwise_distances(X, metric="euclidean")
        d = np.maximum(d, d.T)
        np.fill_diagonal(d, 0.0)
        return cls(d)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def __repr__(self) -> str:
        return f"DistanceMatrix(n={self.n})"


class RipsFiltration:
    """距離行列から単体の次数・余面・面を計算する"""

    def __init__(self, d: DistanceMatrix, threshold: float = math.inf):
        if threshold < 0 or math.isnan(threshold):
            raise InvalidDistanceMatrix(f"Threshold must be non-negative, got {threshold}")
        self.d = d
        self.threshold = threshold
        n = d.n
        iu = np.triu_indices(n, 1)
        values = d.values[iu]
        self.levels = np.unique(values[values <= threshold])

        grade = np.full((n, n), -1, dtype=np.int64)
        admissible = d.values <= threshold
        ranks = np.searchsorted(self.levels, d.values) + 1
        grade[admissible] = ranks[admissible]
        np.fill_diagonal(grade, 0)
        self.edge_grade = grade
        self.adjacency = grade > 0
        np.fill_diagonal(self.adjacency, False)

    @property
    def n(self) -> int:
        return self.d.n

    @property
    def level_values(self) -> tuple[float, ...]:
        return (0.0, *(float(v) for v in self.levels))

    def grade(self, simplex: Simplex) -> int:
        """直径の次数（辺が閾値を超えれば -1）"""
        if len(simplex) == 1:
            return 0
        idx = np.asarray(simplex)
        block = self.edge_grade[np.ix_(idx, idx)]
        off = block[~np.eye(len(simplex), dtype=bool)]
        if np.any(off < 0):
            return -1
        return int(off.max())

    def iter_simplices(self, dim: int) -> Iterator[Simplex]:
        """dim 次元単体を辞書式順に列挙"""
        size = dim + 1

        def extend(prefix: tuple[int, ...], candidates: npt.NDArray[np.int64]) -> Iterator[Simplex]:
            if len(prefix) == size:
                yield prefix
                return
            for k, v in enumerate(candidates):
                rest = candidates[k + 1 :]
                yield from extend((*prefix, int(v)), rest[self.adjacency[v, rest]])

        yield from extend((), np.arange(self.n))

    def min_cofacet(self, simplex: Simplex) -> tuple[Simplex, int] | None:
        """(次数, 辞書式) で最小の余面"""
        idx = np.asarray(simplex)
        rows = self.edge_grade[idx, :]
        valid = np.all(rows > 0, axis=0)
        valid[idx] = False
        if not valid.any():
            return None
        base = self.grade(simplex)
        cofacet_grades = np.maximum(rows.max(axis=0), base)
        best = int(cofacet_grades[valid].min())
        candidates = np.nonzero(valid & (cofacet_grades == best))[0]
        cofacet = min(tuple(sorted((*simplex, int(v)))) for v in candidates)
        return cofacet, best

    def max_facet(self, simplex: Simplex) -> tuple[Simplex, int]:
        """(次数, 辞書式) で最大の面"""
        best: tuple[int, Simplex] | None = None
        for i in range(len(simplex)):
            face = simplex[:i] + simplex[i + 1 :]
            key = (self.grade(face), face)
            if best is None or key > best:
                best = key
        assert best is not None
        return best[1], best[0]

    def apparent_cofacet(self, simplex: Simplex) -> Simplex | None:
        """simplex を上向きに対にする同次数の見かけの対の相手"""
        found = self.min_cofacet(simplex)
        if found is None:
            return None
        cofacet, grade = found
        if grade != self.grade(simplex):
            return None
        facet, _ = self.max_facet(cofacet)
        return cofacet if facet == simplex else None

    def apparent_facet(self, simplex: Simplex) -> Simplex | None:
        """simplex を下向きに対にする同次数の見かけの対の相手"""
        if len(simplex) < 2:
            return None
        facet, grade = self.max_facet(simplex)
        if grade != self.grade(simplex):
            return None
        found = self.min_cofacet(facet)
        return facet if found is not None and found[0] == simplex else None


def _collect(
    filtration: RipsFiltration, dims: range, cap: int, grades: dict[Simplex, int]
) -> None:
    for k in dims:
        for simplex in filtration.iter_simplices(k):
            grades[simplex] = filtration.grade(simplex)
            if len(grades) > cap:
                raise TooLarge(f"Rips complex exceeds {cap} cells")


def vietoris_rips(
    d: DistanceMatrix,
    dim_max: int,
    threshold: float = math.inf,
    field: PrimeField | None = None,
    max_cells: int | None = None,
) -> FilteredComplex:
    """直径が閾値以下の dim_max 次元以下の単体すべて

    Args:
        d: 距離行列
        dim_max: 最大次元
        threshold: 直径の上限
        field: 係数体（省略時は設定の既定素数）
        max_cells: セル数の上限（省略時は設定の complex_max_cells）

    Returns:
        FilteredComplex
    """
    if dim_max < 0:
        raise InvalidDistanceMatrix(f"dim_max must be non-negative, got {dim_max}")
    settings = get_settings()
    field = field or make_field(settings.default_prime)
    filtration = RipsFiltration(d, threshold)
    grades: dict[Simplex, int] = {}
    _collect(filtration, range(dim_max + 1), max_cells or settings.complex_max_cells, grades)
    complex_ = from_simplices(grades, field, filtration.level_values)
    logger.info("Rips complex built", points=d.n, dim_max=dim_max, cells=complex_.cell_counts())
    return complex_


@dataclass
class RipsSkeleton:
    """上向きに対になる最高次元単体を省いた Rips 複体と計数"""

    complex: FilteredComplex
    top_dim: int
    generated: int = 0
    skipped_upward: int = 0
    matched_downward: int = 0

    @property
    def stored(self) -> int:
        """|M_N|: 上下どちらにも対にならない最高次元単体"""
        return self.generated - self.skipped_upward - self.matched_downward


def rips_morse_skeleton(
    d: DistanceMatrix,
    dim_max: int,
    threshold: float = math.inf,
    field: PrimeField | None = None,
    max_cells: int | None = None,
) -> RipsSkeleton:
    """最高次元を逐次生成し、見かけの対で上向きに対になる単体を捨てる

    dim_max 未満の次元のホモロジーは vietoris_rips と一致する。
    """
    if dim_max < 0:
        raise InvalidDistanceMatrix(f"dim_max must be non-negative, got {dim_max}")
    settings = get_settings()
    field = field or make_field(settings.default_prime)
    filtration = RipsFiltration(d, threshold)
    grades: dict[Simplex, int] = {}
    cap = max_cells or settings.complex_max_cells
    top = dim_max
    _collect(filtration, range(top), cap, grades)

    generated = skipped = downward = 0
    for simplex in filtration.iter_simplices(top):
        generated += 1
        if top >= 1 and filtration.apparent_cofacet(simplex) is not None:
            skipped += 1
            continue
        if filtration.apparent_facet(simplex) is not None:
            downward += 1
        grades[simplex] = filtration.grade(simplex)
        if len(grades) > cap:
            raise TooLarge(f"Rips skeleton exceeds {cap} cells")

    complex_ = from_simplices(grades, field, filtration.level_values)
    logger.info(
        "Rips skeleton built",
        points=d.n,
        dim_max=dim_max,
        generated=generated,
        skipped=skipped,
        cells=complex_.cell_counts(),
    )
    return RipsSkeleton(complex_, top, generated, skipped, downward)
