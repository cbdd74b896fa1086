"""バーコード（区間の多重集合）"""
from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace

from src.algebra.spmat import CellId


@dataclass(frozen=True)
class Interval:
    """n 次元の区間 [birth, death)

    死なない区間は death = inf, death_grade = None, death_cell = None。
    """

    dim: int
    birth_grade: int
    death_grade: int | None
    birth: float
    death: float
    birth_cell: CellId
    death_cell: CellId | None = None
    representative: Mapping[CellId, int] | None = field(default=None, compare=False)
    witness: Mapping[CellId, int] | None = field(default=None, compare=False)

    @property
    def is_essential(self) -> bool:
        return self.death_grade is None

    @property
    def is_zero_length(self) -> bool:
        """次数が同じ、または実数値が同じ（距離 0 の辺など）"""
        if self.death_grade is None:
            return False
        return self.death_grade == self.birth_grade or self.death == self.birth

    @property
    def key(self) -> tuple[int, int, float]:
        """次数で表した (次元, 生成, 消滅)"""
        death = math.inf if self.death_grade is None else self.death_grade
        return self.dim, self.birth_grade, death

    def with_chains(
        self,
        representative: Mapping[CellId, int],
        witness: Mapping[CellId, int] | None = None,
    ) -> Interval:
        return replace(self, representative=dict(representative), witness=witness)


class Barcode:
    """区間の列

    生の区間（長さ 0 を含む）を保持し、reported() で長さ 0 を除いた表示用の列を返す。
    """

    def __init__(self, intervals: Iterable[Interval] = ()):
        self.intervals: tuple[Interval, ...] = tuple(intervals)

    def reported(self) -> Barcode:
        return Barcode(iv for iv in self.intervals if not iv.is_zero_length)

    def sorted(self) -> Barcode:
        """(次元, 生成, 消滅) の順"""
        return Barcode(sorted(self.intervals, key=lambda iv: (iv.dim, iv.birth, iv.death, iv.key)))

    def signature(self) -> tuple[tuple[int, int, float], ...]:
        """次数の多重集合（オラクルとの比較用）"""
        return tuple(sorted(iv.key for iv in self.intervals))

    def restrict(self, dims: Iterable[int]) -> Barcode:
        keep = set(dims)
        return Barcode(iv for iv in self.intervals if iv.dim in keep)

    def in_dim(self, n: int) -> list[Interval]:
        return [iv for iv in self.intervals if iv.dim == n]

    def betti(self, n_max: int) -> list[int]:
        """最終段で生きている区間の数"""
        counts = Counter(iv.dim for iv in self.intervals if iv.is_essential)
        return [counts.get(n, 0) for n in range(n_max + 1)]

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Barcode):
            return NotImplemented
        return self.signature() == other.signature()

    def __hash__(self) -> int:
        return hash(self.signature())

    def __repr__(self) -> str:
        return f"Barcode({len(self.intervals)} intervals)"
