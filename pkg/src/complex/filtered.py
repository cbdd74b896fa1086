"""フィルター付きセル複体"""
from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass

import structlog

from src.algebra.field import PrimeField
from src.algebra.spmat import (
    CellId,
    Column,
    GradedOrder,
    SparseMatrix,
    combine_columns,
    is_f_upper_triangular,
    multiply,
    reorder,
)
from src.errors import (
    DimensionMismatch,
    FiltrationViolation,
    InvalidCell,
    NotAChainComplex,
    UnknownId,
)

logger = structlog.get_logger()


@dataclass(frozen=True)
class Cell:
    """セル（id, 次元, フィルトレーション次数）"""

    id: CellId
    dim: int
    grade: int

    def __post_init__(self) -> None:
        if self.dim < 0:
            raise InvalidCell(f"Cell {self.id!r} has negative dimension {self.dim}")
        if self.grade < 0:
            raise InvalidCell(f"Cell {self.id!r} has negative grade {self.grade}")


class FilteredComplex:
    """次元ごとの順序付きセル E_n と境界行列 A_n（行 E_{n-1}, 列 E_n）

    A_n · A_{n+1} = 0 と、各 A_n が χ について上三角であることを構築時に検証する。
    """

    def __init__(
        self,
        cells: Sequence[GradedOrder],
        boundaries: Mapping[int, SparseMatrix],
        field: PrimeField,
        level_values: Sequence[float] | None = None,
        check_chain: bool = True,
    ):
        self.cells: tuple[GradedOrder, ...] = tuple(cells)
        self.field = field
        self.level_values: tuple[float, ...] = tuple(float(v) for v in (level_values or ()))

        self._dim: dict[CellId, int] = {}
        self._grade: dict[CellId, int] = {}
        for n, order in enumerate(self.cells):
            for e in order:
                if e in self._dim:
                    raise InvalidCell(f"Cell id {e!r} appears in dimensions {self._dim[e]} and {n}")
                self._dim[e] = n
                self._grade[e] = order.grade[e]

        self.boundaries: dict[int, SparseMatrix] = {}
        for n in range(1, len(self.cells)):
            A = boundaries.get(n)
            rows, cols = self.cells[n - 1], self.cells[n]
            if A is None:
                A = SparseMatrix.zeros(rows.elements, cols.elements, field)
            elif A.field != field:
                raise DimensionMismatch(f"Boundary {n} is over {A.field!r}, expected {field!r}")
            self.boundaries[n] = reorder(A, rows, cols)
        extra = set(boundaries) - set(self.boundaries)
        if any(not boundaries[n].is_zero() for n in extra):
            raise DimensionMismatch(f"Boundary matrices for unknown dimensions {sorted(extra)}")

        self._cofaces: dict[int, dict[CellId, dict[CellId, int]]] = {}
        self._validate(check_chain)

    def _validate(self, check_chain: bool) -> None:
        for n, A in self.boundaries.items():
            if not is_f_upper_triangular(A, self._grade, self._grade):
                for col, column in A.nonzero_columns():
                    for row in column:
                        if self._grade[row] > self._grade[col]:
                            raise FiltrationViolation(
                                f"Face {row!r} (grade {self._grade[row]}) enters after "
                                f"coface {col!r} (grade {self._grade[col]})"
                            )
            if check_chain and n + 1 in self.boundaries:
                if not multiply(A, self.boundaries[n + 1]).is_zero():
                    raise NotAChainComplex(f"A_{n} · A_{n + 1} != 0")

    # --- 参照 ---

    @property
    def top_dim(self) -> int:
        return len(self.cells) - 1

    @property
    def total_cells(self) -> int:
        return len(self._dim)

    @property
    def max_grade(self) -> int:
        return max(self._grade.values(), default=0)

    def cell_counts(self) -> list[int]:
        return [len(order) for order in self.cells]

    def __contains__(self, e: object) -> bool:
        return e in self._dim

    def dim(self, e: CellId) -> int:
        try:
            return self._dim[e]
        except KeyError as exc:
            raise UnknownId(f"Unknown cell {e!r}") from exc

    def grade(self, e: CellId) -> int:
        try:
            return self._grade[e]
        except KeyError as exc:
            raise UnknownId(f"Unknown cell {e!r}") from exc

    @property
    def grades(self) -> Mapping[CellId, int]:
        return self._grade

    def cell(self, e: CellId) -> Cell:
        return Cell(e, self.dim(e), self.grade(e))

    def iter_cells(self) -> Iterator[Cell]:
        for n, order in enumerate(self.cells):
            for e in order:
                yield Cell(e, n, order.grade[e])

    def grade_value(self, grade: int) -> float:
        """次数を実数値に変換（表がなければ次数そのもの）"""
        if 0 <= grade < len(self.level_values):
            return self.level_values[grade]
        return float(grade)

    def order(self, n: int) -> GradedOrder:
        if 0 <= n < len(self.cells):
            return self.cells[n]
        return GradedOrder((), {})

    def boundary(self, n: int) -> SparseMatrix:
        """A_n（範囲外は空の零行列）"""
        if n in self.boundaries:
            return self.boundaries[n]
        return SparseMatrix.zeros(self.order(n - 1).elements, self.order(n).elements, self.field)

    def faces(self, e: CellId) -> Mapping[CellId, int]:
        n = self.dim(e)
        if n == 0:
            return {}
        return self.boundaries[n].column(e)

    def cofaces(self, e: CellId) -> Mapping[CellId, int]:
        n = self.dim(e) + 1
        if n not in self.boundaries:
            return {}
        if n not in self._cofaces:
            self._cofaces[n] = self.boundaries[n].row_index()
        return self._cofaces[n].get(e, {})

    def apply_boundary(self, n: int, chain: Mapping[CellId, int]) -> Column:
        """n 次元チェインの境界"""
        if n == 0 or not chain:
            return {}
        return combine_columns(self.boundaries[n], chain)

    # --- 変換 ---

    def reordered(self, orders: Mapping[int, GradedOrder]) -> FilteredComplex:
        """次元ごとの順序を差し替えた同じ複体"""
        cells = []
        for n, current in enumerate(self.cells):
            new = orders.get(n, current)
            if set(new.elements) != set(current.elements):
                raise DimensionMismatch(f"Order for dimension {n} is not a permutation of E_{n}")
            if any(new.grade[e] != current.grade[e] for e in new):
                raise FiltrationViolation(f"Order for dimension {n} changes cell grades")
            cells.append(new)
        return FilteredComplex(cells, self.boundaries, self.field, self.level_values, False)

    def truncated(self, dim_max: int) -> FilteredComplex:
        """dim_max 以下のセルだけを残す"""
        cells = self.cells[: dim_max + 1]
        boundaries = {n: A for n, A in self.boundaries.items() if n <= dim_max}
        return FilteredComplex(cells, boundaries, self.field, self.level_values, False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FilteredComplex):
            return NotImplemented
        return (
            self.cells == other.cells
            and self.boundaries == other.boundaries
            and self.field == other.field
            and self.level_values == other.level_values
        )

    def __hash__(self) -> int:
        return hash((self.cells, self.field))

    def __repr__(self) -> str:
        return f"FilteredComplex(cells={self.cell_counts()}, {self.field!r})"


def from_boundaries(
    cells: Iterable[Cell],
    entries: Mapping[int, Iterable[tuple[CellId, CellId, int]]],
    field: PrimeField,
    level_values: Sequence[float] | None = None,
) -> FilteredComplex:
    """セル一覧と境界成分 (n, 行, 列, 係数) から複体を作る

    同じ次数のセルは入力順に並べる。

    Args:
        cells: セル一覧
        entries: 次元 n ごとの A_n の成分 (行 id, 列 id, 係数)
        field: 係数体
        level_values: 次数 -> 実数値の表

    Returns:
        検証済みの FilteredComplex
    """
    by_dim: dict[int, list[Cell]] = defaultdict(list)
    seen: set[CellId] = set()
    for cell in cells:
        if cell.id in seen:
            raise InvalidCell(f"Duplicate cell id {cell.id!r}")
        seen.add(cell.id)
        by_dim[cell.dim].append(cell)

    top = max(by_dim, default=-1)
    orders = [
        GradedOrder.from_grades({c.id: c.grade for c in by_dim.get(n, [])}) for n in range(top + 1)
    ]

    boundaries: dict[int, SparseMatrix] = {}
    for n, items in entries.items():
        items = list(items)
        if not items:
            continue
        if not 1 <= n <= top:
            raise UnknownId(f"Boundary entries for dimension {n} outside 1..{top}")
        data: dict[CellId, list[tuple[CellId, int]]] = defaultdict(list)
        for row, col, coeff in items:
            if row not in orders[n - 1] or col not in orders[n]:
                raise UnknownId(f"Entry ({row!r}, {col!r}) is not a ({n - 1}, {n})-cell pair")
            data[col].append((row, coeff))
        boundaries[n] = SparseMatrix(orders[n - 1].elements, orders[n].elements, data, field)

    complex_ = FilteredComplex(orders, boundaries, field, level_values)
    logger.debug("Complex built", cells=complex_.cell_counts())
    return complex_
