"""素体上の疎行列

列優先で保持し、行・列はそれぞれ順序付きの id 列を持つ。
境界作用素、簡約の因子 L / R はすべてこの表現を使う。
"""
from __future__ import annotations

import heapq
from collections.abc import Hashable, Iterable, Iterator, Mapping, Sequence
from typing import Any

import numpy as np
import numpy.typing as npt

from src.algebra.field import PrimeField
from src.errors import (
    DimensionMismatch,
    FiltrationViolation,
    MissingGrade,
    NotTriangular,
    SingularDiagonal,
    UnknownId,
)

CellId = Hashable
Column = dict[Any, int]


class GradedOrder:
    """次数を細分する線形順序

    position(s) < position(t) ならば grade(s) <= grade(t) を満たす。
    """

    __slots__ = ("elements", "grade", "_positions")

    def __init__(self, elements: Iterable[CellId], grade: Mapping[CellId, int]):
        self.elements: tuple[CellId, ...] = tuple(elements)
        self._positions: dict[CellId, int] = {e: i for i, e in enumerate(self.elements)}
        if len(self._positions) != len(self.elements):
            raise DimensionMismatch("Duplicate ids in order")

        missing = [e for e in self.elements if e not in grade]
        if missing:
            raise MissingGrade(f"No grade for ids {missing[:5]}")
        self.grade: dict[CellId, int] = {e: int(grade[e]) for e in self.elements}

        for prev, cur in zip(self.elements, self.elements[1:]):
            if self.grade[prev] > self.grade[cur]:
                raise FiltrationViolation(
                    f"Order does not refine grades: {prev!r} (grade {self.grade[prev]}) "
                    f"precedes {cur!r} (grade {self.grade[cur]})"
                )

    @classmethod
    def from_grades(
        cls,
        grade: Mapping[CellId, int],
        key: Any = None,
    ) -> GradedOrder:
        """次数（同次数内は key、なければ入力順）で並べた順序を作る"""
        items = list(grade)
        if key is None:
            index = {e: i for i, e in enumerate(items)}
            items.sort(key=lambda e: (grade[e], index[e]))
        else:
            items.sort(key=lambda e: (grade[e], key(e)))
        return cls(items, grade)

    def position(self, e: CellId) -> int:
        try:
            return self._positions[e]
        except KeyError as exc:
            raise UnknownId(f"Unknown id {e!r}") from exc

    @property
    def positions(self) -> Mapping[CellId, int]:
        return self._positions

    def restrict(self, ids: Iterable[CellId]) -> GradedOrder:
        """部分集合への制限（順序は保つ）"""
        keep = set(ids)
        unknown = keep - self._positions.keys()
        if unknown:
            raise UnknownId(f"Unknown ids {list(unknown)[:5]}")
        return GradedOrder([e for e in self.elements if e in keep], self.grade)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[CellId]:
        return iter(self.elements)

    def __contains__(self, e: object) -> bool:
        return e in self._positions

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedOrder):
            return NotImplemented
        return self.elements == other.elements and self.grade == other.grade

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"GradedOrder({len(self.elements)} ids)"


class SparseMatrix:
    """列優先の疎行列

    columns[c] は行順にソートされた {行 id: 非零係数}。零係数は保持しない。
    """

    __slots__ = ("rows", "cols", "field", "_data", "_row_pos", "_col_pos")

    def __init__(
        self,
        rows: Iterable[CellId],
        cols: Iterable[CellId],
        columns: Mapping[CellId, Mapping[CellId, int] | Iterable[tuple[CellId, int]]],
        field: PrimeField,
    ):
        self.rows: tuple[CellId, ...] = tuple(rows)
        self.cols: tuple[CellId, ...] = tuple(cols)
        self.field = field
        self._row_pos = {r: i for i, r in enumerate(self.rows)}
        self._col_pos = {c: i for i, c in enumerate(self.cols)}
        if len(self._row_pos) != len(self.rows) or len(self._col_pos) != len(self.cols):
            raise DimensionMismatch("Duplicate row or column ids")

        p = field.p
        data: dict[CellId, Column] = {}
        for col, entries in columns.items():
            if col not in self._col_pos:
                raise UnknownId(f"Unknown column id {col!r}")
            items = entries.items() if isinstance(entries, Mapping) else entries
            acc: Column = {}
            for row, coeff in items:
                if row not in self._row_pos:
                    raise UnknownId(f"Unknown row id {row!r} in column {col!r}")
                acc[row] = (acc.get(row, 0) + coeff) % p
            column = self._sorted_column(acc)
            if column:
                data[col] = column
        self._data = data

    @classmethod
    def _trusted(
        cls,
        rows: tuple[CellId, ...],
        cols: tuple[CellId, ...],
        data: Mapping[CellId, Column],
        field: PrimeField,
        row_pos: dict[CellId, int] | None = None,
        col_pos: dict[CellId, int] | None = None,
    ) -> SparseMatrix:
        """検証なしで構築する（係数は [0, p) に簡約済みであること）"""
        obj = cls.__new__(cls)
        obj.rows = rows
        obj.cols = cols
        obj.field = field
        obj._row_pos = row_pos if row_pos is not None else {r: i for i, r in enumerate(rows)}
        obj._col_pos = col_pos if col_pos is not None else {c: i for i, c in enumerate(cols)}
        obj._data = {}
        for col, column in data.items():
            column = obj._sorted_column(column)
            if column:
                obj._data[col] = column
        return obj

    def _sorted_column(self, column: Mapping[CellId, int]) -> Column:
        pos = self._row_pos
        nonzero = [(r, v) for r, v in column.items() if v]
        nonzero.sort(key=lambda rv: pos[rv[0]])
        return dict(nonzero)

    # --- 構築 ---

    @classmethod
    def identity(cls, ids: Iterable[CellId], field: PrimeField) -> SparseMatrix:
        ids = tuple(ids)
        return cls._trusted(ids, ids, {i: {i: 1} for i in ids}, field)

    @classmethod
    def zeros(
        cls, rows: Iterable[CellId], cols: Iterable[CellId], field: PrimeField
    ) -> SparseMatrix:
        return cls._trusted(tuple(rows), tuple(cols), {}, field)

    @classmethod
    def from_dense(
        cls,
        matrix: npt.ArrayLike,
        field: PrimeField,
        rows: Sequence[CellId] | None = None,
        cols: Sequence[CellId] | None = None,
    ) -> SparseMatrix:
        """密行列から構築（id を省略すると 0 始まりの整数）"""
        arr = np.asarray(matrix, dtype=np.int64)
        if arr.ndim != 2:
            arr = arr.reshape(len(rows or ()), len(cols or ()))
        rows = tuple(range(arr.shape[0])) if rows is None else tuple(rows)
        cols = tuple(range(arr.shape[1])) if cols is None else tuple(cols)
        if arr.shape != (len(rows), len(cols)):
            raise DimensionMismatch(f"Shape {arr.shape} does not match ids")
        arr = arr % field.p
        data: dict[CellId, Column] = {}
        for j, col in enumerate(cols):
            nz = np.nonzero(arr[:, j])[0]
            if nz.size:
                data[col] = {rows[i]: int(arr[i, j]) for i in nz}
        return cls._trusted(rows, cols, data, field)

    # --- 参照 ---

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self._data.values())

    @property
    def columns(self) -> dict[CellId, tuple[tuple[CellId, int], ...]]:
        return {c: tuple(self._data[c].items()) for c in self.cols if c in self._data}

    def column(self, col: CellId) -> Mapping[CellId, int]:
        """列 col の {行: 係数}（読み取り専用として扱う）"""
        if col not in self._col_pos:
            raise UnknownId(f"Unknown column id {col!r}")
        return self._data.get(col, {})

    def entry(self, row: CellId, col: CellId) -> int:
        return self.column(col).get(row, 0)

    def row_position(self, row: CellId) -> int:
        return self._row_pos[row]

    def col_position(self, col: CellId) -> int:
        return self._col_pos[col]

    def has_row(self, row: CellId) -> bool:
        return row in self._row_pos

    def has_col(self, col: CellId) -> bool:
        return col in self._col_pos

    def nonzero_columns(self) -> Iterator[tuple[CellId, Mapping[CellId, int]]]:
        """非零列を列順に返す"""
        for col in self.cols:
            column = self._data.get(col)
            if column:
                yield col, column

    def row_index(self) -> dict[CellId, dict[CellId, int]]:
        """行ごとの {列: 係数}（列順）を一時的に作る"""
        index: dict[CellId, dict[CellId, int]] = {}
        for col, column in self.nonzero_columns():
            for row, coeff in column.items():
                index.setdefault(row, {})[col] = coeff
        return index

    def is_zero(self) -> bool:
        return not self._data

    def to_dense(self) -> npt.NDArray[np.int64]:
        arr = np.zeros(self.shape, dtype=np.int64)
        for col, column in self._data.items():
            j = self._col_pos[col]
            for row, coeff in column.items():
                arr[self._row_pos[row], j] = coeff
        return arr

    def transpose(self) -> SparseMatrix:
        return SparseMatrix._trusted(self.cols, self.rows, self.row_index(), self.field)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.field == other.field
            and self._data == other._data
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.nnz))

    def __repr__(self) -> str:
        return f"SparseMatrix({len(self.rows)}x{len(self.cols)}, nnz={self.nnz}, {self.field!r})"


def combine_columns(A: SparseMatrix, coeffs: Mapping[CellId, int]) -> Column:
    """Σ coeffs[c] · A[:, c] を {行: 係数} で返す（順序なし、零除去済み）"""
    p = A.field.p
    acc: Column = {}
    for col, scale in coeffs.items():
        if not scale:
            continue
        for row, coeff in A._data.get(col, {}).items():
            acc[row] = (acc.get(row, 0) + scale * coeff) % p
    return {r: v for r, v in acc.items() if v}


def multiply(A: SparseMatrix, B: SparseMatrix) -> SparseMatrix:
    """行列積 A · B

    Args:
        A: 左因子
        B: 右因子（rows(B) は cols(A) と同じ id 集合）

    Returns:
        積（零係数は除去）
    """
    if A.field != B.field:
        raise DimensionMismatch(f"Field mismatch: {A.field!r} vs {B.field!r}")
    if len(A.cols) != len(B.rows) or set(A.cols) != set(B.rows):
        raise DimensionMismatch(
            f"Cannot multiply {A.shape[0]}x{A.shape[1]} by {B.shape[0]}x{B.shape[1]}"
        )
    data = {col: combine_columns(A, column) for col, column in B.nonzero_columns()}
    return SparseMatrix._trusted(A.rows, B.cols, data, A.field, row_pos=A._row_pos)


def solve_triangular(
    A: SparseMatrix,
    rhs: Mapping[CellId, int],
    positions: Mapping[CellId, int],
    upper: bool = True,
) -> Column:
    """三角行列 A に対して A x = rhs を解く

    行と列は同じ id 集合で、positions がその順序を与える。
    upper なら列 k の非零は位置 <= k にある。
    """
    field = A.field
    p = field.p
    residual: Column = {r: v % p for r, v in rhs.items() if v % p}
    sign = -1 if upper else 1
    heap = [sign * positions[r] for r in residual]
    heapq.heapify(heap)
    by_position = {positions[r]: r for r in residual}
    queued = set(residual)
    x: Column = {}
    while heap:
        k = by_position[sign * heapq.heappop(heap)]
        queued.discard(k)
        value = residual.pop(k, 0)
        if not value:
            continue
        column = A._data.get(k, {})
        diag = column.get(k, 0)
        if not diag:
            raise SingularDiagonal(f"Zero diagonal entry at {k!r}")
        xk = (value * field.inv(diag)) % p
        x[k] = xk
        for row, coeff in column.items():
            if row == k:
                continue
            new = (residual.get(row, 0) - xk * coeff) % p
            if new:
                residual[row] = new
                if row not in queued:
                    queued.add(row)
                    by_position[positions[row]] = row
                    heapq.heappush(heap, sign * positions[row])
            else:
                residual.pop(row, None)
    return x


def invert_unitriangular(A: SparseMatrix, order: GradedOrder | Sequence[CellId]) -> SparseMatrix:
    """order に関して三角な正方行列の逆行列

    上三角（order で行 <= 列）か下三角かを自動判定し、逆行列も同じ向きの三角になる。

    Args:
        A: 正方行列（行・列は同じ id 集合）
        order: 三角性を判定する順序

    Returns:
        A^{-1}
    """
    elements = order.elements if isinstance(order, GradedOrder) else tuple(order)
    ids = set(elements)
    if set(A.rows) != ids or set(A.cols) != ids or len(A.rows) != len(A.cols):
        raise DimensionMismatch("Matrix rows and columns must both equal the order's ids")
    positions = {e: i for i, e in enumerate(elements)}

    upper = lower = True
    for col, column in A.nonzero_columns():
        pc = positions[col]
        for row in column:
            pr = positions[row]
            if pr < pc:
                lower = False
            elif pr > pc:
                upper = False
        if not upper and not lower:
            raise NotTriangular("Matrix is neither upper nor lower triangular in the given order")

    for e in elements:
        if not A.entry(e, e):
            raise SingularDiagonal(f"Zero diagonal entry at {e!r}")

    data = {col: solve_triangular(A, {col: 1}, positions, upper=upper) for col in A.cols}
    return SparseMatrix._trusted(A.rows, A.cols, data, A.field)


def is_f_upper_triangular(
    A: SparseMatrix,
    f_row: Mapping[CellId, int],
    f_col: Mapping[CellId, int],
) -> bool:
    """非零 A[s, t] がすべて f_row(s) <= f_col(t) を満たすか"""
    missing = [r for r in A.rows if r not in f_row] + [c for c in A.cols if c not in f_col]
    if missing:
        raise MissingGrade(f"No grade for ids {missing[:5]}")
    for col, column in A.nonzero_columns():
        limit = f_col[col]
        for row in column:
            if f_row[row] > limit:
                return False
    return True


def row_reduce_mod_p(
    matrix: npt.ArrayLike, p: int
) -> tuple[npt.NDArray[np.int64], list[int]]:
    """密行列の簡約行階段形（mod p）

    Returns:
        (簡約後の行列, ピボット列の添字)
    """
    M = np.array(matrix, dtype=np.int64) % p
    if M.ndim != 2:
        raise DimensionMismatch("Expected a 2-d array")
    n_rows, n_cols = M.shape
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            M[[r, k]] = M[[k, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, p)) % p
        factors = M[:, c].copy()
        factors[r] = 0
        targets = np.nonzero(factors)[0]
        if targets.size:
            M[targets] = (M[targets] - np.outer(factors[targets], M[r])) % p
        pivots.append(c)
        r += 1
    return M, pivots


def rank(A: SparseMatrix) -> int:
    """体上の階数（密な消去、オラクル用）"""
    if A.is_zero():
        return 0
    _, pivots = row_reduce_mod_p(A.to_dense(), A.field.p)
    return len(pivots)


def submatrix(
    A: SparseMatrix, row_ids: Iterable[CellId], col_ids: Iterable[CellId]
) -> SparseMatrix:
    """行・列の部分集合への制限（A の順序を保つ）"""
    row_set = set(row_ids)
    col_set = set(col_ids)
    unknown = (row_set - A._row_pos.keys()) | (col_set - A._col_pos.keys())
    if unknown:
        raise UnknownId(f"Unknown ids {list(unknown)[:5]}")
    rows = tuple(r for r in A.rows if r in row_set)
    cols = tuple(c for c in A.cols if c in col_set)
    data: dict[CellId, Column] = {}
    for col in cols:
        column = A._data.get(col)
        if column:
            kept = {r: v for r, v in column.items() if r in row_set}
            if kept:
                data[col] = kept
    return SparseMatrix._trusted(rows, cols, data, A.field)


def reorder(
    A: SparseMatrix,
    row_order: GradedOrder | Sequence[CellId],
    col_order: GradedOrder | Sequence[CellId],
) -> SparseMatrix:
    """同じ成分のまま行・列の順序を入れ替える"""
    rows = row_order.elements if isinstance(row_order, GradedOrder) else tuple(row_order)
    cols = col_order.elements if isinstance(col_order, GradedOrder) else tuple(col_order)
    if rows == A.rows and cols == A.cols:
        return A
    if len(rows) != len(A.rows) or set(rows) != set(A.rows):
        raise DimensionMismatch("Row order is not a permutation of the matrix rows")
    if len(cols) != len(A.cols) or set(cols) != set(A.cols):
        raise DimensionMismatch("Column order is not a permutation of the matrix columns")
    return SparseMatrix._trusted(rows, cols, A._data, A.field)


def with_columns_zeroed(A: SparseMatrix, cols: Iterable[CellId]) -> SparseMatrix:
    drop = set(cols)
    data = {c: column for c, column in A._data.items() if c not in drop}
    return SparseMatrix._trusted(A.rows, A.cols, data, A.field, A._row_pos, A._col_pos)


def extend_by_identity(A: SparseMatrix, ids: Sequence[CellId]) -> SparseMatrix:
    """部分集合上の正方行列 A を ids 全体へ単位行列で延長する"""
    inner = set(A.cols)
    if set(A.rows) != inner:
        raise DimensionMismatch("Only square blocks on a common id set can be extended")
    data: dict[CellId, Column] = {}
    for e in ids:
        data[e] = dict(A._data.get(e, {})) if e in inner else {e: 1}
    return SparseMatrix._trusted(tuple(ids), tuple(ids), data, A.field)
