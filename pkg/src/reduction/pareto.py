"""パレート対による行列簡約

支持集合の中で「列の <_F 最大」かつ「行の <_G 最小」である成分をパレート対と呼ぶ。
パレート対の行 S と列 T からブロック因子 L, R を作り、LAR の (S, T) ブロックを
（添字を付け替えた）単位行列にする。
"""
from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass

import structlog

from src.algebra.spmat import (
    CellId,
    Column,
    GradedOrder,
    SparseMatrix,
    combine_columns,
    extend_by_identity,
    invert_unitriangular,
    multiply,
    rank,
    reorder,
    submatrix,
)
from src.errors import (
    DimensionMismatch,
    NonTermination,
    NotTriangular,
    SingularDiagonal,
    SingularPivotBlock,
)

logger = structlog.get_logger()

Pair = tuple[CellId, CellId]


class ParetoPairing:
    """行 f と列 g の部分マッチング"""

    __slots__ = ("pairs", "row_to_col", "col_to_row")

    def __init__(self, pairs: Iterable[Pair] = ()):
        self.pairs: tuple[Pair, ...] = tuple(pairs)
        self.row_to_col: dict[CellId, CellId] = {f: g for f, g in self.pairs}
        self.col_to_row: dict[CellId, CellId] = {g: f for f, g in self.pairs}
        if len(self.row_to_col) != len(self.pairs) or len(self.col_to_row) != len(self.pairs):
            raise DimensionMismatch("Pairs do not form a partial matching")

    @property
    def S(self) -> frozenset[CellId]:
        return frozenset(self.row_to_col)

    @property
    def T(self) -> frozenset[CellId]:
        return frozenset(self.col_to_row)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def __contains__(self, pair: object) -> bool:
        if not isinstance(pair, tuple) or len(pair) != 2:
            return False
        f, g = pair
        return self.row_to_col.get(f, _MISSING) == g

    def __bool__(self) -> bool:
        return bool(self.pairs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParetoPairing):
            return NotImplemented
        return set(self.pairs) == set(other.pairs)

    def __hash__(self) -> int:
        return hash(frozenset(self.pairs))

    def __repr__(self) -> str:
        return f"ParetoPairing({len(self.pairs)} pairs)"


_MISSING = object()


@dataclass(frozen=True)
class BlockFactors:
    """L（行側）と R（列側、省略可）"""

    L: SparseMatrix
    R: SparseMatrix | None
    pivot_inverse: SparseMatrix


@dataclass(frozen=True)
class StepResult:
    reduced: SparseMatrix
    pairing: ParetoPairing
    L: SparseMatrix
    R: SparseMatrix


@dataclass(frozen=True)
class ReductionResult:
    """matrix_reduce の結果"""

    L: SparseMatrix
    R: SparseMatrix
    pairing: ParetoPairing
    iterations: int
    reduced: SparseMatrix


@dataclass(frozen=True)
class LightReductionResult:
    """light_reduce の結果（R は作らない）"""

    L: SparseMatrix
    pairing: ParetoPairing
    iterations: int


def _ordered(
    A: SparseMatrix,
    row_order: GradedOrder | None,
    col_order: GradedOrder | None,
) -> SparseMatrix:
    if row_order is None and col_order is None:
        return A
    return reorder(A, row_order or A.rows, col_order or A.cols)


def pareto_pairs(
    A: SparseMatrix,
    row_order: GradedOrder | None = None,
    col_order: GradedOrder | None = None,
) -> ParetoPairing:
    """パレート対 {(f, g): f = max supp g, g = min supp f}

    順序を省略すると A 自身の行・列の順序を使う。
    """
    A = _ordered(A, row_order, col_order)
    row_min: dict[CellId, CellId] = {}
    col_max: list[Pair] = []
    for col, column in A.nonzero_columns():
        col_max.append((next(reversed(column)), col))
        for row in column:
            row_min.setdefault(row, col)
    return ParetoPairing((f, g) for f, g in col_max if row_min[f] == g)


def build_factors(
    A: SparseMatrix,
    pairing: ParetoPairing,
    row_order: GradedOrder | None = None,
    col_order: GradedOrder | None = None,
    right: bool = True,
) -> BlockFactors:
    """ブロック因子 L, R

    A = [X Y; Z W]（X = A[S, T]）に対し
    L = [X̃⁻¹ 0; -Z̃X̃⁻¹ I], R = [I -X̃⁻¹Y; 0 I]。X̃ は X の列を対で S に付け替えたもの。

    Args:
        A: 行列
        pairing: A のパレート対
        row_order: 行の順序
        col_order: 列の順序
        right: R も作るか

    Returns:
        BlockFactors
    """
    A = _ordered(A, row_order, col_order)
    field = A.field
    p = field.p
    pi = pairing.row_to_col
    rows_S = [r for r in A.rows if r in pi]
    in_S = set(rows_S)

    # X̃[s', s] = A[s', π(s)] は S の順序で上三角
    tilde = {s: {r: v for r, v in A.column(pi[s]).items() if r in in_S} for s in rows_S}
    X_tilde = SparseMatrix(rows_S, rows_S, tilde, field)
    try:
        X_inv = invert_unitriangular(X_tilde, rows_S)
    except (NotTriangular, SingularDiagonal) as exc:
        raise SingularPivotBlock(f"Pivot block of {len(rows_S)} pairs is not invertible") from exc

    L_data: dict[CellId, Column] = {}
    for s in rows_S:
        v = X_inv.column(s)
        column: Column = dict(v)
        for r, value in combine_columns(A, {pi[k]: c for k, c in v.items()}).items():
            if r not in in_S:
                column[r] = (-value) % p
        L_data[s] = column
    for r in A.rows:
        if r not in in_S:
            L_data[r] = {r: 1}
    L = SparseMatrix(A.rows, A.rows, L_data, field)

    R = None
    if right:
        T = pairing.col_to_row
        R_data: dict[CellId, Column] = {}
        for col in A.cols:
            column = {col: 1}
            if col not in T:
                y = {r: v for r, v in A.column(col).items() if r in in_S}
                for s, value in combine_columns(X_inv, y).items():
                    column[pi[s]] = (-value) % p
            R_data[col] = column
        R = SparseMatrix(A.cols, A.cols, R_data, field)

    return BlockFactors(L, R, X_inv)


def reduce_step(
    A: SparseMatrix,
    row_order: GradedOrder | None = None,
    col_order: GradedOrder | None = None,
) -> StepResult:
    """1 回の簡約 A' = LAR"""
    A = _ordered(A, row_order, col_order)
    pairing = pareto_pairs(A)
    factors = build_factors(A, pairing)
    assert factors.R is not None
    reduced = multiply(multiply(factors.L, A), factors.R)
    return StepResult(reduced, pairing, factors.L, factors.R)


def matrix_reduce(
    A: SparseMatrix,
    row_order: GradedOrder | None = None,
    col_order: GradedOrder | None = None,
) -> ReductionResult:
    """両側簡約 A_{t+1} = L_t A_t R_t を対の数が階数に達するまで繰り返す

    Args:
        A: 行列
        row_order: 行の順序（χ_F を細分）
        col_order: 列の順序（χ_G を細分）

    Returns:
        L_total = L_t⋯L_1, R_total = R_1⋯R_t と最終的な対
    """
    A = _ordered(A, row_order, col_order)
    r = rank(A)
    L_total = SparseMatrix.identity(A.rows, A.field)
    R_total = SparseMatrix.identity(A.cols, A.field)
    current = A
    pairing = pareto_pairs(current)
    iterations = 0
    while r > 0:
        if iterations > r:
            raise NonTermination(f"Matrix reduction exceeded {r + 1} iterations")
        step = reduce_step(current)
        current = step.reduced
        L_total = multiply(step.L, L_total)
        R_total = multiply(R_total, step.R)
        iterations += 1
        previous = len(pairing)
        pairing = pareto_pairs(current)
        logger.debug("Reduction step", iteration=iterations, pairs=len(pairing), rank=r)
        if len(pairing) == r:
            break
        if len(pairing) <= previous:
            raise NonTermination(f"Pairing stalled at {len(pairing)} of rank {r}")
    return ReductionResult(L_total, R_total, pairing, iterations, current)


def light_reduce(
    A: SparseMatrix,
    row_order: GradedOrder | None = None,
    col_order: GradedOrder | None = None,
) -> LightReductionResult:
    """左側だけの簡約 A_{t+1} = L_t A_t

    各段で既存の対の行と列を除いた残差ブロックのパレート対から L を作る。
    残差は両側簡約の A_t の残差と一致するため、対と L_total は matrix_reduce と同じ。
    """
    A = _ordered(A, row_order, col_order)
    L_total = SparseMatrix.identity(A.rows, A.field)
    current = A
    pairs: dict[CellId, CellId] = {}
    taken_cols: set[CellId] = set()
    iterations = 0
    guard = min(A.shape) + 1
    while True:
        residual = submatrix(
            current,
            [r for r in current.rows if r not in pairs],
            [c for c in current.cols if c not in taken_cols],
        )
        new = pareto_pairs(residual)
        if not new:
            break
        iterations += 1
        if iterations > guard:
            raise NonTermination(f"Light reduction exceeded {guard} iterations")
        L = extend_by_identity(build_factors(residual, new, right=False).L, A.rows)
        current = multiply(L, current)
        L_total = multiply(L, L_total)
        for f, g in new:
            pairs[f] = g
            taken_cols.add(g)
    ordered = sorted(pairs.items(), key=lambda fg: A.col_position(fg[1]))
    return LightReductionResult(L_total, ParetoPairing(ordered), iterations)
