"""検証用の標準列簡約と密な消去

パレート対による簡約とは独立に、全セルを (次数, 次元, 位置) で一列に並べた
境界行列を左から右へ列簡約してバーコードを求める。
"""
from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt
import structlog

from src.algebra.spmat import CellId, row_reduce_mod_p
from src.complex.filtered import FilteredComplex
from src.config.settings import get_settings
from src.errors import TooLargeForOracle
from src.reduction.barcode import Barcode, Interval

logger = structlog.get_logger()


def nullspace_mod_p(matrix: npt.ArrayLike, p: int) -> npt.NDArray[np.int64]:
    """零空間の基底（列ベクトル）"""
    M = np.atleast_2d(np.asarray(matrix, dtype=np.int64))
    n_cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n_cols, dtype=np.int64)
    R, pivots = row_reduce_mod_p(M, p)
    free = [j for j in range(n_cols) if j not in set(pivots)]
    basis = np.zeros((n_cols, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for i, pc in enumerate(pivots):
            basis[pc, k] = (-R[i, f]) % p
    return basis


def column_basis_mod_p(matrix: npt.ArrayLike, p: int) -> npt.NDArray[np.int64]:
    """列空間の基底（元の列から選ぶ）"""
    M = np.atleast_2d(np.asarray(matrix, dtype=np.int64)) % p
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=np.int64)
    _, pivots = row_reduce_mod_p(M, p)
    return M[:, pivots]


def standard_reduction_oracle(K: FilteredComplex) -> Barcode:
    """教科書的な列簡約によるバーコード

    Args:
        K: 複体（セル総数は設定の上限以下）

    Returns:
        長さ 0 の区間を含む生のバーコード
    """
    settings = get_settings()
    if K.total_cells > settings.oracle_max_cells:
        raise TooLargeForOracle(
            f"Complex has {K.total_cells} cells, oracle limit is {settings.oracle_max_cells}"
        )
    field = K.field
    p = field.p

    cells = sorted(
        K.iter_cells(), key=lambda c: (c.grade, c.dim, K.order(c.dim).position(c.id))
    )
    index: dict[CellId, int] = {c.id: i for i, c in enumerate(cells)}

    reduced: dict[int, dict[int, int]] = {}
    pivot_of: dict[int, int] = {}
    for j, cell in enumerate(cells):
        column = {index[face]: coeff for face, coeff in K.faces(cell.id).items()}
        while column:
            low = max(column)
            k = pivot_of.get(low)
            if k is None:
                pivot_of[low] = j
                break
            other = reduced[k]
            factor = (column[low] * field.inv(other[low])) % p
            for row, coeff in other.items():
                value = (column.get(row, 0) - factor * coeff) % p
                if value:
                    column[row] = value
                else:
                    column.pop(row, None)
        reduced[j] = column

    intervals: list[Interval] = []
    deaths = set(pivot_of)
    for low, j in pivot_of.items():
        birth, death = cells[low], cells[j]
        intervals.append(
            Interval(
                birth.dim,
                birth.grade,
                death.grade,
                K.grade_value(birth.grade),
                K.grade_value(death.grade),
                birth.id,
                death.id,
            )
        )
    for j, cell in enumerate(cells):
        if not reduced[j] and j not in deaths:
            intervals.append(
                Interval(cell.dim, cell.grade, None, K.grade_value(cell.grade), math.inf, cell.id)
            )
    logger.debug("Oracle reduction finished", cells=len(cells), pairs=len(pivot_of))
    return Barcode(intervals)
