"""単体複体の組み立て

単体は頂点番号の昇順タプルで表す。同じ次数の中では辞書式順に並べる。
"""
from __future__ import annotations

from collections import defaultdict
from collections.abc import Mapping, Sequence

from src.algebra.field import PrimeField
from src.algebra.spmat import GradedOrder, SparseMatrix
from src.complex.filtered import FilteredComplex
from src.errors import InvalidCell, UnknownId

Simplex = tuple[int, ...]


def facets(simplex: Simplex) -> list[tuple[Simplex, int]]:
    """面と符号の指数 i（i 番目の頂点を除いた面）"""
    return [(simplex[:i] + simplex[i + 1 :], i) for i in range(len(simplex))]


def from_simplices(
    grades: Mapping[Simplex, int],
    field: PrimeField,
    level_values: Sequence[float] | None = None,
    check_chain: bool = False,
) -> FilteredComplex:
    """単体 -> 次数の対応から複体を作る

    境界係数は (-1)^i の体での像。面が欠けていれば UnknownId。

    Args:
        grades: 面で閉じた単体集合とその次数
        field: 係数体
        level_values: 次数 -> 実数値の表
        check_chain: ∂∂ = 0 を検証するか（組み立て上は常に成り立つ）

    Returns:
        FilteredComplex
    """
    by_dim: dict[int, dict[Simplex, int]] = defaultdict(dict)
    for simplex, grade in grades.items():
        if not simplex or list(simplex) != sorted(set(simplex)):
            raise InvalidCell(f"Simplex {simplex!r} must be a strictly increasing vertex tuple")
        by_dim[len(simplex) - 1][simplex] = grade

    top = max(by_dim, default=-1)
    orders = [GradedOrder.from_grades(by_dim.get(n, {}), key=lambda s: s) for n in range(top + 1)]

    boundaries: dict[int, SparseMatrix] = {}
    for n in range(1, top + 1):
        lower = by_dim.get(n - 1, {})
        data: dict[Simplex, dict[Simplex, int]] = {}
        for simplex in by_dim.get(n, {}):
            column: dict[Simplex, int] = {}
            for face, i in facets(simplex):
                if face not in lower:
                    raise UnknownId(f"Face {face!r} of {simplex!r} is missing")
                column[face] = field.sign(i)
            data[simplex] = column
        boundaries[n] = SparseMatrix(orders[n - 1].elements, orders[n].elements, data, field)

    return FilteredComplex(orders, boundaries, field, level_values, check_chain)
