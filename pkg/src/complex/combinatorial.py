"""組合せ論的な負荷試験用複体（チェス盤複体・マッチング複体）

どちらも旗複体で、すべてのセルの次数は 0。
"""
from __future__ import annotations

import itertools
from collections.abc import Callable, Hashable, Sequence
from typing import Any

import networkx as nx
import structlog

from src.algebra.field import PrimeField, make_field
from src.complex.filtered import FilteredComplex
from src.complex.simplicial import Simplex, from_simplices
from src.config.settings import get_settings
from src.errors import TooLarge

logger = structlog.get_logger()


def _flag_complex(graph: nx.Graph, field: PrimeField, cap: int) -> FilteredComplex:
    """グラフのクリーク全体を単体とする次数 0 の複体"""
    grades: dict[Simplex, int] = {}
    for clique in nx.enumerate_all_cliques(graph):
        grades[tuple(sorted(clique))] = 0
        if len(grades) > cap:
            raise TooLarge(f"Flag complex exceeds {cap} cells")
    return from_simplices(grades, field, (0.0,))


def _compatibility_graph(
    vertices: Sequence[Hashable], compatible: Callable[[Any, Any], bool]
) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(len(vertices)))
    for i, j in itertools.combinations(range(len(vertices)), 2):
        if compatible(vertices[i], vertices[j]):
            graph.add_edge(i, j)
    return graph


def chessboard_complex(m: int, n: int, field: PrimeField | None = None) -> FilteredComplex:
    """m×n 盤上の互いに利かないルーク配置の複体

    頂点 (i, j) の番号は i * n + j。
    """
    settings = get_settings()
    squares = [(i, j) for i in range(m) for j in range(n)]
    graph = _compatibility_graph(squares, lambda a, b: a[0] != b[0] and a[1] != b[1])
    complex_ = _flag_complex(
        graph, field or make_field(settings.default_prime), settings.complex_max_cells
    )
    logger.info("Chessboard complex built", rows=m, cols=n, cells=complex_.cell_counts())
    return complex_


def matching_complex(k: int, arity: int = 2, field: PrimeField | None = None) -> FilteredComplex:
    """k 点上の arity 元部分集合のうち互いに素なものの族からなる複体

    arity = 2 なら完全グラフ K_k のマッチング複体。頂点は部分集合の辞書式順の番号。
    """
    settings = get_settings()
    blocks = [frozenset(c) for c in itertools.combinations(range(k), arity)]
    graph = _compatibility_graph(blocks, lambda a, b: not (a & b))
    complex_ = _flag_complex(
        graph, field or make_field(settings.default_prime), settings.complex_max_cells
    )
    logger.info("Matching complex built", size=k, arity=arity, cells=complex_.cell_counts())
    return complex_
