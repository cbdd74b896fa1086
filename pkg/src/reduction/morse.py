"""非巡回マッチング（離散モース理論）

マッチング V の各対 (s, t) は dim t = dim s + 1 かつ A[s, t] != 0 を満たす。
次数の等しい対だけからなる非巡回マッチングは、適切な順序のもとで
境界行列のパレート対に含まれる（簡約の種として使える）。
"""
from __future__ import annotations

from collections import deque
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

import networkx as nx
import structlog

from src.algebra.spmat import CellId, GradedOrder
from src.complex.filtered import FilteredComplex
from src.complex.rips import RipsFiltration
from src.complex.simplicial import Simplex
from src.errors import CyclicMatching, NotAMatching, UnknownId
from src.reduction.pareto import pareto_pairs

logger = structlog.get_logger()


@dataclass(frozen=True)
class Matching:
    """面 s と余面 t の対の集合"""

    pairs: tuple[tuple[CellId, CellId], ...] = ()
    up: dict[CellId, CellId] = field(init=False, repr=False, compare=False)
    down: dict[CellId, CellId] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))
        up: dict[CellId, CellId] = {}
        down: dict[CellId, CellId] = {}
        for s, t in self.pairs:
            if s in up or s in down or t in up or t in down or s == t:
                raise NotAMatching(f"Cell in pair ({s!r}, {t!r}) is matched twice")
            up[s] = t
            down[t] = s
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[CellId, CellId]]:
        return iter(self.pairs)

    def __contains__(self, pair: object) -> bool:
        if not isinstance(pair, tuple) or len(pair) != 2:
            return False
        return self.up.get(pair[0]) == pair[1] and pair[0] in self.up

    def is_matched(self, e: CellId) -> bool:
        return e in self.up or e in self.down

    def validate(self, K: FilteredComplex) -> None:
        """次元と接続係数を確認"""
        for s, t in self.pairs:
            try:
                ds, dt = K.dim(s), K.dim(t)
            except UnknownId as exc:
                raise NotAMatching(f"Pair ({s!r}, {t!r}) refers to an unknown cell") from exc
            if dt != ds + 1:
                raise NotAMatching(f"Pair ({s!r}, {t!r}) has dimensions {ds} and {dt}")
            if not K.faces(t).get(s):
                raise NotAMatching(f"{s!r} is not a face of {t!r}")


def flip_relation(V: Matching, K: FilteredComplex) -> nx.DiGraph:
    """接続関係のうち V 以外は面 -> 余面、V の対は余面 -> 面の向きにした有向グラフ"""
    V.validate(K)
    graph = nx.DiGraph()
    graph.add_nodes_from(cell.id for cell in K.iter_cells())
    for n in range(1, K.top_dim + 1):
        for t, column in K.boundary(n).nonzero_columns():
            for s in column:
                if V.up.get(s) == t:
                    graph.add_edge(t, s)
                else:
                    graph.add_edge(s, t)
    return graph


def _pair_graph(V: Matching, K: FilteredComplex) -> nx.DiGraph:
    """V パスのグラフ: (s, t) -> (s', t')（s' は t の s 以外の面で、上向きに対になっている）"""
    graph = nx.DiGraph()
    graph.add_nodes_from(V.pairs)
    for s, t in V.pairs:
        for face in K.faces(t):
            if face != s and face in V.up:
                graph.add_edge((s, t), (face, V.up[face]))
    return graph


def is_acyclic(V: Matching, K: FilteredComplex) -> bool:
    """反転関係 R_V に有向閉路がないか"""
    V.validate(K)
    return nx.is_directed_acyclic_graph(_pair_graph(V, K))


def is_filtration_acyclic(V: Matching, K: FilteredComplex) -> bool:
    """非巡回で、かつすべての対の次数が等しいか"""
    if not is_acyclic(V, K):
        return False
    return all(K.grade(s) == K.grade(t) for s, t in V.pairs)


def critical_cells(V: Matching, K: FilteredComplex) -> list[CellId]:
    return [cell.id for cell in K.iter_cells() if not V.is_matched(cell.id)]


def linearize(V: Matching, K: FilteredComplex) -> dict[int, GradedOrder]:
    """V の対がパレート対になる次数細分順序を次元ごとに作る

    対 (s, t) について、t の同次数の他の面を s より前に、s の同次数の他の余面を
    t より後に置く。制約のない部分は (次数, 既定の位置) の順。

    Args:
        V: 次数の等しい対からなるマッチング
        K: 複体

    Returns:
        次元 -> 順序
    """
    V.validate(K)
    for s, t in V.pairs:
        if K.grade(s) != K.grade(t):
            raise NotAMatching(f"Pair ({s!r}, {t!r}) crosses grades")

    graphs = [nx.DiGraph() for _ in range(K.top_dim + 1)]
    for n, graph in enumerate(graphs):
        graph.add_nodes_from(K.order(n))
    for s, t in V.pairs:
        grade = K.grade(s)
        before = graphs[K.dim(s)]
        for face in K.faces(t):
            if face != s and K.grade(face) == grade:
                before.add_edge(face, s)
        after = graphs[K.dim(t)]
        for coface in K.cofaces(s):
            if coface != t and K.grade(coface) == grade:
                after.add_edge(t, coface)

    orders: dict[int, GradedOrder] = {}
    for n, graph in enumerate(graphs):
        current = K.order(n)
        positions = current.positions
        try:
            elements = list(
                nx.lexicographical_topological_sort(
                    graph, key=lambda e, pos=positions, grade=current.grade: (grade[e], pos[e])
                )
            )
        except nx.NetworkXUnfeasible as exc:
            raise CyclicMatching(f"Matching constraints in dimension {n} contain a cycle") from exc
        orders[n] = GradedOrder(elements, current.grade)
    return orders


def seed_check(
    V: Matching,
    K: FilteredComplex,
    orders: Mapping[int, GradedOrder] | None = None,
) -> bool:
    """V のすべての対が並べ替えた境界行列のパレート対に含まれるか"""
    reordered = K.reordered(orders) if orders else K
    by_dim: dict[int, list[tuple[CellId, CellId]]] = {}
    for s, t in V.pairs:
        by_dim.setdefault(K.dim(t), []).append((s, t))
    for n, pairs in by_dim.items():
        found = pareto_pairs(reordered.boundary(n))
        if any(pair not in found for pair in pairs):
            return False
    return True


def greedy_matching(K: FilteredComplex) -> Matching:
    """次数ごとのコリダクションによるマッチング

    残っている同次数の面がちょうど 1 つのセルをその面と対にする。
    該当がなければ (次元, 位置) が最小の残りセルを臨界セルとして除く。
    """
    by_grade: dict[int, list[CellId]] = {}
    for cell in K.iter_cells():
        by_grade.setdefault(cell.grade, []).append(cell.id)

    pairs: list[tuple[CellId, CellId]] = []
    critical = 0
    for grade in sorted(by_grade):
        cells = by_grade[grade]
        remaining = set(cells)
        count = {
            e: sum(1 for face in K.faces(e) if K.grade(face) == grade) for e in cells
        }
        queue: deque[CellId] = deque(e for e in cells if count[e] == 1)

        def remove(e: CellId) -> None:
            remaining.discard(e)
            for coface in K.cofaces(e):
                if coface in remaining:
                    count[coface] -= 1
                    if count[coface] == 1:
                        queue.append(coface)

        cursor = 0
        while remaining:
            while queue:
                t = queue.popleft()
                if t not in remaining or count[t] != 1:
                    continue
                s = next(face for face in K.faces(t) if face in remaining)
                pairs.append((s, t))
                remove(s)
                remove(t)
            if not remaining:
                break
            while cells[cursor] not in remaining:
                cursor += 1
            critical += 1
            remove(cells[cursor])

    logger.debug("Greedy matching built", pairs=len(pairs), critical=critical)
    return Matching(tuple(pairs))


def apparent_pairs(filtration: RipsFiltration, dim: int) -> Iterator[tuple[Simplex, Simplex]]:
    """dim 次元単体とその見かけの余面の対を列挙する（境界行列は作らない）"""
    for simplex in filtration.iter_simplices(dim):
        cofacet = filtration.apparent_cofacet(simplex)
        if cofacet is not None:
            yield simplex, cofacet
