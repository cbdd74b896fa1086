"""鎖複体の簡約とパーシステンス

各次元の境界行列 A_n に対して残差ブロックのパレート対から L_n を作り、
A_n <- L_n A_n, A_{n-1} <- A_{n-1} L_n^{-1} と共役変換する。
どの次元でも新しい対が見つからなくなるまで、次元の降順に掃引を繰り返す。
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import structlog

from src.algebra.spmat import (
    CellId,
    Column,
    GradedOrder,
    SparseMatrix,
    extend_by_identity,
    multiply,
    rank,
    row_reduce_mod_p,
    submatrix,
    with_columns_zeroed,
)
from src.complex.filtered import FilteredComplex
from src.config.settings import get_settings
from src.errors import (
    DimensionMismatch,
    NonTermination,
    NotAChainComplex,
    NotAMatching,
    TransformsNotAccumulated,
)
from src.matroid.linear import Filtration, LinearMatroid
from src.reduction.barcode import Barcode, Interval
from src.reduction.morse import Matching, greedy_matching, linearize, seed_check
from src.reduction.oracle import column_basis_mod_p, nullspace_mod_p
from src.reduction.pareto import ParetoPairing, build_factors, pareto_pairs

logger = structlog.get_logger()


@dataclass
class ChainReduction:
    """簡約後の状態

    pairings[n] は A_n（行 E_{n-1}, 列 E_n）のパレート対。
    witnesses[s] は対 (s, t) について ∂w = （s の位置の新しい基底）となる鎖 w。
    """

    complex: FilteredComplex
    pairings: dict[int, ParetoPairing]
    reduced: dict[int, SparseMatrix]
    witnesses: dict[CellId, Column] | None
    sweeps: int
    max_dim: int

    @property
    def accumulated(self) -> bool:
        return self.witnesses is not None

    def pairing(self, n: int) -> ParetoPairing:
        return self.pairings.get(n, ParetoPairing())


def _verify(cur: Mapping[int, SparseMatrix], ranks: Mapping[int, int]) -> None:
    for n, A in cur.items():
        if n + 1 in cur and not multiply(A, cur[n + 1]).is_zero():
            raise NotAChainComplex(f"A_{n} · A_{n + 1} != 0 after conjugation")
        if rank(A) != ranks[n]:
            raise NotAChainComplex(f"Rank of A_{n} changed from {ranks[n]} to {rank(A)}")


def chain_reduce(
    K: FilteredComplex,
    orders: Mapping[int, GradedOrder] | None = None,
    accumulate: bool = False,
    homology_dim: int | None = None,
    matching: Matching | None = None,
    verify: bool | None = None,
) -> ChainReduction:
    """すべての次元のパレート対が安定するまで簡約する

    Args:
        K: 複体
        orders: 次元ごとの次数細分順序（省略時は K の順序）
        accumulate: 代表元を出すための証拠鎖を保持するか
        homology_dim: 指定すると A_1..A_{h+1} だけを簡約する
        matching: 順序の種として使ったマッチング（対が上向きの最高次元列は落とす）
        verify: 掃引ごとに ∂∂ = 0 と階数を確認するか（省略時は設定値）

    Returns:
        ChainReduction
    """
    settings = get_settings()
    verify = settings.verify_conjugation if verify is None else verify
    if homology_dim is not None and homology_dim < 0:
        raise DimensionMismatch(f"homology_dim must be non-negative, got {homology_dim}")
    if matching is not None:
        matching.validate(K)
        if settings.verify_matchings and not seed_check(matching, K, orders):
            raise NotAMatching("Matching is not contained in the Pareto pairs of the given order")
    K = K.reordered(orders) if orders else K
    p = K.field.p

    top = K.top_dim
    max_dim = top if homology_dim is None else min(homology_dim, top)
    last = top if homology_dim is None else min(homology_dim + 1, top)

    cur: dict[int, SparseMatrix] = {n: K.boundary(n) for n in range(1, last + 1)}
    zeroed: dict[int, set[CellId]] = {n: set() for n in cur}
    if matching is not None and last < top:
        dropped = {s for s, t in matching.pairs if K.dim(t) == last + 1}
        if dropped:
            zeroed[last].update(dropped)
            cur[last] = with_columns_zeroed(cur[last], dropped)
            logger.debug("Top columns dropped", dim=last, dropped=len(dropped))

    paired: dict[int, dict[CellId, CellId]] = {n: {} for n in cur}
    witnesses: dict[CellId, Column] | None = {} if accumulate else None
    ranks = {n: rank(A) for n, A in cur.items()} if verify else {}

    guard = K.total_cells + 1
    sweeps = 0
    while True:
        sweeps += 1
        if sweeps > guard:
            raise NonTermination(f"Chain reduction exceeded {guard} sweeps")
        added = 0
        for n in range(last, 0, -1):
            A = cur[n]
            rows_paired = paired[n]
            taken = set(rows_paired.values()) | zeroed[n]
            residual = submatrix(
                A,
                [r for r in A.rows if r not in rows_paired],
                [c for c in A.cols if c not in taken],
            )
            new = pareto_pairs(residual)
            if not new:
                continue
            if witnesses is not None:
                for s, t in new:
                    w: Column = {t: 1}
                    for old, coeff in A.column(t).items():
                        if old in rows_paired:
                            for cell, value in witnesses[old].items():
                                w[cell] = (w.get(cell, 0) - coeff * value) % p
                    witnesses[s] = {cell: v for cell, v in w.items() if v}
            L = extend_by_identity(build_factors(residual, new, right=False).L, A.rows)
            cur[n] = multiply(L, A)
            rows_paired.update(new.row_to_col)
            if n > 1:
                zeroed[n - 1].update(new.S)
                cur[n - 1] = with_columns_zeroed(cur[n - 1], new.S)
            added += len(new)
        if verify:
            _verify(cur, ranks)
        logger.debug("Chain reduction sweep", sweep=sweeps, added=added)
        if not added:
            break

    pairings = {
        n: ParetoPairing(sorted(pairs.items(), key=lambda st: K.order(n).position(st[1])))
        for n, pairs in paired.items()
    }
    logger.info(
        "Chain reduction finished",
        sweeps=sweeps,
        pairs={n: len(P) for n, P in pairings.items()},
        cells=K.cell_counts(),
    )
    return ChainReduction(K, pairings, cur, witnesses, sweeps, max_dim)


def barcode(state: ChainReduction) -> Barcode:
    """対 (s, t) ∈ P(A_{n+1}) から [χ(s), χ(t))、対にならないセルから [χ(e), ∞)"""
    K = state.complex
    intervals: list[Interval] = []
    for n in range(state.max_dim + 1):
        up = state.pairing(n + 1)
        for s, t in up:
            gs, gt = K.grade(s), K.grade(t)
            intervals.append(Interval(n, gs, gt, K.grade_value(gs), K.grade_value(gt), s, t))
        deaths = state.pairing(n).T
        births = up.S
        for e in K.order(n):
            if e not in deaths and e not in births:
                ge = K.grade(e)
                intervals.append(Interval(n, ge, None, K.grade_value(ge), math.inf, e))
    return Barcode(intervals)


def _ordered_chain(K: FilteredComplex, n: int, chain: Mapping[CellId, int]) -> dict[CellId, int]:
    order = K.order(n)
    return {e: chain[e] for e in sorted(chain, key=order.position) if chain[e]}


def generators(state: ChainReduction) -> Barcode:
    """代表サイクル付きのバーコード

    有限区間の代表元は z = ∂w（w は証拠鎖）、無限区間は
    z = e - Σ_{s ∈ S_n} A_n[s, e] w_s。
    """
    if state.witnesses is None:
        raise TransformsNotAccumulated("chain_reduce was run without accumulate=True")
    K = state.complex
    p = K.field.p
    witnesses = state.witnesses
    result: list[Interval] = []
    for interval in barcode(state):
        n = interval.dim
        if interval.death_cell is not None:
            w = witnesses[interval.birth_cell]
            z = K.apply_boundary(n + 1, w)
            result.append(
                interval.with_chains(_ordered_chain(K, n, z), _ordered_chain(K, n + 1, w))
            )
            continue
        e = interval.birth_cell
        z = {e: 1}
        if n >= 1:
            rows_paired = state.pairing(n).row_to_col
            for s, coeff in state.reduced[n].column(e).items():
                if s in rows_paired:
                    for cell, value in witnesses[s].items():
                        z[cell] = (z.get(cell, 0) - coeff * value) % p
        result.append(interval.with_chains(_ordered_chain(K, n, z)))
    return Barcode(result)


def persistence(
    K: FilteredComplex,
    morse: bool = False,
    with_generators: bool = False,
    homology_dim: int | None = None,
) -> Barcode:
    """簡約からバーコード（必要なら代表元も）まで

    morse が真ならコリダクションのマッチングで順序を決めてから簡約する。
    """
    if morse:
        V = greedy_matching(K)
        orders = linearize(V, K)
        state = chain_reduce(
            K, orders, accumulate=with_generators, homology_dim=homology_dim, matching=V
        )
    else:
        state = chain_reduce(K, accumulate=with_generators, homology_dim=homology_dim)
    return generators(state) if with_generators else barcode(state)


def betti_numbers(K: FilteredComplex, n_max: int) -> list[int]:
    """最終段のベッチ数 b_0..b_{n_max}"""
    homology_dim = None if n_max >= K.top_dim else n_max
    return barcode(chain_reduce(K, homology_dim=homology_dim)).betti(n_max)


@dataclass(frozen=True)
class KernelImageFiltrations:
    """n 次サイクル空間上の核・像フィルトレーション

    台集合は ker ∂_n(C_i) ∩ im ∂_{n+1}(C_j) の基底を集めたベクトル。
    """

    matroid: LinearMatroid
    F: Filtration
    G: Filtration
    dim: int


def _matmul_mod(
    U: npt.NDArray[np.int64], N: npt.NDArray[np.int64], p: int
) -> npt.NDArray[np.int64]:
    return ((U.astype(object) @ N.astype(object)) % p).astype(np.int64)


def _rank_mod(M: npt.NDArray[np.int64], p: int) -> int:
    if M.size == 0:
        return 0
    return len(row_reduce_mod_p(M, p)[1])


def kernel_image_filtrations(K: FilteredComplex, n: int) -> KernelImageFiltrations:
    """F_i = ker ∂_n(C_i), G_j = im ∂_{n+1}(C_j)（G_{L+1} = ker ∂_n(C_L)）

    Args:
        K: 複体
        n: 次元

    Returns:
        KernelImageFiltrations（モジュラーな対になる）
    """
    p = K.field.p
    cells = K.order(n)
    m = len(cells)
    top_grade = K.max_grade
    grades_n = np.array([cells.grade[e] for e in cells], dtype=np.int64)
    upper = K.order(n + 1)
    grades_up = np.array([upper.grade[e] for e in upper], dtype=np.int64)
    D_n = K.boundary(n).to_dense()
    D_up = K.boundary(n + 1).to_dense()

    kernels: list[npt.NDArray[np.int64]] = []
    for i in range(top_grade + 1):
        mask = grades_n <= i
        basis = np.zeros((m, 0), dtype=np.int64)
        if mask.any():
            null = nullspace_mod_p(D_n[:, mask], p)
            basis = np.zeros((m, null.shape[1]), dtype=np.int64)
            basis[mask] = null
        kernels.append(basis)
    images = [column_basis_mod_p(D_up[:, grades_up <= j], p) for j in range(top_grade + 1)]
    images.append(kernels[top_grade])
    image_ranks = [_rank_mod(W, p) for W in images]

    vectors: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    for U in kernels:
        for W in images:
            if U.shape[1] == 0 or W.shape[1] == 0:
                continue
            null = nullspace_mod_p(np.hstack([U, (-W) % p]), p)
            meet = _matmul_mod(U, null[: U.shape[1]], p)
            for v in column_basis_mod_p(meet, p).T:
                pivot = int(v[np.nonzero(v)[0][0]])
                key = tuple(int(x) for x in (v * pow(pivot, -1, p)) % p)
                if key not in seen:
                    seen.add(key)
                    vectors.append(key)

    chi_f: dict[int, int] = {}
    chi_g: dict[int, int] = {}
    for k, v in enumerate(vectors):
        arr = np.array(v, dtype=np.int64)
        chi_f[k] = int(grades_n[arr != 0].max())
        chi_g[k] = next(
            j
            for j, W in enumerate(images)
            if _rank_mod(np.column_stack([W, arr]), p) == image_ranks[j]
        )
    matroid = LinearMatroid(list(range(len(vectors))), dict(enumerate(vectors)), K.field)
    logger.debug("Kernel/image filtrations built", dim=n, elements=len(vectors))
    return KernelImageFiltrations(matroid, Filtration(chi_f), Filtration(chi_g), n)
