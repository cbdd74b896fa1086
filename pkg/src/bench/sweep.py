"""Rips 複体のサイズ計測

乱数点群の Vietoris-Rips 複体（閾値なし）について、見かけの対で上向き・下向きに
対になるセルを数え、生成・保持が必要なセル数と圧縮率を求める。

    |X_n| = |E_n| - (上向きに対になる n 単体)
    |M_n| = |X_n| - (下向きに対になる n 単体)
    CR = (Σ_{n<N} |E_n| + |M_N|) / Σ_{n<=N} |E_n|
"""
from __future__ import annotations

import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import duckdb
import numpy as np
import pandas as pd
import structlog
from joblib import Parallel, delayed
from scipy.special import comb

from src.complex.rips import (
    DistanceMatrix,
    RipsFiltration,
    RipsSkeleton,
    rips_morse_skeleton,
    vietoris_rips,
)
from src.config.settings import get_settings
from src.data.distance import sample_point_cloud
from src.errors import TooLarge
from src.reduction.morse import apparent_pairs
from src.reduction.persist import persistence
from src.utils.logging import configure_logging

logger = structlog.get_logger()


@dataclass
class InstanceSize:
    """1 つの点群での計測値"""

    n_points: int
    seed: int
    full_cells: list[int]
    generated_cells: list[int]
    stored_cells: list[int]
    boundary_ranks: list[int]
    skeleton_cells: int
    peak_nonzeros: int
    seconds: float
    barcodes_match: bool | None = None

    @property
    def compression_ratio(self) -> float:
        top = len(self.full_cells) - 1
        total = sum(self.full_cells)
        return (sum(self.full_cells[:top]) + self.stored_cells[top]) / total if total else 1.0


@dataclass
class SizeReport:
    """点数ごとにシードで平均した計測値"""

    n_points: int
    dim_max: int
    seeds: int
    full_cells: list[float]
    generated_cells: list[float]
    stored_cells: list[float]
    boundary_ranks: list[float]
    skeleton_cells: float
    compression_ratio: float
    peak_nonzeros: float
    seconds: float
    barcodes_match: bool | None = None
    instances: list[InstanceSize] = field(default_factory=list, repr=False)

    def ratios_to_rank(self, n: int) -> dict[str, float]:
        """|E_n|, |X_n|, |M_n| と rank ∂_n の比"""
        r = self.boundary_ranks[n]
        if not r:
            return {"full": float("nan"), "generated": float("nan"), "stored": float("nan")}
        return {
            "full": self.full_cells[n] / r,
            "generated": self.generated_cells[n] / r,
            "stored": self.stored_cells[n] / r,
        }


def _upward_counts(filtration: RipsFiltration, dims: range) -> list[int]:
    return [sum(1 for _ in apparent_pairs(filtration, n)) for n in dims]


def _verify_skeleton(
    d: DistanceMatrix, skeleton: RipsSkeleton, full_cells: int, cap: int
) -> bool:
    """dim_max 未満の次元で、モースありの骨格のバーコードが基準と一致するか

    完全な Rips 複体が cap に収まればそれを基準にし、収まらなければ同じ骨格を
    モースなしで簡約したものを基準にする。
    """
    homology_dim = skeleton.top_dim - 1
    reduced = persistence(skeleton.complex, morse=True, homology_dim=homology_dim)
    if full_cells <= cap:
        reference = vietoris_rips(d, skeleton.top_dim)
    else:
        reference = skeleton.complex
    plain = persistence(reference, homology_dim=homology_dim)
    match = reduced.reported().signature() == plain.reported().signature()
    logger.debug(
        "Skeleton barcode checked",
        points=d.n,
        reference="full" if full_cells <= cap else "skeleton",
        match=match,
    )
    return match


def measure_instance(
    n_points: int,
    ambient_dim: int,
    dim_max: int,
    seed: int,
    verify: bool = False,
) -> InstanceSize:
    """1 つの点群でセル数を数える

    Args:
        n_points: 点数
        ambient_dim: 空間の次元
        dim_max: 最高次元 N
        seed: 乱数シード
        verify: dim_max 未満の次元で省略構成のバーコードを検算するか

    Returns:
        InstanceSize
    """
    settings = get_settings()
    full = [int(comb(n_points, n + 1, exact=True)) for n in range(dim_max + 1)]
    if sum(full) > settings.bench_max_cells:
        raise TooLarge(
            f"{n_points} points up to dimension {dim_max} give {sum(full)} cells, "
            f"limit is {settings.bench_max_cells}"
        )
    ranks = [int(comb(n_points - 1, n, exact=True)) if n else 0 for n in range(dim_max + 1)]

    start = time.perf_counter()
    d = DistanceMatrix.from_points(sample_point_cloud(n_points, ambient_dim, seed))
    filtration = RipsFiltration(d)
    up = _upward_counts(filtration, range(dim_max))
    skeleton = rips_morse_skeleton(d, dim_max, max_cells=settings.bench_max_cells)
    up.append(skeleton.skipped_upward)

    generated = [full[n] - up[n] for n in range(dim_max + 1)]
    stored = [generated[n] - (up[n - 1] if n else 0) for n in range(dim_max)]
    stored.append(skeleton.stored)
    peak = sum(skeleton.complex.boundary(n).nnz for n in range(1, skeleton.top_dim + 1))

    match: bool | None = None
    if verify and dim_max >= 1:
        match = _verify_skeleton(d, skeleton, sum(full), settings.complex_max_cells)
    elapsed = time.perf_counter() - start

    return InstanceSize(
        n_points=n_points,
        seed=seed,
        full_cells=full,
        generated_cells=generated,
        stored_cells=stored,
        boundary_ranks=ranks,
        skeleton_cells=skeleton.complex.total_cells,
        peak_nonzeros=peak,
        seconds=elapsed,
        barcodes_match=match,
    )


def _measure_in_worker(
    log_level: str | None,
    n_points: int,
    ambient_dim: int,
    dim_max: int,
    seed: int,
    verify: bool,
) -> InstanceSize:
    """joblib のワーカー内でロギングを設定してから計測する"""
    if log_level:
        configure_logging(log_level)
    return measure_instance(n_points, ambient_dim, dim_max, seed, verify)


def _average(n_points: int, dim_max: int, items: list[InstanceSize]) -> SizeReport:
    def mean(rows: list[list[int]]) -> list[float]:
        return [float(v) for v in np.mean(np.array(rows, dtype=np.float64), axis=0)]

    checks = [i.barcodes_match for i in items if i.barcodes_match is not None]
    return SizeReport(
        n_points=n_points,
        dim_max=dim_max,
        seeds=len(items),
        full_cells=mean([i.full_cells for i in items]),
        generated_cells=mean([i.generated_cells for i in items]),
        stored_cells=mean([i.stored_cells for i in items]),
        boundary_ranks=mean([i.boundary_ranks for i in items]),
        skeleton_cells=float(np.mean([i.skeleton_cells for i in items])),
        compression_ratio=float(np.mean([i.compression_ratio for i in items])),
        peak_nonzeros=float(np.mean([i.peak_nonzeros for i in items])),
        seconds=float(np.mean([i.seconds for i in items])),
        barcodes_match=all(checks) if checks else None,
        instances=items,
    )


def size_sweep(
    point_counts: Sequence[int],
    ambient_dim: int,
    dim_max: int,
    seeds: Sequence[int],
    verify: bool = False,
    n_jobs: int | None = None,
) -> list[SizeReport]:
    """点数ごとに複数シードで計測し平均する

    Args:
        point_counts: 点数の列
        ambient_dim: 空間の次元
        dim_max: 最高次元 N
        seeds: 乱数シード
        verify: バーコードの一致も確認するか
        n_jobs: joblib の並列数（省略時は設定値）

    Returns:
        点数の順に並んだ SizeReport
    """
    settings = get_settings()
    n_jobs = n_jobs or settings.n_jobs
    log_level = settings.log_level if n_jobs != 1 else None
    jobs = [(n, s) for n in point_counts for s in seeds]
    logger.info("Size sweep started", point_counts=list(point_counts), seeds=len(seeds))
    results = Parallel(n_jobs=n_jobs)(
        delayed(_measure_in_worker)(log_level, n, ambient_dim, dim_max, s, verify)
        for n, s in jobs
    )
    reports = []
    for n in point_counts:
        items = [r for r in results if r.n_points == n]
        reports.append(_average(n, dim_max, items))
        logger.info(
            "Size sweep point count done",
            n_points=n,
            compression_ratio=round(reports[-1].compression_ratio, 4),
        )
    return reports


def to_frame(reports: Sequence[SizeReport]) -> pd.DataFrame:
    """(点数, 次元) ごとの行を持つ表"""
    rows = []
    for report in reports:
        for n in range(report.dim_max + 1):
            rows.append(
                {
                    "n_points": report.n_points,
                    "dim": n,
                    "full_cells": report.full_cells[n],
                    "generated_cells": report.generated_cells[n],
                    "stored_cells": report.stored_cells[n],
                    "boundary_rank": report.boundary_ranks[n],
                    "compression_ratio": report.compression_ratio,
                    "peak_nonzeros": report.peak_nonzeros,
                    "seconds": report.seconds,
                    "seeds": report.seeds,
                }
            )
    return pd.DataFrame(rows)


def store_reports(
    reports: Sequence[SizeReport],
    db_path: Path | None = None,
    table: str | None = None,
) -> int:
    """DuckDB のテーブルに追記する

    Returns:
        追記した行数
    """
    settings = get_settings()
    db_path = Path(db_path or settings.bench_database_path)
    table = table or settings.bench_table
    db_path.parent.mkdir(parents=True, exist_ok=True)

    df = to_frame(reports)
    df["recorded_at"] = pd.Timestamp.now()
    conn = duckdb.connect(str(db_path))
    try:
        conn.register("reports_df", df)
        conn.execute(f"CREATE TABLE IF NOT EXISTS {table} AS SELECT * FROM reports_df WHERE 1 = 0")
        conn.execute(f"INSERT INTO {table} SELECT * FROM reports_df")
        total = conn.execute(f"SELECT COUNT(*) FROM {table}").fetchone()
    finally:
        conn.close()
    logger.info(
        "Bench reports stored", rows=len(df), total=total[0] if total else 0, path=str(db_path)
    )
    return len(df)
