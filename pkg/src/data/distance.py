"""距離行列・点群の入力

下三角形式: i 行目（0 始まり）に d(i+1, 0), …, d(i+1, i) をカンマ区切りで並べる。
行が 0 なら 1 点。
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np
import numpy.typing as npt
import structlog

from src.complex.rips import DistanceMatrix
from src.errors import InvalidDistanceMatrix, NegativeDistance, RaggedInput

logger = structlog.get_logger()

_SEPARATOR = re.compile(r"[,\s]+")


def _parse_row(line: str, lineno: int) -> list[float]:
    try:
        return [float(tok) for tok in _SEPARATOR.split(line.strip()) if tok]
    except ValueError as exc:
        raise InvalidDistanceMatrix(f"Line {lineno}: {exc}") from exc


def parse_lower_distance(text: str) -> DistanceMatrix:
    """下三角形式の距離行列を読む

    Args:
        text: 入力テキスト（空行は無視）

    Returns:
        対称・対角 0 の DistanceMatrix
    """
    rows = [line for line in text.splitlines() if line.strip()]
    n = len(rows) + 1
    d = np.zeros((n, n), dtype=np.float64)
    for i, line in enumerate(rows, start=1):
        values = _parse_row(line, i)
        if len(values) != i:
            raise RaggedInput(f"Line {i} has {len(values)} entries, expected {i}")
        if any(v < 0 for v in values):
            raise NegativeDistance(f"Line {i} contains a negative distance")
        d[i, :i] = values
        d[:i, i] = values
    logger.debug("Lower distance matrix parsed", points=n)
    return DistanceMatrix(d)


def parse_point_cloud(text: str) -> DistanceMatrix:
    """1 行 1 点の座標（空白またはカンマ区切り）からユークリッド距離行列を作る"""
    points = [_parse_row(line, i) for i, line in enumerate(text.splitlines(), 1) if line.strip()]
    if not points:
        raise InvalidDistanceMatrix("Point cloud is empty")
    widths = {len(p) for p in points}
    if len(widths) != 1:
        raise RaggedInput(f"Points have differing dimensions {sorted(widths)}")
    return DistanceMatrix.from_points(np.array(points, dtype=np.float64))


def sample_point_cloud(n: int, ambient_dim: int, seed: int) -> npt.NDArray[np.float64]:
    """単位立方体 [0, 1]^ambient_dim 上の一様乱数点"""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, size=(n, ambient_dim))


def load_distance_matrix(path: Path, input_format: str) -> DistanceMatrix:
    """ファイルから距離行列を読む（lower-distance / point-cloud）"""
    text = Path(path).read_text(encoding="utf-8")
    if input_format == "lower-distance":
        return parse_lower_distance(text)
    if input_format == "point-cloud":
        return parse_point_cloud(text)
    raise InvalidDistanceMatrix(f"Unsupported distance input format {input_format!r}")
