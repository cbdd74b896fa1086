"""設定管理"""
from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """アプリケーション設定"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # 係数体（GF(p)）
    default_prime: int = 2

    # サイズ上限
    oracle_max_cells: int = 5000
    complex_max_cells: int = 200_000
    bench_max_cells: int = 2_000_000

    # 検証フラグ（テスト・デバッグ用）
    verify_matchings: bool = True
    verify_conjugation: bool = False

    # 並列実行（joblib）
    n_jobs: int = 1

    # ベンチマーク履歴
    bench_database_path: Path = Path("data/database/bench.duckdb")
    bench_table: str = "size_reports"

    # ロギング
    log_level: str = "INFO"

    # 机上スケールのベンチマーク設定
    @property
    def desk_bench_preset(self) -> dict[str, Any]:
        return {
            "point_counts": [20, 30, 40],
            "ambient_dim": 20,
            "dim_max": 4,
            "seeds": list(range(10)),
        }

    # 大規模なストレス設定（CIでは実行しない）
    @property
    def stress_presets(self) -> dict[str, dict[str, Any]]:
        return {
            "rips_240": {"point_counts": [240], "ambient_dim": 20, "dim_max": 4},
            "rg1e4": {"point_counts": [10_000], "ambient_dim": 20, "dim_max": 2},
            "chessboard_8_8": {"rows": 8, "cols": 8},
            "matching_3_13": {"size": 13, "arity": 3},
        }


@lru_cache
def get_settings() -> Settings:
    """設定のシングルトンインスタンスを取得"""
    return Settings()
