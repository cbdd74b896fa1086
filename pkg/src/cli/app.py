"""コマンドライン: バーコード・代表元・検証・オラクル比較・ベンチマーク

標準出力にはレポートだけを書き、ログとエラーは標準エラーに出す。
"""
from __future__ import annotations

import argparse
import math
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Literal, TextIO

import structlog
from joblib import Parallel, delayed
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.algebra.field import make_field
from src.bench.sweep import size_sweep, store_reports, to_frame
from src.complex.filtered import FilteredComplex
from src.complex.rips import DistanceMatrix, rips_morse_skeleton, vietoris_rips
from src.config.settings import get_settings
from src.data.complex_spec import dump_complex_spec, load_complex_spec
from src.data.distance import load_distance_matrix, sample_point_cloud
from src.data.report import render
from src.errors import PersistenceError
from src.reduction.morse import greedy_matching, is_filtration_acyclic, linearize, seed_check
from src.reduction.oracle import standard_reduction_oracle
from src.reduction.persist import persistence
from src.utils.logging import configure_logging

logger = structlog.get_logger()

Command = Literal["barcode", "generators", "validate", "oracle-check", "bench"]
InputFormat = Literal["lower-distance", "point-cloud", "complex-spec"]
OutputFormat = Literal["tsv", "structured-text"]

EXIT_OK = 0
EXIT_ORACLE_MISMATCH = 1
EXIT_USAGE = 2


class RunConfig(BaseModel):
    """1 回の実行設定"""

    command: Command
    input: Path | None = None
    input_format: InputFormat = "lower-distance"
    dim_max: int = 2
    threshold: float = math.inf
    field: int = Field(default_factory=lambda: get_settings().default_prime)
    morse: bool = False
    generators: bool = False
    output_format: OutputFormat = "tsv"
    seed: int = 0
    points: int = 20
    ambient_dim: int = 3
    seeds: int = 20
    point_counts: list[int] = Field(default_factory=lambda: [20, 30, 40])
    store: bool = False
    dump: bool = False

    @field_validator("dim_max")
    @classmethod
    def _dim_max_non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"dim_max must be >= 0, got {v}")
        return v

    @field_validator("threshold")
    @classmethod
    def _threshold_non_negative(cls, v: float) -> float:
        if math.isnan(v) or v < 0:
            raise ValueError(f"threshold must be >= 0 or inf, got {v}")
        return v

    @field_validator("field")
    @classmethod
    def _field_prime(cls, v: int) -> int:
        make_field(v)
        return v

    @field_validator("points", "seeds")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"must be >= 1, got {v}")
        return v

    @property
    def is_rips(self) -> bool:
        return self.input_format != "complex-spec"

    @property
    def homology_dim(self) -> int | None:
        """Rips 入力では dim_max 未満の次元だけを報告する"""
        return max(self.dim_max - 1, 0) if self.is_rips else None


def _distance_matrix(config: RunConfig, seed: int | None = None) -> DistanceMatrix:
    if config.input is not None:
        return load_distance_matrix(config.input, config.input_format)
    seed = config.seed if seed is None else seed
    return DistanceMatrix.from_points(sample_point_cloud(config.points, config.ambient_dim, seed))


def _build_complex(
    config: RunConfig, seed: int | None = None, full: bool = False
) -> FilteredComplex:
    """入力から複体を作る（Rips で morse が有効なら最高次元を省いた骨格）"""
    if not config.is_rips:
        if config.input is None:
            raise PersistenceError("complex-spec input requires a path")
        return load_complex_spec(config.input)
    d = _distance_matrix(config, seed)
    field = make_field(config.field)
    if config.morse and not full:
        return rips_morse_skeleton(d, config.dim_max, config.threshold, field).complex
    return vietoris_rips(d, config.dim_max, config.threshold, field)


def _cmd_barcode(config: RunConfig, stdout: TextIO) -> int:
    with_generators = config.generators or config.command == "generators"
    K = _build_complex(config)
    result = persistence(
        K, morse=config.morse, with_generators=with_generators, homology_dim=config.homology_dim
    )
    stdout.write(render(result.reported(), config.output_format, with_generators))
    return EXIT_OK


def _cmd_validate(config: RunConfig, stdout: TextIO) -> int:
    K = _build_complex(config)
    if config.dump:
        stdout.write(dump_complex_spec(K))
        return EXIT_OK
    V = greedy_matching(K)
    acyclic = is_filtration_acyclic(V, K)
    seeded = acyclic and seed_check(V, K, linearize(V, K))
    stdout.write(f"field\t{K.field.p}\n")
    stdout.write("cells\t" + "\t".join(str(c) for c in K.cell_counts()) + "\n")
    stdout.write(f"matching\t{len(V)}\n")
    stdout.write(f"acyclic\t{str(acyclic).lower()}\n")
    stdout.write(f"seeded\t{str(seeded).lower()}\n")
    return EXIT_OK


def _oracle_case(config: RunConfig, seed: int, log_level: str | None = None) -> bool:
    """1 つの入力で簡約とオラクルのバーコードを比較

    log_level を渡すと、joblib のワーカー内でロギングを設定し直す。
    """
    if log_level:
        configure_logging(log_level)
    K = _build_complex(config, seed)
    full = _build_complex(config, seed, full=True) if config.morse and config.is_rips else K
    engine = persistence(K, morse=config.morse, homology_dim=config.homology_dim)
    oracle = standard_reduction_oracle(full)
    if config.homology_dim is not None:
        oracle = oracle.restrict(range(config.homology_dim + 1))
    return engine.reported().signature() == oracle.reported().signature()


def _cmd_oracle_check(config: RunConfig, stdout: TextIO) -> int:
    seeds = [config.seed] if config.input else list(range(config.seed, config.seed + config.seeds))
    settings = get_settings()
    log_level = settings.log_level if settings.n_jobs != 1 else None
    results = Parallel(n_jobs=settings.n_jobs)(
        delayed(_oracle_case)(config, s, log_level) for s in seeds
    )
    for seed, ok in zip(seeds, results):
        stdout.write(f"{seed}\t{'ok' if ok else 'mismatch'}\n")
    mismatches = sum(1 for ok in results if not ok)
    logger.info("Oracle check finished", cases=len(seeds), mismatches=mismatches)
    return EXIT_ORACLE_MISMATCH if mismatches else EXIT_OK


def _cmd_bench(config: RunConfig, stdout: TextIO) -> int:
    seeds = list(range(config.seed, config.seed + config.seeds))
    reports = size_sweep(config.point_counts, config.ambient_dim, config.dim_max, seeds)
    df = to_frame(reports)
    if config.output_format == "structured-text":
        stdout.write(df.to_json(orient="records", indent=2) + "\n")
    else:
        stdout.write(df.to_csv(sep="\t", index=False))
    if config.store:
        store_reports(reports)
    return EXIT_OK


_HANDLERS = {
    "barcode": _cmd_barcode,
    "generators": _cmd_barcode,
    "validate": _cmd_validate,
    "oracle-check": _cmd_oracle_check,
    "bench": _cmd_bench,
}


def run(config: RunConfig, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    """設定に従って実行し終了コードを返す

    Args:
        config: 実行設定
        stdout: レポートの出力先
        stderr: エラーメッセージの出力先

    Returns:
        0: 成功、1: オラクル不一致、それ以外: エラーごとの終了コード
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        return _HANDLERS[config.command](config, stdout)
    except PersistenceError as exc:
        logger.debug("Run failed", error=type(exc).__name__)
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return exc.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persistence", description="Persistent homology by matroid reduction"
    )
    parser.add_argument(
        "command", choices=["barcode", "generators", "validate", "oracle-check", "bench"]
    )
    parser.add_argument("input", nargs="?", type=Path, help="Input file")
    parser.add_argument(
        "--input-format",
        choices=["lower-distance", "point-cloud", "complex-spec"],
        default="lower-distance",
    )
    parser.add_argument("--dim-max", type=int, default=2)
    parser.add_argument("--threshold", type=float, default=math.inf, help="Diameter cap or 'inf'")
    parser.add_argument("--field", type=int, default=None, help="Prime modulus")
    parser.add_argument("--morse", choices=["on", "off"], default="off")
    parser.add_argument("--generators", action="store_true", help="Append representative cycles")
    parser.add_argument("--format", choices=["tsv", "structured-text"], default="tsv")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--points", type=int, default=20, help="Random cloud size")
    parser.add_argument("--ambient-dim", type=int, default=3, help="Random cloud dimension")
    parser.add_argument("--seeds", type=int, default=20, help="Number of seeds for batch runs")
    parser.add_argument("--point-counts", type=int, nargs="+", default=[20, 30, 40])
    parser.add_argument("--store", action="store_true", help="Append bench reports to DuckDB")
    parser.add_argument("--dump", action="store_true", help="Write the complex as complex-spec")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    settings = get_settings()
    configure_logging(settings.log_level)
    args = build_parser().parse_args(argv)
    values = {
        "command": args.command,
        "input": args.input,
        "input_format": args.input_format,
        "dim_max": args.dim_max,
        "threshold": args.threshold,
        "morse": args.morse == "on",
        "generators": args.generators,
        "output_format": args.format,
        "seed": args.seed,
        "points": args.points,
        "ambient_dim": args.ambient_dim,
        "seeds": args.seeds,
        "point_counts": args.point_counts,
        "store": args.store,
        "dump": args.dump,
    }
    if args.field is not None:
        values["field"] = args.field
    try:
        config = RunConfig(**values)
    except ValidationError as exc:
        sys.stderr.write(f"error: invalid arguments\n{exc}\n")
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
