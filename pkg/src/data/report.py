"""バーコードの出力（TSV / 構造化テキスト）"""
from __future__ import annotations

import json
import math
from collections.abc import Mapping
from typing import Any

from src.algebra.spmat import CellId
from src.data.complex_spec import format_id
from src.reduction.barcode import Barcode, Interval


def format_value(value: float) -> str:
    """最短の往復可能な 10 進表現（無限大は inf）"""
    return "inf" if math.isinf(value) else repr(float(value))


def _chain_items(chain: Mapping[CellId, int]) -> list[tuple[str, int]]:
    return [(format_id(e), int(c)) for e, c in chain.items()]


def interval_line(interval: Interval, with_generators: bool = False) -> str:
    line = f"{interval.dim}\t{format_value(interval.birth)}\t{format_value(interval.death)}"
    if with_generators and interval.representative is not None:
        line += "".join(f" {e}:{c}" for e, c in _chain_items(interval.representative))
    return line


def to_tsv(barcode: Barcode, with_generators: bool = False) -> str:
    """1 区間 1 行: 次元 TAB 生成 TAB 消滅"""
    return "".join(interval_line(iv, with_generators) + "\n" for iv in barcode.sorted())


def to_structured(barcode: Barcode, with_generators: bool = False) -> str:
    """JSON 文書"""
    records: list[dict[str, Any]] = []
    for iv in barcode.sorted():
        record: dict[str, Any] = {
            "dim": iv.dim,
            "birth": iv.birth,
            "death": format_value(iv.death) if iv.is_essential else iv.death,
            "birth_grade": iv.birth_grade,
            "death_grade": iv.death_grade,
        }
        if with_generators and iv.representative is not None:
            record["representative"] = [
                {"cell": e, "coeff": c} for e, c in _chain_items(iv.representative)
            ]
        records.append(record)
    return json.dumps({"intervals": records}, indent=2, ensure_ascii=False) + "\n"


def render(barcode: Barcode, output_format: str, with_generators: bool = False) -> str:
    if output_format == "structured-text":
        return to_structured(barcode, with_generators)
    return to_tsv(barcode, with_generators)
