"""バーコード出力のテスト"""
from __future__ import annotations

import json
import math

from src.data.report import format_value, interval_line, render, to_structured, to_tsv
from src.reduction.barcode import Barcode, Interval
from src.reduction.persist import persistence

TRIANGLE_TSV = "0\t0.0\t1.0\n0\t0.0\t1.0\n0\t0.0\tinf\n1\t2.0\t3.0\n"


class TestFormatValue:
    """format_valueのテスト"""

    def test_finite(self):
        """有限値は浮動小数の表記"""
        assert format_value(1) == "1.0"
        assert format_value(1.4142135623730951) == "1.4142135623730951"

    def test_infinite(self):
        """無限大は inf"""
        assert format_value(math.inf) == "inf"


class TestIntervalLine:
    """interval_lineのテスト"""

    def test_without_representative(self):
        """代表元なしの 1 行"""
        interval = Interval(1, 2, None, 2.0, math.inf, (0, 2))
        assert interval_line(interval) == "1\t2.0\tinf"

    def test_generators_ignored_when_missing(self):
        """代表元がなければ生成元の指定は無視"""
        interval = Interval(0, 0, 1, 0.0, 1.0, (1,), (0, 1))
        assert interval_line(interval, with_generators=True) == "0\t0.0\t1.0"


class TestToTsv:
    """to_tsvのテスト"""

    def test_filtered_triangle(self, filtered_triangle):
        """三角形のバーコードの TSV"""
        barcode = persistence(filtered_triangle).reported()
        assert to_tsv(barcode) == TRIANGLE_TSV

    def test_with_generators(self, filtered_triangle):
        """代表サイクル付きの TSV"""
        barcode = persistence(filtered_triangle, with_generators=True).reported()
        lines = to_tsv(barcode, with_generators=True).splitlines()
        assert len(lines) == 4
        for line in lines:
            dim, birth, rest = line.split("\t")
            death, *tokens = rest.split(" ")
            assert tokens
            for token in tokens:
                cell, coeff = token.split(":")
                assert cell.count("-") == int(dim)
                assert coeff == "1"
        assert lines[2] == "0\t0.0\tinf 0:1"
        assert sorted(lines[3].split(" ")[1:]) == ["0-1:1", "0-2:1", "1-2:1"]

    def test_empty(self):
        """空のバーコードは空文字列"""
        assert to_tsv(Barcode()) == ""


class TestToStructured:
    """to_structuredのテスト"""

    def test_filtered_triangle(self, filtered_triangle):
        """三角形のバーコードの JSON"""
        barcode = persistence(filtered_triangle).reported()
        document = json.loads(to_structured(barcode))
        intervals = document["intervals"]
        assert len(intervals) == 4
        assert intervals[0]["death"] == 1.0
        assert intervals[2]["death"] == "inf"
        assert intervals[2]["death_grade"] is None
        assert intervals[3]["birth_grade"] == 2
        assert "representative" not in intervals[0]

    def test_with_generators(self, filtered_triangle):
        """代表サイクル付きの JSON"""
        barcode = persistence(filtered_triangle, with_generators=True).reported()
        document = json.loads(to_structured(barcode, with_generators=True))
        cycle = document["intervals"][3]["representative"]
        assert sorted(item["cell"] for item in cycle) == ["0-1", "0-2", "1-2"]
        assert all(item["coeff"] == 1 for item in cycle)


class TestRender:
    """renderのテスト"""

    def test_dispatch(self, filtered_triangle):
        """形式名による出力の切り替え"""
        barcode = persistence(filtered_triangle).reported()
        assert render(barcode, "tsv") == TRIANGLE_TSV
        assert render(barcode, "structured-text") == to_structured(barcode)
