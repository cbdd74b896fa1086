"""距離行列入力のテスト"""
from __future__ import annotations

import numpy as np
import pytest

from src.data.distance import (
    load_distance_matrix,
    parse_lower_distance,
    parse_point_cloud,
    sample_point_cloud,
)
from src.errors import InvalidDistanceMatrix, NegativeDistance, RaggedInput


class TestParseLowerDistance:
    """parse_lower_distanceのテスト"""

    def test_three_points(self):
        """3 点の下三角距離行列"""
        d = parse_lower_distance("1\n2,3\n")
        assert d.n == 3
        assert d.values[1, 0] == 1.0
        assert d.values[0, 2] == 2.0
        assert d.values[2, 1] == 3.0

    def test_whitespace_separated(self):
        """空白区切りと空行"""
        d = parse_lower_distance("1\n2 3\n\n")
        assert d.values[2, 1] == 3.0

    def test_single_point(self):
        """空の入力は 1 点"""
        assert parse_lower_distance("").n == 1

    def test_ragged(self):
        """行の長さが合わなければエラー"""
        with pytest.raises(RaggedInput):
            parse_lower_distance("1\n2\n")

    def test_negative(self):
        """負の距離はエラー"""
        with pytest.raises(NegativeDistance):
            parse_lower_distance("-1\n")

    def test_not_a_number(self):
        """数値でない値はエラー"""
        with pytest.raises(InvalidDistanceMatrix):
            parse_lower_distance("one\n")


class TestPointCloud:
    """点群入力のテスト"""

    def test_parse(self):
        """座標からユークリッド距離を計算"""
        d = parse_point_cloud("0 0\n3 4\n")
        assert d.values[0, 1] == pytest.approx(5.0)

    def test_ragged(self):
        """次元の揃わない点群はエラー"""
        with pytest.raises(RaggedInput):
            parse_point_cloud("0 0\n1\n")

    def test_empty(self):
        """点のない入力はエラー"""
        with pytest.raises(InvalidDistanceMatrix):
            parse_point_cloud("\n")

    def test_sample_is_reproducible(self):
        """同じシードなら同じ点群"""
        a = sample_point_cloud(5, 3, seed=7)
        assert a.shape == (5, 3)
        assert np.all((a >= 0) & (a < 1))
        assert np.array_equal(a, sample_point_cloud(5, 3, seed=7))
        assert not np.array_equal(a, sample_point_cloud(5, 3, seed=8))


class TestLoadDistanceMatrix:
    """load_distance_matrixのテスト"""

    def test_formats(self, tmp_path):
        """点群と下三角距離行列の読み込み"""
        path = tmp_path / "points.txt"
        path.write_text("0,0\n1,0\n", encoding="utf-8")
        assert load_distance_matrix(path, "point-cloud").n == 2
        path.write_text("1\n", encoding="utf-8")
        assert load_distance_matrix(path, "lower-distance").n == 2

    def test_unknown_format(self, tmp_path):
        """距離行列でない形式はエラー"""
        path = tmp_path / "x.txt"
        path.write_text("1\n", encoding="utf-8")
        with pytest.raises(InvalidDistanceMatrix):
            load_distance_matrix(path, "complex-spec")
