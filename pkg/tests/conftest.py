"""pytest設定"""
from __future__ import annotations

import itertools

import pytest
import structlog

from src.algebra.field import make_field
from src.complex.filtered import FilteredComplex
from src.complex.simplicial import from_simplices
from tests.factories import closure


@pytest.fixture(autouse=True)
def _reset_structlog():
    """main() が設定したロガーの出力先をテストごとに戻す"""
    yield
    structlog.reset_defaults()


@pytest.fixture
def gf2():
    return make_field(2)


@pytest.fixture
def gf3():
    return make_field(3)


@pytest.fixture
def filtered_triangle(gf2) -> FilteredComplex:
    """辺が 1, 1, 2 の順に入り、面が 3 で入る三角形"""
    grades = {
        (0,): 0,
        (1,): 0,
        (2,): 0,
        (0, 1): 1,
        (1, 2): 1,
        (0, 2): 2,
        (0, 1, 2): 3,
    }
    return from_simplices(grades, gf2)


@pytest.fixture
def square_cycle(gf3) -> FilteredComplex:
    """4 辺のサイクル（最後の辺が次数 2）"""
    grades = {
        (0,): 0,
        (1,): 0,
        (2,): 0,
        (3,): 0,
        (0, 1): 1,
        (1, 2): 1,
        (2, 3): 1,
        (0, 3): 2,
    }
    return from_simplices(grades, gf3)


@pytest.fixture
def tetrahedron_boundary(gf3) -> FilteredComplex:
    """四面体の境界（次数 = 次元）"""
    grades = closure(itertools.combinations(range(4), 3), lambda face: len(face) - 1)
    return from_simplices(grades, gf3)


@pytest.fixture
def flat_sphere(gf2) -> FilteredComplex:
    """四面体の境界（すべて次数 0）"""
    grades = closure(itertools.combinations(range(4), 3), lambda face: 0)
    return from_simplices(grades, gf2)


@pytest.fixture
def unit_square_distances() -> str:
    """単位正方形の頂点の下三角距離行列"""
    return "1\n1.4142135623730951,1\n1,1.4142135623730951,1\n"
