"""フィルター付き複体と構築関数"""
from src.complex.combinatorial import chessboard_complex, matching_complex
from src.complex.filtered import Cell, FilteredComplex, from_boundaries
from src.complex.rips import (
    DistanceMatrix,
    RipsFiltration,
    RipsSkeleton,
    rips_morse_skeleton,
    vietoris_rips,
)
from src.complex.simplicial import from_simplices

__all__ = [
    "Cell",
    "DistanceMatrix",
    "FilteredComplex",
    "RipsFiltration",
    "RipsSkeleton",
    "chessboard_complex",
    "from_boundaries",
    "from_simplices",
    "matching_complex",
    "rips_morse_skeleton",
    "vietoris_rips",
]
