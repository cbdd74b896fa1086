"""例外定義

入力不正はすべて ValueError のサブクラスとして扱う。
CLI は exit_code を見て終了コードを決める。
"""
from __future__ import annotations


class PersistenceError(ValueError):
    """パーシステンスエンジンの基底例外"""

    exit_code: int = 2


# 体・行列演算
class CompositeModulus(PersistenceError):
    exit_code = 5


class ZeroInverse(PersistenceError):
    exit_code = 5


class DimensionMismatch(PersistenceError):
    pass


class NotTriangular(PersistenceError):
    pass


class SingularDiagonal(PersistenceError):
    pass


class MissingGrade(PersistenceError):
    pass


class UnknownId(PersistenceError):
    pass


# マトロイド
class UnknownElement(PersistenceError):
    pass


class OverlapError(PersistenceError):
    pass


class NotABasis(PersistenceError):
    pass


class NotAFiltration(PersistenceError):
    pass


class NotModular(PersistenceError):
    pass


# 複体
class InvalidCell(PersistenceError):
    exit_code = 3


class NotAChainComplex(PersistenceError):
    exit_code = 3


class FiltrationViolation(PersistenceError):
    exit_code = 3


class InvalidDistanceMatrix(PersistenceError):
    pass


class TooLarge(PersistenceError):
    exit_code = 4


# 簡約（ここで投げられるのは実装バグ）
class SingularPivotBlock(PersistenceError):
    exit_code = 6


class NonTermination(PersistenceError):
    exit_code = 6


class NotAMatching(PersistenceError):
    exit_code = 6


class CyclicMatching(PersistenceError):
    exit_code = 6


class TransformsNotAccumulated(PersistenceError):
    exit_code = 6


class TooLargeForOracle(PersistenceError):
    exit_code = 4


# 入力フォーマット
class RaggedInput(PersistenceError):
    pass


class NegativeDistance(PersistenceError):
    pass


class ComplexSpecError(PersistenceError):
    pass
