"""素体 GF(p) の算術"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from src.errors import CompositeModulus, ZeroInverse

# 積が 64bit に収まるよう法は 2^31 未満に制限する
MAX_MODULUS = 2**31 - 1


def _is_prime(p: int) -> bool:
    """試し割りによる素数判定"""
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    """素体 GF(p)

    要素は [0, p) の代表元で表し、すべての演算で即座に簡約する。
    """

    p: int

    def __post_init__(self) -> None:
        if self.p > MAX_MODULUS:
            raise CompositeModulus(f"Modulus {self.p} exceeds the supported bound {MAX_MODULUS}")
        if not _is_prime(self.p):
            raise CompositeModulus(f"Modulus {self.p} is not prime")

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def normalize(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        """乗法逆元

        Args:
            a: 体の元

        Returns:
            a * inv(a) ≡ 1 (mod p) を満たす元
        """
        a %= self.p
        if a == 0:
            raise ZeroInverse(f"0 has no inverse in GF({self.p})")
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return (a * self.inv(b)) % self.p

    def sign(self, k: int) -> int:
        """(-1)^k の体での像"""
        return 1 if k % 2 == 0 else self.p - 1


@lru_cache
def make_field(p: int) -> PrimeField:
    """素体を生成（キャッシュ付き）

    Args:
        p: 法（素数）

    Returns:
        PrimeField
    """
    return PrimeField(p)


def inv(a: int, field: PrimeField) -> int:
    """field における a の逆元"""
    return field.inv(a)
