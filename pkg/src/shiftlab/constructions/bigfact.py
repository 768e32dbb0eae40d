"""Integers of the form ``n! * c + d`` kept symbolic.

Values such as ``n! (1 + n / 2**h)`` with ``n`` around ``4 * 10**7`` cannot be
materialized, but comparisons, differences and small moduli between them are
still decidable exactly.  ``c`` and ``d`` are ``Fraction`` so that the affine
form is closed under the operations used by the index plan; every instance
must denote an integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = ["FactorialAffine", "MATERIALIZE_LIMIT"]

# factorials up to this argument are cheap enough to compute outright
MATERIALIZE_LIMIT = 3000
# partial-product length used when bounding N!/n! from below
_PARTIAL = 64


@dataclass(frozen=True)
class FactorialAffine:
    n: int
    c: Fraction = Fraction(1)
    d: Fraction = Fraction(0)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("factorial argument must be a natural number")
        object.__setattr__(self, "c", Fraction(self.c))
        object.__setattr__(self, "d", Fraction(self.d))
        if self.d.denominator != 1:
            raise ValueError("the additive part must be an integer")
        if self.c.denominator > 1 and not self._divides_factorial(self.c.denominator):
            raise ValueError(f"n! * {self.c} is not certified to be an integer")

    def _divides_factorial(self, k: int) -> bool:
        if k <= self.n:
            return True
        if self.n <= MATERIALIZE_LIMIT:
            return math.factorial(self.n) % k == 0
        return False

    @classmethod
    def factorial(cls, n: int) -> "FactorialAffine":
        return cls(n)

    @property
    def materializable(self) -> bool:
        return self.n <= MATERIALIZE_LIMIT or self.c == 0

    def exact(self) -> int:
        if not self.materializable:
            raise OverflowError(f"{self.n}! is too large to materialize")
        v = (math.factorial(self.n) * self.c if self.c else 0) + self.d
        return int(v)

    def scale(self, a) -> "FactorialAffine":
        a = Fraction(a)
        return FactorialAffine(self.n, self.c * a, self.d * a)

    def __add__(self, other):
        if isinstance(other, FactorialAffine):
            if other.n != self.n:
                raise ValueError("only forms over the same factorial can be added")
            return FactorialAffine(self.n, self.c + other.c, self.d + other.d)
        return FactorialAffine(self.n, self.c, self.d + other)

    def __sub__(self, other):
        if isinstance(other, FactorialAffine):
            return self + other.scale(-1)
        return self + (-other)

    def __mod__(self, M: int) -> int:
        """Exact residue; needs ``den(c) * M <= n`` so that ``n! c`` is a multiple of M."""
        if M <= 0:
            raise ValueError("modulus must be positive")
        if self.materializable:
            return self.exact() % M
        if self.c.denominator * M > self.n:
            raise ValueError("residue not decidable symbolically for this modulus")
        return int(self.d) % M

    def floordiv(self, M: int) -> "FactorialAffine":
        r = self % M
        return FactorialAffine(self.n, self.c / M, (self.d - r) / M)

    def log(self) -> float:
        """Natural logarithm (needs a positive value)."""
        if self.materializable:
            return math.log(self.exact())
        if self.c <= 0:
            raise ValueError("log of a non-positive form")
        # n! c dominates d by orders of magnitude once n > MATERIALIZE_LIMIT
        return math.lgamma(self.n + 1) + math.log(self.c) + math.log1p(float(self.d) / math.exp(
            min(700.0, math.lgamma(self.n + 1) + math.log(self.c))))

    def compare(self, other: "FactorialAffine | int") -> int:
        """-1, 0 or 1 as self is less than, equal to or greater than other."""
        if not isinstance(other, FactorialAffine):
            other = FactorialAffine(0, Fraction(0), Fraction(other))
        if self.materializable and other.materializable:
            a, b = self.exact(), other.exact()
            return (a > b) - (a < b)
        if other.materializable or (not self.materializable and self.n >= other.n):
            return _compare_big(self, other)
        return -_compare_big(other, self)

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __eq__(self, other):
        if isinstance(other, (FactorialAffine, int)):
            return self.compare(other) == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.n, self.c, self.d))

    def describe(self) -> str:
        parts = [f"{self.n}!"]
        if self.c != 1:
            parts.append(f"* {self.c}")
        if self.d:
            parts.append(f"{'+' if self.d > 0 else '-'} {abs(self.d)}")
        return " ".join(parts)

    def __str__(self) -> str:
        return str(self.exact()) if self.materializable else self.describe()


def _compare_big(big: FactorialAffine, small: FactorialAffine) -> int:
    """Sign of ``big - small`` for a non-materializable ``big`` with the larger factorial.

    Over ``n = small.n``: ``big - small = n! (P c - c') + (d - d')`` where
    ``P = (n+1) ... N`` is bounded below by a partial product.
    """
    if big.c <= 0:
        raise ValueError("comparison needs a positive leading coefficient")
    N = big.n
    gap = abs(big.d - small.d)
    if small.c == 0 or small.materializable:
        # big >= N! c - |d| dwarfs any materializable value
        rhs = abs(small.exact()) + abs(big.d) + 1
        if math.lgamma(N + 1) + math.log(big.c) > math.log(rhs) + 1e-6:
            return 1
        raise ValueError("comparison undecidable symbolically")
    n = small.n
    if N == n:
        if big.c == small.c:
            return (big.d > small.d) - (big.d < small.d)
        if math.lgamma(n + 1) + math.log(abs(big.c - small.c)) > math.log(gap + 1) + 1e-6:
            return 1 if big.c > small.c else -1
        raise ValueError("comparison undecidable symbolically")
    partial = Fraction(1)
    for k in range(n + 1, min(N, n + _PARTIAL) + 1):
        partial *= k
    if N - n <= _PARTIAL:
        # P is exact: big - small = n! (P c - c') + (d - d')
        lead = partial * big.c - small.c
        if lead == 0:
            return (big.d > small.d) - (big.d < small.d)
        if math.lgamma(n + 1) + math.log(abs(lead)) > math.log(gap + 1) + 1e-6:
            return 1 if lead > 0 else -1
        raise ValueError("comparison undecidable symbolically")
    # P c - c' >= partial c - c' >= 1 gives big - small >= n! - gap
    if partial * big.c - small.c >= 1 and (gap == 0 or math.lgamma(n + 1) > math.log(gap) + 1e-6):
        return 1
    raise ValueError("comparison undecidable symbolically")
