"""Enumerations of finitely supported rational sequences.

Rationals are coded through the Calkin-Wilf tree (0 -> 0, q > 0 with tree
index k -> 2k - 1, -q -> 2k).  A finite list of naturals is coded by
``code(()) = 0`` and ``code((a, *rest)) = 2**a * (2 * code(rest) + 1)``.  A
sequence with nonzero last entry is the list of its rational codes with the
last code lowered by one, so every natural number names exactly one sequence
and the sequence named by ``i`` has length at most ``log2(i + 1)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

__all__ = [
    "cw_rational",
    "cw_index",
    "rational_of_code",
    "code_of_rational",
    "decode_list",
    "encode_list",
    "decode_sequence",
    "encode_sequence",
    "TargetEnumeration",
    "enumerate_targets",
]


def cw_rational(k: int) -> Fraction:
    """The k-th positive rational (k >= 1) in breadth-first Calkin-Wilf order."""
    if k < 1:
        raise ValueError("Calkin-Wilf indices start at 1")
    a, b = 1, 1
    for bit in bin(k)[3:]:
        if bit == "0":
            b = a + b
        else:
            a = a + b
    return Fraction(a, b)


def cw_index(q: Fraction) -> int:
    q = Fraction(q)
    if q <= 0:
        raise ValueError("Calkin-Wilf covers positive rationals only")
    a, b = q.numerator, q.denominator
    bits = []
    while (a, b) != (1, 1):
        if a < b:
            bits.append("0")
            b -= a
        else:
            bits.append("1")
            a -= b
    return int("1" + "".join(reversed(bits)), 2)


def rational_of_code(c: int) -> Fraction:
    if c == 0:
        return Fraction(0)
    k = (c + 1) // 2
    q = cw_rational(k)
    return q if c % 2 else -q


def code_of_rational(q) -> int:
    q = Fraction(q)
    if q == 0:
        return 0
    k = cw_index(abs(q))
    return 2 * k - 1 if q > 0 else 2 * k


def decode_list(n: int) -> list[int]:
    out = []
    while n:
        a = (n & -n).bit_length() - 1
        out.append(a)
        n = ((n >> a) - 1) // 2
    return out


def encode_list(items: Sequence[int]) -> int:
    n = 0
    for a in reversed(items):
        n = (2 * n + 1) << a
    return n


def decode_sequence(i: int) -> tuple:
    codes = decode_list(i)
    if codes:
        codes[-1] += 1
    return tuple(mpq(rational_of_code(c)) for c in codes)


def encode_sequence(s: Sequence) -> int:
    s = list(s)
    while s and s[-1] == 0:
        s.pop()
    codes = [code_of_rational(Fraction(int(mpq(v).numerator), int(mpq(v).denominator))) for v in s]
    if codes:
        codes[-1] -= 1
    return encode_list(codes)


class TargetEnumeration:
    """i -> s^(i), cached.

    ``generic``: the coding above.  ``ne_rescaled``: the greedy relabeling
    taking, at step i, the least unused generic code whose entries all satisfy
    ``|s_n| <= 2**(i/p)``; every code becomes eligible eventually and is then
    taken after finitely many steps, so the relabeling is a bijection.
    """

    def __init__(self, mode: str = "generic", p: float = 2):
        if mode not in ("generic", "ne_rescaled"):
            raise ValueError(f"unknown enumeration mode {mode!r}")
        self.mode = mode
        self.p = p
        self._codes: list[int] = []
        self._used: set[int] = set()
        self._frontier = 0

    def code(self, i: int) -> int:
        """Generic code of s^(i)."""
        if self.mode == "generic":
            return i
        while len(self._codes) <= i:
            self._codes.append(self._next(len(self._codes)))
        return self._codes[i]

    def _eligible(self, c: int, i: int) -> bool:
        # |s_n| <= 2^(i/p)  <=>  |s_n|^p <= 2^i
        return all(float(abs(v)) ** self.p <= 2.0 ** i * (1 + 1e-15) for v in decode_sequence(c))

    def _next(self, i: int) -> int:
        c = self._frontier
        while c in self._used or not self._eligible(c, i):
            c += 1
        self._used.add(c)
        while self._frontier in self._used:
            self._frontier += 1
        return c

    def __call__(self, i: int) -> tuple:
        return decode_sequence(self.code(i))

    target = __call__

    def index_of(self, s: Sequence) -> int:
        c = encode_sequence(s)
        if self.mode == "generic":
            return c
        i = 0
        while self.code(i) != c:
            i += 1
        return i

    def length(self, i: int) -> int:
        return len(self(i))

    def m_positive(self, i: int) -> int:
        """Least positive m with s_n = 0 for n >= m."""
        return max(1, self.length(i))

    def m_last(self, i: int) -> int:
        """Least m with s_n = 0 for n > m."""
        return max(0, self.length(i) - 1)

    def padded(self, i: int, L: int) -> tuple:
        s = self(i)
        if len(s) > L:
            raise ValueError(f"target {i} has length {len(s)} > {L}")
        return s + (mpq(0),) * (L - len(s))


def enumerate_targets(i: int, mode: str = "generic", p: float = 2) -> tuple:
    return TargetEnumeration(mode, p)(i)
