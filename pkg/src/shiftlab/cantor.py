"""Finite-universe combinatorics of P(omega) and the Baire-space gadgets.

Subsets of ``[0, M]`` are encoded as bitmasks (bit ``n`` set iff ``n`` is in
the set), so a family over ``[0, M]`` is a set of ints below ``2**(M+1)``.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "FiniteFamily",
    "BasicClopen",
    "BairePoint",
    "BaireRule",
    "HatClass",
    "mask_of",
    "set_of",
    "hereditary_closure",
    "is_hereditary",
    "hat_g_membership",
    "g_membership",
    "verify_hat_decomposition",
    "verify_hat_decomposition_batch",
    "hat_decomposition_witness",
    "random_hereditary_family",
    "baire_h",
    "delta_check",
    "hc_points",
]

CLOSURE_CAP = 20
EXHAUSTIVE_CAP = 16


def mask_of(S: Iterable[int]) -> int:
    m = 0
    for n in S:
        if n < 0:
            raise ValueError("elements must be natural numbers")
        m |= 1 << n
    return m


def set_of(mask: int) -> frozenset:
    out = []
    n = 0
    while mask:
        if mask & 1:
            out.append(n)
        mask >>= 1
        n += 1
    return frozenset(out)


@dataclass(frozen=True)
class FiniteFamily:
    """A family of subsets of ``[0, M]``."""

    M: int
    members: frozenset  # of bitmasks

    def __post_init__(self):
        limit = 1 << (self.M + 1)
        for m in self.members:
            if not 0 <= m < limit:
                raise ValueError(f"member {sorted(set_of(m))} is not a subset of [0, {self.M}]")

    @classmethod
    def of(cls, M: int, sets: Iterable[Iterable[int]]) -> "FiniteFamily":
        return cls(M, frozenset(mask_of(s) for s in sets))

    def sets(self) -> list[list[int]]:
        """Members as sorted lists, in a canonical order."""
        return sorted((sorted(set_of(m)) for m in self.members), key=lambda s: (len(s), s))

    def __contains__(self, S) -> bool:
        return (S if isinstance(S, int) else mask_of(S)) in self.members

    def __len__(self) -> int:
        return len(self.members)

    def to_json(self) -> str:
        return json.dumps(self.sets())

    @classmethod
    def from_json(cls, text: str, M: int | None = None) -> "FiniteFamily":
        sets = json.loads(text)
        if M is None:
            M = max((max(s) for s in sets if s), default=0)
        return cls.of(M, sets)

    def indicator(self) -> np.ndarray:
        """Boolean array over all ``2**(M+1)`` subsets."""
        out = np.zeros(1 << (self.M + 1), dtype=bool)
        if self.members:
            out[np.fromiter(self.members, dtype=np.int64)] = True
        return out


def _submasks(m: int):
    sub = m
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & m


def hereditary_closure(fam: FiniteFamily) -> FiniteFamily:
    """Smallest hereditary family containing ``fam``."""
    if fam.M > CLOSURE_CAP:
        raise ValueError(f"universe too large: M={fam.M} > {CLOSURE_CAP}")
    out = set()
    for m in sorted(fam.members, key=lambda v: -bin(v).count("1")):
        if m in out:
            continue
        out.update(_submasks(m))
    return FiniteFamily(fam.M, frozenset(out))


def is_hereditary(fam: FiniteFamily) -> bool:
    return hereditary_witness(fam) is None


def hereditary_witness(fam: FiniteFamily):
    """A pair (A, B) with A in fam, B a subset of A missing from fam, or None."""
    for m in fam.members:
        rest = m
        while rest:
            bit = rest & -rest
            rest ^= bit
            if (m ^ bit) not in fam.members:
                return sorted(set_of(m)), sorted(set_of(m ^ bit))
    return None


@dataclass(frozen=True)
class BasicClopen:
    """G = {S : S cap [0, max F] = F}; with F empty, all of P(omega)."""

    F: frozenset

    @classmethod
    def of(cls, F: Iterable[int]) -> "BasicClopen":
        return cls(frozenset(F))

    @property
    def mask(self) -> int:
        return mask_of(self.F)


def _prefix(top: int) -> int:
    return (1 << (top + 1)) - 1


def g_membership(Fk: BasicClopen, S: Iterable[int] | int) -> bool:
    s = S if isinstance(S, int) else mask_of(S)
    if not Fk.F:
        return True
    return s & _prefix(max(Fk.F)) == Fk.mask


def hat_g_membership(Fk: BasicClopen, S: Iterable[int] | int, M: int | None = None) -> bool:
    """True iff F_k is contained in S cap [0, max F_k]."""
    s = S if isinstance(S, int) else mask_of(S)
    if M is not None:
        if s >> (M + 1):
            raise ValueError("S is not a subset of [0, M]")
        if Fk.F and max(Fk.F) > M:
            raise ValueError("max F_k exceeds the universe bound")
    if not Fk.F:
        return True
    f = Fk.mask
    return s & _prefix(max(Fk.F)) & f == f


def _upward_closure(mark: np.ndarray, M: int) -> np.ndarray:
    """All supersets (within [0, M]) of marked sets; a zeta transform over bits."""
    up = mark.copy()
    size = 1 << (M + 1)
    for b in range(M + 1):
        step = 1 << b
        view = up.reshape(size // (2 * step), 2, step)
        view[:, 1, :] |= view[:, 0, :]
    return up


def hat_decomposition_witness(F: FiniteFamily):
    """Brute-force comparison of the G_k and hat-G_k unions.

    With G = P([0,M]) minus F, the pieces are all basic clopen sets G_k
    (in the finite universe) contained in G.  Returns a dict with the two
    unions and their first disagreement, if any.
    """
    M = F.M
    if M > EXHAUSTIVE_CAP:
        raise ValueError(f"universe too large: M={M} > {EXHAUSTIVE_CAP}")
    if not is_hereditary(F):
        raise ValueError("requires hereditary family")
    size = 1 << (M + 1)
    in_G = ~F.indicator()
    free = [np.arange(1 << (M - top), dtype=np.int64) << (top + 1) for top in range(M + 1)]

    g_union = np.zeros(size, dtype=bool)
    pieces = np.zeros(size, dtype=bool)  # pieces[f]: the clopen set with F_k = f lies in G
    if in_G.all():
        pieces[0] = True  # F_k = empty: the whole space
        g_union[:] = True
    for f in range(1, size):
        top = f.bit_length() - 1
        members = f | free[top]  # S cap [0, top] = f, anything above top
        if in_G[members].all():
            pieces[f] = True
            g_union[members] = True

    hat_union = _upward_closure(pieces, M)
    mismatch = np.flatnonzero(g_union != hat_union)
    uncovered = np.flatnonzero(in_G & ~g_union)
    return {
        "pieces": int(pieces.sum()),
        "g_union_equals_G": uncovered.size == 0,
        "equal": mismatch.size == 0 and uncovered.size == 0,
        "mismatch": sorted(set_of(int(mismatch[0]))) if mismatch.size else None,
    }


def verify_hat_decomposition(F: FiniteFamily) -> bool:
    """Check that the basic clopen pieces of the complement of ``F`` and their
    hat versions have the same union (which is the whole complement)."""
    return hat_decomposition_witness(F)["equal"]


def verify_hat_decomposition_batch(rows: np.ndarray, M: int) -> np.ndarray:
    """``verify_hat_decomposition`` for many families at once.

    ``rows[r, S]`` says whether subset ``S`` (a bitmask) belongs to family r.
    Every row must be hereditary.  Returns one boolean per row.
    """
    if M > EXHAUSTIVE_CAP:
        raise ValueError(f"universe too large: M={M} > {EXHAUSTIVE_CAP}")
    rows = np.asarray(rows, dtype=bool)
    size = 1 << (M + 1)
    if rows.ndim != 2 or rows.shape[1] != size:
        raise ValueError(f"rows must have shape (K, {size})")
    K = rows.shape[0]
    # hereditary: S in F implies S minus any one element in F
    masks = np.arange(size)
    for b in range(M + 1):
        has = masks[(masks >> b) & 1 == 1]
        if np.any(rows[:, has] & ~rows[:, has ^ (1 << b)]):
            raise ValueError("requires hereditary family")
    in_G = ~rows
    g_union = np.zeros((K, size), dtype=bool)
    pieces = np.zeros((K, size), dtype=bool)
    whole = in_G.all(axis=1)
    pieces[whole, 0] = True
    g_union[whole] = True
    for f in range(1, size):
        top = f.bit_length() - 1
        members = f | (np.arange(1 << (M - top), dtype=np.int64) << (top + 1))
        inside = in_G[:, members].all(axis=1)
        pieces[:, f] = inside
        g_union[np.ix_(inside, members)] = True
    hat = pieces
    for b in range(M + 1):
        step = 1 << b
        view = hat.reshape(K, size // (2 * step), 2, step)
        view[:, :, 1, :] |= view[:, :, 0, :]
    return (g_union == hat).all(axis=1) & ~(in_G & ~g_union).any(axis=1)


def random_hereditary_family(M: int, rng: random.Random, generators: int | None = None) -> FiniteFamily:
    """Hereditary closure of a few random subsets of ``[0, M]``."""
    k = generators if generators is not None else rng.randint(1, 4)
    gens = []
    for _ in range(k):
        gens.append(rng.getrandbits(M + 1) & rng.getrandbits(M + 1))
    return hereditary_closure(FiniteFamily(M, frozenset(gens)))


# ---------------------------------------------------------------------------
# modified Borel classes of hereditary families (symbolic levels only)


@dataclass(frozen=True)
class HatClass:
    """A family built from hereditary families by countable unions/intersections.

    Only finite unions and intersections are materialized; the ``label``
    records the modified class (Pi-hat_1, Sigma-hat_2, Pi-hat_3, ...).
    """

    family: FiniteFamily
    level: int  # 1: hereditary closed, 2k: union of level 2k-1, 2k+1: intersection of level 2k

    @property
    def label(self) -> str:
        kind = "Sigma" if self.level % 2 == 0 else "Pi"
        return f"{kind}-hat^0_{self.level}"

    @classmethod
    def base(cls, fam: FiniteFamily) -> "HatClass":
        if not is_hereditary(fam):
            raise ValueError("requires hereditary family")
        return cls(fam, 1)

    @classmethod
    def union(cls, parts: Sequence["HatClass"]) -> "HatClass":
        lvl = _common_level(parts)
        if lvl % 2 == 0:
            raise ValueError("unions are taken of odd-level (Pi-hat) classes")
        M = parts[0].family.M
        members = frozenset().union(*(p.family.members for p in parts))
        return cls(FiniteFamily(M, members), lvl + 1)

    @classmethod
    def intersection(cls, parts: Sequence["HatClass"]) -> "HatClass":
        lvl = _common_level(parts)
        if lvl % 2 == 1:
            raise ValueError("intersections are taken of even-level (Sigma-hat) classes")
        M = parts[0].family.M
        members = parts[0].family.members.intersection(*(p.family.members for p in parts[1:]))
        return cls(FiniteFamily(M, members), lvl + 1)

    def hc_borel_class(self) -> str:
        """Borel class of HC_T(F) for F in this class."""
        if self.level == 1:
            return "Pi^0_2"
        if self.level % 2 == 0:
            return f"Pi^0_{self.level}"
        return f"Sigma^0_{self.level}"


def _common_level(parts) -> int:
    if not parts:
        raise ValueError("need at least one part")
    levels = {p.level for p in parts}
    if len(levels) != 1:
        raise ValueError("parts must share a level")
    return levels.pop()


def hc_points(T: Sequence[int], F: FiniteFamily) -> set[int]:
    """HC_T(F) for a map ``T`` on the discrete space ``{0..P-1}``.

    Orbits are observed for ``n`` in ``[0, F.M]``; ``x`` is kept iff for every
    nonempty ``U`` the visit set of ``x`` to ``U`` is outside ``F``.
    """
    P = len(T)
    if P > 10:
        raise ValueError("discrete space too large for exhaustive open sets")
    out = set()
    for x in range(P):
        orbit = []
        cur = x
        for _ in range(F.M + 1):
            orbit.append(cur)
            cur = T[cur]
        ok = True
        for U in range(1, 1 << P):
            visits = mask_of(n for n, pt in enumerate(orbit) if U >> pt & 1)
            if visits in F.members:
                ok = False
                break
        if ok:
            out.add(x)
    return out


# ---------------------------------------------------------------------------
# Baire space


@dataclass(frozen=True)
class BairePoint:
    """A finite prefix x_0..x_L of a point of omega^omega."""

    prefix: tuple

    def __post_init__(self):
        if any((not isinstance(v, (int, np.integer))) or v < 0 for v in self.prefix):
            raise ValueError("Baire points have natural-number coordinates")

    @classmethod
    def of(cls, values: Iterable[int]) -> "BairePoint":
        return cls(tuple(int(v) for v in values))

    def __len__(self) -> int:
        return len(self.prefix)

    def __getitem__(self, n):
        return self.prefix[n]

    def agree_upto(self, other: "BairePoint") -> int:
        """Largest n with x_i = x'_i for all i <= n (-1 if they differ at 0)."""
        return agree_prefix(self.prefix, other.prefix)


def agree_prefix(a: Sequence[int], b: Sequence[int]) -> int:
    n = -1
    for u, v in zip(a, b):
        if u != v:
            break
        n += 1
    return n


@dataclass(frozen=True)
class BaireRule:
    """A rule-generated point; ``diverges`` records lim x_n = +inf (membership in C_3)."""

    fn: Callable[[int], int]
    diverges: bool
    name: str = "rule"

    def prefix(self, L: int) -> BairePoint:
        return BairePoint.of(self.fn(n) for n in range(L))

    @classmethod
    def constant(cls, j: int) -> "BaireRule":
        return cls(lambda n: j, False, f"constant-{j}")

    @classmethod
    def diagonal(cls) -> "BaireRule":
        return cls(lambda n: n, True, "diagonal")

    @classmethod
    def sqrt_growth(cls, growth: int = 1) -> "BaireRule":
        return cls(lambda n: min(n, math.isqrt(n) * growth), True, f"sqrt-growth-{growth}")


def baire_h(x: BairePoint) -> BairePoint:
    """Componentwise min{n, x_n}; a retraction onto Delta."""
    return BairePoint.of(min(n, v) for n, v in enumerate(x.prefix))


def delta_check(x: BairePoint) -> bool:
    """x_n <= n for every coordinate of the prefix."""
    return all(v <= n for n, v in enumerate(x.prefix))


def enumerate_subsets(M: int):
    """All subsets of [0, M] as sorted tuples (small M only)."""
    for r in range(M + 2):
        yield from itertools.combinations(range(M + 1), r)
