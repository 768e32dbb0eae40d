"""Brute-force verification suites: hat decomposition, submeasure axioms, shift algebra.

Each suite returns a ``SuiteResult`` carrying counts and the first failing
instance in a JSON-friendly form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from gmpy2 import mpq

from .cantor import FiniteFamily, hat_decomposition_witness, hereditary_witness, random_hereditary_family
from .ideals import Cardinality, DensitySup, DyadicSup, GeneratedLscsm, Harmonic, Lscsm, MuN, NatSet
from .sequences import SeqVector, combine
from .shifts import shift_apply
from .weights import Explicit, weight_product

__all__ = ["SuiteResult", "hat_suite", "lscsm_suite", "shift_algebra_suite", "SUITES"]

# float submeasures are compared with this absolute slack
LSCSM_SLACK = 1e-12


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    passed: int = 0
    failure: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.checked == self.passed and self.failure is None

    def record(self, good: bool, witness) -> None:
        self.checked += 1
        if good:
            self.passed += 1
        elif self.failure is None:
            self.failure = witness

    def to_dict(self) -> dict:
        return {"name": self.name, "checked": self.checked, "passed": self.passed, "ok": self.ok,
                "failure": self.failure, **self.details}


def hat_suite(rng: random.Random, M: int = 10, count: int = 100,
              families: list[FiniteFamily] | None = None) -> SuiteResult:
    """Random hereditary families over [0, M], plus any supplied ones."""
    res = SuiteResult("hat_decomposition", details={"M": M})
    pool = [random_hereditary_family(M, rng) for _ in range(count)]
    for fam in (families or []) + pool:
        bad = hereditary_witness(fam)
        if bad is not None:
            res.record(False, {"family": fam.sets(), "reason": "not hereditary",
                               "member": bad[0], "missing_subset": bad[1]})
            continue
        w = hat_decomposition_witness(fam)
        res.record(w["equal"], {"family": fam.sets(), "mismatch": w["mismatch"]})
    return res


def _random_subset(rng: random.Random, top: int) -> set[int]:
    return {n for n in range(top + 1) if rng.random() < rng.choice((0.1, 0.3, 0.6))}


def _lscsms(rng: random.Random) -> list[Lscsm]:
    gens = [NatSet.rule(lambda n, k=k: n % k == 0, name=f"mult{k}") for k in (2, 3, 5)]
    return [Cardinality(), DensitySup(), DyadicSup(), Harmonic(), Harmonic(exact=True),
            MuN(rng.randint(0, 64)), GeneratedLscsm(gens)]


def _le(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return a <= b + LSCSM_SLACK
    return a <= b


def lscsm_suite(rng: random.Random, count: int = 200, top: int = 64) -> SuiteResult:
    """phi(empty) = 0, monotonicity and subadditivity on random A, B in [0, top]."""
    res = SuiteResult("lscsm_axioms", details={"universe": top})
    for phi in _lscsms(rng):
        res.record(phi(set()) == 0, {"lscsm": repr(phi), "axiom": "empty"})
        for _ in range(count):
            A, B = _random_subset(rng, top), _random_subset(rng, top)
            fa, fb, fu = phi(A), phi(B), phi(A | B)
            wit = {"lscsm": repr(phi), "A": sorted(A), "B": sorted(B)}
            res.record(_le(fa, fu) and _le(fb, fu), {**wit, "axiom": "monotone"})
            res.record(_le(fu, fa + fb), {**wit, "axiom": "subadditive"})
    return res


def _random_rational(rng: random.Random, span: int = 9) -> mpq:
    return mpq(rng.randint(-span, span), rng.randint(1, span))


def _random_weights(rng: random.Random) -> Explicit:
    vals = [_random_rational(rng) or mpq(1) for _ in range(rng.randint(1, 12))]
    return Explicit(vals, tail=mpq(rng.choice((1, 2, 3)), rng.choice((1, 2))))


def shift_algebra_suite(rng: random.Random, count: int = 1000) -> SuiteResult:
    """Linearity, semigroup law and product telescoping in exact rational arithmetic."""
    res = SuiteResult("shift_algebra")
    for _ in range(count):
        w = _random_weights(rng)
        L = rng.randint(1, 6)
        n, m = rng.randint(0, 10), rng.randint(0, 10)
        xs = [_random_rational(rng) for _ in range(rng.randint(1, 24))]
        ys = [_random_rational(rng) for _ in range(rng.randint(1, 24))]
        x, y = SeqVector.from_values(xs), SeqVector.from_values(ys)
        a, b = _random_rational(rng), _random_rational(rng)
        lin_l = shift_apply(w, combine([(a, x), (b, y)]), n, L, exact=True)
        tx, ty = shift_apply(w, x, n, L, exact=True), shift_apply(w, y, n, L, exact=True)
        lin_r = [a * u + b * v for u, v in zip(tx, ty)]
        res.record(lin_l == lin_r, {"law": "linearity", "w": [str(v) for v in w.values],
                                    "x": [str(v) for v in xs], "y": [str(v) for v in ys], "n": n})
        inner = SeqVector.from_values(shift_apply(w, x, n, len(xs) + 1, exact=True))
        lhs = shift_apply(w, inner, m, L, exact=True)
        rhs = shift_apply(w, x, n + m, L, exact=True)
        res.record(lhs == rhs, {"law": "semigroup", "w": [str(v) for v in w.values],
                                "x": [str(v) for v in xs], "n": n, "m": m})
        i = rng.randint(0, 15)
        j = rng.randint(i, 20)
        k = rng.randint(j + 1, 26)
        tele = weight_product(w, i, j) * weight_product(w, j + 1, k) == weight_product(w, i, k)
        res.record(tele, {"law": "telescoping", "w": [str(v) for v in w.values], "i": i, "j": j, "k": k})
    return res


SUITES = {"hat": hat_suite, "lscsm": lscsm_suite, "shift_algebra": shift_algebra_suite}
