import math
from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from shiftlab.ideals import HorizonError
from shiftlab.sequences import (
    CertificateError,
    Cylinder,
    RescaledBlock,
    SeqVector,
    ValueBlock,
    combine,
    norm_estimate,
    p_norm,
    p_norm_pow,
    restrict,
    sup_norm,
)
from shiftlab.weights import Constant, Explicit

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=5)


def test_overlapping_blocks_rejected():
    with pytest.raises(ValueError, match="overlap"):
        SeqVector([ValueBlock(0, (1, 2)), ValueBlock(1, (3,))])


def test_horizon_guards_reads():
    x = SeqVector([ValueBlock(0, (1, 2, 3))], horizon=3)
    assert x.materialize(3) == [1, 2, 3]
    with pytest.raises(HorizonError):
        x.value(3)


def test_rescaled_block_values():
    w = Constant(2)
    b = RescaledBlock(5, 3, (1, 1), w, shift=4)
    # entry at pos is base[pos-4] / (w_{pos-3} ... w_pos) = 1/16
    assert b.value(5) == mpq(1, 16)
    tiled = RescaledBlock(10, 4, (1, 3), w, tile=2)
    assert [tiled.value(p) for p in range(10, 14)] == [mpq(1, 2 ** 10), mpq(3, 2 ** 10),
                                                       mpq(1, 2 ** 12), mpq(3, 2 ** 12)]


def test_rescaled_log_arrays_match_values():
    w = Explicit([2, -3, Fraction(1, 2)], tail=Fraction(5, 4))
    b = RescaledBlock(6, 20, (1, -2, 0, 3), w, tile=4)
    sign, logs = b.log_arrays(6, 26)
    for i, pos in enumerate(range(6, 26)):
        v = b.value(pos)
        if v == 0:
            assert sign[i] == 0
        else:
            assert sign[i] == (1 if v > 0 else -1)
            assert math.isclose(logs[i], math.log(abs(float(v))), abs_tol=1e-9)


def test_tiny_entries_stay_representable():
    b = RescaledBlock(5000, 1, (1,), Constant(2), tile=1)
    _, logs = b.log_arrays(5000, 5001)
    assert math.isclose(logs[0], -5000 * math.log(2))
    assert b.value(5000) == mpq(1, 2 ** 5000)


@given(st.lists(rationals, max_size=20), st.integers(1, 4))
def test_exact_p_norm_matches_sum(vals, p):
    x = SeqVector.from_values(vals)
    assert p_norm_pow(x, p) == sum(abs(v) ** p for v in vals)
    if any(vals):
        est = norm_estimate(x, p)
        assert math.isclose(est.value, float(sum(abs(v) ** p for v in vals)) ** (1 / p), rel_tol=1e-12)


def test_sup_norm_and_float_norm():
    x = SeqVector.from_values([0.5, -3.0, 2.0])
    assert sup_norm(x) == pytest.approx(3.0)
    assert p_norm(x, 2) == pytest.approx(math.sqrt(13.25))


def test_infinite_vector_without_certificate():
    x = SeqVector(generator=lambda lo, hi: [], default_horizon=10)
    with pytest.raises(CertificateError):
        p_norm(x, 2)


def test_generated_vector_with_tail_bound():
    # x_n = 2^-n, blocks of length 8 on demand
    def gen(lo, hi):
        start = lo - lo % 8
        return [ValueBlock(a, tuple(Fraction(1, 2 ** n) for n in range(a, a + 8)))
                for a in range(start, hi, 8)]
    x = SeqVector(generator=gen, tail_bound=lambda H, p: 2.0 ** (-p * H) / (1 - 2.0 ** -p),
                  default_horizon=64)
    est = norm_estimate(x, 2)
    assert est.lower <= math.sqrt(4 / 3) <= est.upper
    assert est.upper - est.lower < 1e-12


@given(st.lists(rationals, min_size=1, max_size=15), st.sets(st.integers(0, 20)))
def test_restrict(vals, S):
    x = SeqVector.from_values(vals)
    L = len(vals)
    got = restrict(x, S).materialize(L) if S else [0] * L
    assert got == [v if i in S else 0 for i, v in enumerate(vals)]


@given(st.lists(rationals, max_size=10), st.lists(rationals, max_size=10), rationals, rationals)
def test_combine(xs, ys, a, b):
    x, y = SeqVector.from_values(xs), SeqVector.from_values(ys)
    L = max(len(xs), len(ys))
    pad = lambda v: v + [0] * (L - len(v))  # noqa: E731
    assert combine([(a, x), (b, y)]).materialize(L) == [a * u + b * v for u, v in zip(pad(xs), pad(ys))]


def test_cylinder_is_open():
    U = Cylinder.around([1, 0], 1, Fraction(1, 2))
    assert U.contains([Fraction(3, 2) - Fraction(1, 10 ** 9), 0])
    assert not U.contains([Fraction(3, 2), 0])
    with pytest.raises(ValueError):
        Cylinder((0,), 0)


def test_floats_agree_with_exact():
    vals = [Fraction(1, 3), 0, Fraction(-7, 2)]
    assert np.allclose(SeqVector.from_values(vals).floats(3), [float(v) for v in vals])
