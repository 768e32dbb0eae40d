import math
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from shiftlab.weights import Constant, Explicit, FRatio, RuleWeights, to_exact, weight_product

nonzero = st.fractions(min_value=-5, max_value=5, max_denominator=7).filter(lambda v: v != 0)


def direct_product(w, n, k):
    out = Fraction(1)
    for i in range(n, k + 1):
        v = w.weight(i)
        out *= Fraction(int(v.numerator), int(v.denominator))
    return out


def as_fraction(v):
    return Fraction(int(v.numerator), int(v.denominator))


def test_zero_weights_rejected():
    with pytest.raises(ValueError):
        Constant(0)
    with pytest.raises(ValueError):
        Explicit([1, 0])
    with pytest.raises(ValueError):
        RuleWeights(lambda n: n, exact=True).weight(0)


def test_float_never_enters_exact_arithmetic():
    with pytest.raises(TypeError):
        to_exact(0.5)


def test_weight_product_requires_ordered_indices():
    with pytest.raises(ValueError):
        weight_product(Constant(2), 3, 2)


def test_constant_products():
    assert weight_product(Constant(2), 1, 10) == 2 ** 10
    assert Constant(Fraction(3, 2)).product(0, 1) == mpq(9, 4)
    assert Constant(2).product(5, 4) == 1


@given(st.lists(nonzero, min_size=1, max_size=10), nonzero, st.integers(0, 15), st.integers(0, 15))
def test_explicit_product_matches_direct_product(vals, tail, n, span):
    w = Explicit(vals, tail)
    assert w.exact
    assert as_fraction(weight_product(w, n, n + span)) == direct_product(w, n, n + span)


@given(st.lists(nonzero, min_size=1, max_size=10), st.integers(0, 12), st.integers(0, 12))
def test_log_product_and_sign_agree_with_exact(vals, n, span):
    w = Explicit(vals, Fraction(3, 2))
    exact = weight_product(w, n, n + span)
    assert w.product_sign(n, n + span) == (1 if exact > 0 else -1)
    assert math.isclose(w.log_product(n, n + span), math.log(abs(float(exact))), abs_tol=1e-9)


@given(st.integers(0, 40), st.integers(0, 40))
def test_rule_weights_prefix_table(n, span):
    w = RuleWeights(lambda i: Fraction(i + 2, i + 1), exact=True)
    # telescopes to (n + span + 2) / (n + 1)
    assert as_fraction(w.product(n, n + span)) == Fraction(n + span + 2, n + 1)


@pytest.mark.parametrize("p", [1, 2, 3.5])
def test_fratio_closed_form(p):
    w = FRatio(p)
    for n in (0, 1, 10, 1000, 10 ** 5):
        assert math.isclose(w.product(0, n), w.f(n + 1) / w.f(0), rel_tol=1e-9)
    # the cumulative table and single weights describe the same sequence
    direct = math.fsum(math.log(w.weight(i)) for i in range(500))
    assert math.isclose(w.log_product(0, 499), direct, rel_tol=1e-10)


def test_fratio_properties():
    w = FRatio(2)
    vals = [w.weight(n) for n in range(2000)]
    assert all(v > 1 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert w.weight(10 ** 5) - 1 < 1e-4
    with pytest.raises(ValueError):
        FRatio(0.5)


def test_bound_and_tail():
    w = Explicit([3, Fraction(1, 2)], tail=2)
    assert w.bound == 3 and w.tail_constant() == 2
    assert w.check_bound(range(10))
    assert Constant(-2).product_sign(0, 2) == -1
