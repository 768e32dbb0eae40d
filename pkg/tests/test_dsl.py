import math
from fractions import Fraction

import numpy as np
import pytest

from shiftlab.dsl import DSLError, parse_expr, parse_ideal, parse_number, parse_point, parse_set, parse_weights
from shiftlab.ideals import lower_density_estimate, upper_density_estimate
from shiftlab.weights import Constant, Explicit, FRatio


def test_parse_expr_parts():
    assert parse_expr("powers base=3") == ("powers", None, {"base": "3"})
    assert parse_expr("explicit:[1, 2, 3] tail=2") == ("explicit", "[1, 2, 3]", {"tail": "2"})
    assert parse_expr("constant:3/2") == ("constant", "3/2", {})
    with pytest.raises(DSLError):
        parse_expr("powers base=3 junk")
    with pytest.raises(DSLError):
        parse_expr(7)


def test_numbers():
    assert parse_number("3/4") == Fraction(3, 4)
    assert parse_number("-2") == Fraction(-2)
    assert parse_number("0.25") == 0.25 and isinstance(parse_number("0.25"), float)
    for bad in ("1/0", "abc"):
        with pytest.raises(DSLError):
            parse_number(bad)


@pytest.mark.parametrize("expr,oracle", [
    ("evens", lambda n: n % 2 == 0),
    ("odds", lambda n: n % 2 == 1),
    ("squares", lambda n: int(n ** 0.5 + 0.5) ** 2 == n),
    ("multiples:3", lambda n: n % 3 == 0),
    ("powers base=3", lambda n: n in {3 ** k for k in range(12)}),
    ("interval-union base=2", lambda n: n >= 1 and (n.bit_length() - 1) % 2 == 0),
    ("explicit:[0, 4, 9]", lambda n: n in (0, 4, 9)),
    ("full", lambda n: True),
    ("empty", lambda n: False),
])
def test_sets_membership_and_vector_agree(expr, oracle):
    S = parse_set(expr)
    N = 3000
    expect = np.array([oracle(n) for n in range(N + 1)])
    assert np.array_equal(S.indicator(N).astype(bool), expect)
    assert all((n in S) == expect[n] for n in range(0, N + 1, 37))


def test_interval_union_densities():
    S = parse_set("interval-union base=2")
    N = 2 ** 20
    assert abs(float(upper_density_estimate(S, N)) - 2 / 3) < 0.01
    assert abs(float(lower_density_estimate(S, N)) - 1 / 3) < 0.01


@pytest.mark.parametrize("bad", ["multiples:0", "powers base=1", "explicit:[-1]", "explicit", "nope",
                                 "evens:3", "evens k=2"])
def test_bad_sets(bad):
    with pytest.raises(DSLError):
        parse_set(bad)


def test_weights():
    w = parse_weights("constant:3/2")
    assert isinstance(w, Constant) and w.exact and w.lam == Fraction(3, 2)
    assert not parse_weights("constant:1.5").exact
    f = parse_weights("fratio p=3")
    assert isinstance(f, FRatio) and f.p == 3
    e = parse_weights("explicit:[2, 1/2] tail=3")
    assert isinstance(e, Explicit) and e.product(0, 2) == 3
    for bad in ("constant:0", "constant", "fratio p=0.5", "explicit:[0]", "explicit:[]", "weird"):
        with pytest.raises(DSLError):
            parse_weights(bad)


def test_points():
    assert parse_point("constant:1").prefix(3).prefix == (1, 1, 1)
    assert parse_point("diagonal").prefix(4).prefix == (0, 1, 2, 3)
    assert parse_point("sqrt-growth growth=2").name
    for bad in ("constant:-1", "constant", "spiral"):
        with pytest.raises(DSLError):
            parse_point(bad)


def test_ideals():
    for name in ("fin", "density-zero", "log-density-zero", "summable"):
        assert parse_ideal(name) is not None
    with pytest.raises(DSLError):
        parse_ideal("fin:3")
    with pytest.raises(DSLError):
        parse_ideal("maximal")
