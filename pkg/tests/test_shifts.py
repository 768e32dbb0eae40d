import csv
import math
from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from shiftlab.ideals import IdealSpec
from shiftlab.sequences import Cylinder, RescaledBlock, SeqVector, restrict, p_norm
from shiftlab.shifts import (
    Classification,
    ClusterEvidence,
    bayart_ruzsa_report,
    cluster_point_check,
    orbit_coordinates,
    orbit_deviation,
    orbit_visits,
    shift_apply,
    write_orbit_csv,
)
from shiftlab.weights import Constant, Explicit, FRatio, RuleWeights, weight_product

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=6)
weights_lists = st.lists(rationals.filter(lambda v: v != 0), min_size=1, max_size=8)


def fr(v):
    return Fraction(int(v.numerator), int(v.denominator))


def definition_orbit(wvals, tail, xs, n, L):
    """(T^n x)_j by iterating (T x)_j = w_{j+1} x_{j+1} n times on lists of Fractions."""
    w = lambda i: wvals[i] if i < len(wvals) else tail  # noqa: E731
    cur = list(xs) + [Fraction(0)] * (n + L)
    for _ in range(n):
        cur = [w(j + 1) * cur[j + 1] for j in range(len(cur) - 1)]
    return cur[:L]


@given(weights_lists, rationals.filter(lambda v: v != 0), st.lists(rationals, min_size=1, max_size=15),
       st.integers(0, 10), st.integers(1, 6))
def test_shift_matches_iterated_definition(wvals, tail, xs, n, L):
    w = Explicit(wvals, tail)
    got = [fr(v) for v in shift_apply(w, SeqVector.from_values(xs), n, L, exact=True)]
    assert got == definition_orbit(wvals, tail, xs, n, L)


@given(weights_lists, st.lists(rationals, min_size=1, max_size=15), st.integers(0, 10), st.integers(1, 6))
def test_float_mode_tracks_exact_mode(wvals, xs, n, L):
    w, x = Explicit(wvals, Fraction(3, 2)), SeqVector.from_values(xs)
    exact = shift_apply(w, x, n, L, exact=True)
    approx = shift_apply(w, x, n, L, exact=False)
    assert all(math.isclose(float(e), a, rel_tol=1e-9, abs_tol=1e-300) for e, a in zip(exact, approx))


@given(weights_lists, st.lists(rationals, max_size=12), st.lists(rationals, max_size=12), rationals,
       rationals, st.integers(0, 8), st.integers(1, 5))
def test_linearity(wvals, xs, ys, a, b, n, L):
    w = Explicit(wvals, 2)
    x, y = SeqVector.from_values(xs), SeqVector.from_values(ys)
    size = max(len(xs), len(ys))
    pad = lambda v: v + [Fraction(0)] * (size - len(v))  # noqa: E731
    z = SeqVector.from_values([a * u + b * v for u, v in zip(pad(xs), pad(ys))])
    lhs = shift_apply(w, z, n, L, exact=True)
    tx, ty = shift_apply(w, x, n, L, exact=True), shift_apply(w, y, n, L, exact=True)
    assert lhs == [a * u + b * v for u, v in zip(tx, ty)]


@given(weights_lists, st.lists(rationals, min_size=1, max_size=15), st.integers(0, 6), st.integers(0, 6),
       st.integers(1, 5))
def test_semigroup(wvals, xs, n, m, L):
    w, x = Explicit(wvals, 2), SeqVector.from_values(xs)
    inner = SeqVector.from_values(shift_apply(w, x, n, m + L, exact=True))
    assert shift_apply(w, inner, m, L, exact=True) == shift_apply(w, x, n + m, L, exact=True)
    # the coordinate form: (T^{m+n} x)_j = w~_{1+j, m+j} (T^n x)_{m+j}
    if m:
        Tn = shift_apply(w, x, n, m + L, exact=True)
        Tnm = shift_apply(w, x, n + m, L, exact=True)
        assert all(Tnm[j] == weight_product(w, 1 + j, m + j) * Tn[m + j] for j in range(L))


@given(weights_lists, st.integers(0, 10), st.integers(0, 10), st.integers(0, 10))
def test_telescoping(wvals, n, a, b):
    w = Explicit(wvals, Fraction(1, 3))
    k, l = n + a, n + a + 1 + b
    assert weight_product(w, n, k) * weight_product(w, k + 1, l) == weight_product(w, n, l)


@given(st.lists(rationals, min_size=1, max_size=20), st.sets(st.integers(0, 25)))
def test_norm_monotone_under_restriction(xs, S):
    x = SeqVector.from_values(xs)
    if S and any(xs[i] for i in S if i < len(xs)):
        assert p_norm(restrict(x, S), 2) <= p_norm(x, 2) * (1 + 1e-12)


def test_unit_vector_orbit():
    # T^n e_n = w_1 ... w_n e_0
    w = Constant(2)
    assert shift_apply(w, SeqVector.unit(5), 5, 2) == [mpq(32), mpq(0)]


# --- Bayart-Ruzsa ---------------------------------------------------------------------------


@pytest.mark.parametrize("lam,verdict", [(0.5, Classification.DIVERGENT), (1, Classification.DIVERGENT),
                                         (1.01, Classification.CONVERGENT), (2, Classification.CONVERGENT)])
def test_classifier_constant(lam, verdict):
    assert bayart_ruzsa_report(Constant(lam), 2, 100).classification is verdict


@pytest.mark.parametrize("p", [1, 2])
def test_classifier_fratio(p):
    assert bayart_ruzsa_report(FRatio(p), p, 100).classification is Classification.DIVERGENT


def test_partial_sums_against_geometric_series():
    # sum_{n<=N} 2^{-2(n+1)} = (1 - 4^{-(N+1)}) / 3
    rep = bayart_ruzsa_report(Constant(2), 2, 40)
    assert math.isclose(rep.partial_sum, (1 - 4.0 ** -41) / 3, rel_tol=1e-14)


def test_partial_sums_fratio_against_closed_form():
    w, N = FRatio(2), 1000
    direct = math.fsum(w.f(0) ** 2 / w.f(n + 1) ** 2 for n in range(N + 1))
    assert math.isclose(bayart_ruzsa_report(w, 2, N).partial_sum, direct, rel_tol=1e-9)


def test_overflowing_partial_sum_is_infinite():
    assert bayart_ruzsa_report(Constant(0.5), 2, 10 ** 4).partial_sum == math.inf


def test_explicit_tail_and_rule_classification():
    assert bayart_ruzsa_report(Explicit([Fraction(1, 2)] * 5, 3), 1, 10).classification is Classification.CONVERGENT
    rule = RuleWeights(lambda n: 2, exact=True)
    assert bayart_ruzsa_report(rule, 2, 10).classification is Classification.UNKNOWN


# --- visits -------------------------------------------------------------------------------


def test_visit_modes_agree_on_exact_input():
    w = Constant(2)
    # x_n = 2^-n on [1, 40): every orbit point has coordinate 0 equal to 1 or 0
    x = SeqVector([RescaledBlock(1, 39, (1,), w, tile=1)])
    U = Cylinder.around([1], 0, Fraction(1, 4))
    float_hits = orbit_visits(w, x, U, 50).elements(50)
    exact_hits = orbit_visits(w, x, U, 50, mode="exact").elements(50)
    assert list(float_hits) == list(exact_hits) == list(range(1, 40))


def test_boundary_hits_are_not_visits():
    w = Constant(1)
    x = SeqVector.from_values([Fraction(1, 2)])
    U = Cylinder.around([0], 0, Fraction(1, 2))
    for mode in ("float", "boundary", "exact"):
        assert len(orbit_visits(w, x, U, 0, mode=mode).elements(0)) == 0


def test_exact_modes_need_exact_input():
    with pytest.raises(ValueError):
        orbit_visits(Constant(2.0), SeqVector.from_values([1]), Cylinder((0,), 1), 5, mode="exact")


def test_orbit_coordinates_and_deviation():
    w = Explicit([1, 2, -3], tail=Fraction(1, 2))
    xs = [Fraction(1), Fraction(-2), Fraction(5), Fraction(7), Fraction(1, 3)]
    x = SeqVector.from_values(xs)
    N, k = 6, 2
    coords = orbit_coordinates(w, x, N, k)
    for n in range(N + 1):
        expect = [float(v) for v in definition_orbit([1, 2, -3], Fraction(1, 2), xs, n, k + 1)]
        assert np.allclose(coords[n], expect, rtol=1e-12, atol=0)
    dev = orbit_deviation(w, x, [0, 0, 0], N)
    assert np.allclose(dev, np.abs(coords).max(axis=1))


def test_cluster_check_on_unit_orbit():
    w = Constant(2)
    # x_n = 2^-n: T^n x has coordinate 0 equal to 1 for every n >= 1
    x = SeqVector([RescaledBlock(1, 3000, (1,), w, tile=1)])
    ev = cluster_point_check(w, x, [1], 0, Fraction(1, 10), IdealSpec.density_zero(), 2000, 0.01)
    assert ev is ClusterEvidence.IS_CLUSTER
    far = cluster_point_check(w, x, [5], 0, Fraction(1, 10), IdealSpec.density_zero(), 2000, 0.01)
    assert far is not ClusterEvidence.IS_CLUSTER


def test_orbit_csv(tmp_path):
    w = Constant(2)
    x = SeqVector([RescaledBlock(1, 9, (1,), w, tile=1)])
    path = tmp_path / "orbit.csv"
    visits = write_orbit_csv(path, w, x, Cylinder.around([1, Fraction(1, 2)], 1, Fraction(1, 8)), 12)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["n", "x0", "x1", "in_U"]
    assert len(rows) == 14
    # (T^n x)_j = 2^-j exactly while 1 <= n and n + 1 <= 9
    assert visits == 8
