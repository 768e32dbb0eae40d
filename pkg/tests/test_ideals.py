from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shiftlab.ideals import (
    Cardinality,
    DensitySup,
    DyadicSup,
    GeneratedLscsm,
    Harmonic,
    HorizonError,
    IdealSpec,
    MuN,
    NatSet,
    Verdict,
    density_trace,
    exhaustive_norm_estimate,
    in_ideal_at_horizon,
    log_density_estimate,
    lower_density_estimate,
    mu_n,
    upper_density_estimate,
)

evens = NatSet.rule(lambda n: n % 2 == 0, lambda N: np.arange(N + 1) % 2 == 0, name="evens")
full = NatSet.rule(lambda n: True, lambda N: np.ones(N + 1, dtype=np.uint8), name="full")
squares = NatSet.rule(lambda n: int(n ** 0.5 + 0.5) ** 2 == n, name="squares")


def interval_union(N):
    return NatSet.explicit([n for n in range(1, N + 1) if (n.bit_length() - 1) % 2 == 0], horizon=N)


def brute_mu(elems, n):
    return Fraction(sum(1 for e in elems if e <= n), n + 1)


# --- mu_n ---------------------------------------------------------------------

def test_mu_n_examples():
    assert mu_n(NatSet.explicit([]), 9) == 0
    assert mu_n(NatSet.explicit([0, 2, 4, 6, 8]), 9) == Fraction(5, 10)
    assert mu_n(NatSet.explicit([0, 1, 2, 3]), 3) == 1


def test_mu_n_insufficient_horizon():
    S = NatSet.explicit([1, 2], horizon=5)
    with pytest.raises(HorizonError, match="insufficient horizon"):
        mu_n(S, 6)


@given(st.sets(st.integers(0, 200), max_size=40), st.integers(0, 250))
def test_mu_n_matches_direct_count(elems, n):
    assert mu_n(NatSet.explicit(elems), n) == brute_mu(elems, n)


# --- density estimates ----------------------------------------------------------

def test_evens_density():
    assert abs(upper_density_estimate(evens, 10 ** 4) - Fraction(1, 2)) < Fraction(1, 100)
    assert abs(lower_density_estimate(evens, 10 ** 4) - Fraction(1, 2)) < Fraction(1, 100)


def test_full_set_density_is_one():
    for N in (2, 17, 1000):
        assert upper_density_estimate(full, N) == 1


def test_interval_union_upper_and_lower():
    N = 2 ** 20
    S = interval_union(N)
    # oracle: sweep mu_n directly over the tail window in pure Python
    elems = S.elements(N).tolist()
    count, best, worst = 0, Fraction(0), Fraction(1)
    it = iter(elems)
    nxt = next(it, None)
    for n in range(N + 1):
        while nxt is not None and nxt <= n:
            count += 1
            nxt = next(it, None)
        if n >= (N + 1) // 2:
            v = Fraction(count, n + 1)
            best, worst = max(best, v), min(worst, v)
    assert upper_density_estimate(S, N) == best
    assert lower_density_estimate(S, N) == worst
    assert abs(best - Fraction(2, 3)) < 0.05
    assert abs(worst - Fraction(1, 3)) < 0.05


def test_finite_set_density_vanishes():
    S = NatSet.explicit(range(10))
    for N in (100, 1000, 10000):
        assert upper_density_estimate(S, N) <= Fraction(10, N // 2 + 1)


def test_density_needs_horizon_two():
    with pytest.raises(ValueError):
        upper_density_estimate(evens, 1)


@given(st.sets(st.integers(0, 300), max_size=60), st.integers(2, 400))
def test_lower_le_upper(elems, N):
    S = NatSet.explicit(elems)
    assert lower_density_estimate(S, N) <= upper_density_estimate(S, N)


@given(st.sets(st.integers(0, 100), min_size=1, max_size=30))
def test_upper_bound_for_finite_sets(elems):
    S = NatSet.explicit(elems)
    N = 2 * max(elems) + 2
    assert upper_density_estimate(S, N) <= Fraction(len(elems), N // 2 + 1)


def test_density_trace_fields():
    tr = density_trace(evens, 100)
    assert tr.mu(9) == Fraction(5, 10)
    assert tr.running_sup == 1
    assert tr.window == (50, 100)
    assert all(0 <= v <= 1 for v in tr.values)


def test_log_density_of_evens_and_full():
    assert log_density_estimate(full, 1000) == pytest.approx(1.0)
    assert 0.4 < log_density_estimate(evens, 10 ** 5) < 0.5


# --- submeasures ------------------------------------------------------------------

GENS = [NatSet.rule(lambda n, k=k: n % k == 0) for k in (2, 3)]
LSCSMS = [Cardinality(), DensitySup(), DyadicSup(), Harmonic(exact=True), MuN(20), GeneratedLscsm(GENS)]
subsets = st.sets(st.integers(0, 64), max_size=30)


@pytest.mark.parametrize("phi", LSCSMS, ids=repr)
def test_empty_set_is_null(phi):
    assert phi(set()) == 0


@pytest.mark.parametrize("phi", LSCSMS, ids=repr)
@given(A=subsets, B=subsets)
def test_monotone_and_subadditive(phi, A, B):
    assert phi(A) <= phi(A | B)
    assert phi(A | B) <= phi(A) + phi(B)


@given(A=subsets, B=subsets)
def test_float_harmonic_within_slack(A, B):
    phi = Harmonic()
    assert phi(A | B) <= phi(A) + phi(B) + 1e-12


@given(st.sets(st.integers(0, 64), min_size=1, max_size=30))
def test_density_sup_matches_brute_force(A):
    assert DensitySup()(A) == max(brute_mu(A, n) for n in range(65))


@given(st.sets(st.integers(1, 200), min_size=1, max_size=40))
def test_dyadic_sup_matches_brute_force(A):
    expect = max(Fraction(sum(1 for a in A if 2 ** k <= a < 2 ** (k + 1)), 2 ** k) for k in range(9))
    assert DyadicSup()(A) == expect


def test_exhaustive_norm_examples():
    phi = DensitySup()
    assert exhaustive_norm_estimate(phi, NatSet.explicit([1, 5, 9]), 10, 100) == 0
    assert abs(exhaustive_norm_estimate(phi, evens, 100, 10 ** 4) - Fraction(1, 2)) < Fraction(2, 100)
    assert exhaustive_norm_estimate(Harmonic(), full, 10, 10 ** 5) >= 2


@given(st.sets(st.integers(0, 300), max_size=50), st.integers(0, 150), st.integers(0, 150))
def test_exhaustive_norm_nonincreasing_in_cut(elems, m1, m2):
    S = NatSet.explicit(elems)
    lo, hi = sorted((m1, m2))
    phi = DensitySup()
    assert exhaustive_norm_estimate(phi, S, hi, 300) <= exhaustive_norm_estimate(phi, S, lo, 300)


# --- ideals ------------------------------------------------------------------------

def test_in_ideal_examples():
    assert in_ideal_at_horizon(IdealSpec.density_zero(), evens, 10 ** 4, Fraction(1, 10)) is Verdict.POSITIVE
    assert in_ideal_at_horizon(IdealSpec.fin(), NatSet.explicit(range(10)), 10 ** 4,
                               Fraction(1, 1000)) is Verdict.IN_IDEAL
    assert in_ideal_at_horizon(IdealSpec.summable(), squares, 10 ** 6, Fraction(1, 100)) is Verdict.IN_IDEAL


def test_summable_oracle_partial_sum():
    # sum over the nonzero squares k^2 of 1/(k^2 + 1)
    total = sum(1.0 / (k * k + 1) for k in range(1, 1001))
    assert total < 1.08


def test_countably_generated_membership():
    ideal = IdealSpec.countably_generated([evens])
    assert in_ideal_at_horizon(ideal, evens, 1000, Fraction(1, 10)) is Verdict.IN_IDEAL
    odds = NatSet.rule(lambda n: n % 2 == 1)
    assert in_ideal_at_horizon(ideal, odds, 1000, Fraction(1, 10)) is Verdict.POSITIVE


def test_countably_generated_needs_generator():
    with pytest.raises(ValueError):
        IdealSpec.countably_generated([])


def test_delta_must_be_positive():
    with pytest.raises(ValueError):
        in_ideal_at_horizon(IdealSpec.fin(), evens, 10, 0)


def test_exh_classifications_agree_for_density_and_dyadic():
    # both submeasures give the density zero ideal as Exh(.)
    corpus = [evens, full, squares, NatSet.explicit(range(10)), interval_union(2 ** 14),
              NatSet.rule(lambda n: n % 7 == 3)]
    N = 2 ** 14
    for S in corpus:
        a = in_ideal_at_horizon(IdealSpec.exh_of(DensitySup()), S, N, Fraction(1, 10))
        b = in_ideal_at_horizon(IdealSpec.exh_of(DyadicSup()), S, N, Fraction(1, 10))
        assert (a is Verdict.POSITIVE) == (b is Verdict.POSITIVE), S
