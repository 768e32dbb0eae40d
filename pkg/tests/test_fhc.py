import math
from fractions import Fraction

import numpy as np
import pytest

from shiftlab.constructions.fhc import FHCError, fhc_schedule
from shiftlab.constructions.targets import TargetEnumeration
from shiftlab.ideals import lower_density_estimate, mu_n
from shiftlab.sequences import Cylinder, norm_estimate
from shiftlab.shifts import orbit_visits, shift_apply
from shiftlab.weights import Constant, FRatio

N = 10 ** 5


@pytest.fixture(scope="module")
def fhc():
    w, tg = Constant(2), TargetEnumeration()
    return w, tg, fhc_schedule(tg, w, p=2, T=3, k_max=2)


def test_visit_densities_positive(fhc):
    w, tg, y = fhc
    for i in range(3):
        U = Cylinder.around(tg.padded(i, 3), 2, Fraction(1, 100))
        visits = orbit_visits(w, y, U, N)
        est = lower_density_estimate(visits, N)
        c, n_min = y.density_bound(i)
        assert est > 0
        assert est >= c and N >= n_min


def test_slot_starts_are_exact_visits(fhc):
    w, tg, y = fhc
    for i in range(3):
        for q in y.slot_starts(i, 2000)[:20]:
            got = shift_apply(w, y, int(q), y.period, exact=True)
            assert list(got) == list(tg.padded(i, y.period))


def test_zero_target_density(fhc):
    w, tg, y = fhc
    U = Cylinder.around(tg.padded(0, 3), 2, Fraction(1, 1000))
    visits = orbit_visits(w, y, U, N)
    starts = y.slot_starts(0, N)
    assert set(starts.tolist()) <= set(visits.elements(N).tolist())
    assert mu_n(visits, N) >= y.slot_density(0) * Fraction(9, 10)


@pytest.mark.parametrize("assignment", ["ruler", "round_robin"])
def test_slot_densities_against_counting(assignment):
    y = fhc_schedule(TargetEnumeration(), Constant(2), T=4, assignment=assignment)
    M = 4096 * y.period
    total = Fraction(0)
    for i in range(4):
        count = len(y.slot_starts(i, M - 1))
        # counting density over [0, M) converges to the declared one
        assert abs(Fraction(count, M) - y.slot_density(i)) < Fraction(1, 500)
        total += y.slot_density(i)
    assert total == Fraction(1, y.period)


def test_density_bound_holds_on_every_prefix():
    y = fhc_schedule(TargetEnumeration(), Constant(2), T=3)
    for i in range(3):
        c, n_min = y.density_bound(i)
        starts = y.slot_starts(i, 20000)
        counts = np.cumsum(np.isin(np.arange(20001), starts))
        for n in range(n_min // 2, 20001, 7):
            assert Fraction(int(counts[n]), n + 1) >= c


def test_norm_certificate(fhc):
    _, _, y = fhc
    est = norm_estimate(y, 2)
    assert math.isfinite(est.upper)
    assert est.lower <= est.value <= est.upper
    assert est.upper - est.lower < 1e-12
    assert math.isfinite(norm_estimate(y, math.inf).upper)


@pytest.mark.parametrize("w", [Constant(1), Constant(Fraction(1, 2)), FRatio(2)])
def test_no_certificate_without_convergence(w):
    with pytest.raises(FHCError, match="no FHC certificate"):
        fhc_schedule(TargetEnumeration(), w)


def test_bad_arguments():
    with pytest.raises(ValueError):
        fhc_schedule(TargetEnumeration(), Constant(2), assignment="zigzag")
    with pytest.raises(ValueError):
        fhc_schedule(TargetEnumeration(), Constant(2), T=0)
