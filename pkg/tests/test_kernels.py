import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shiftlab import _kernels
from shiftlab._kernels import pure

compiled = _kernels.compiled
needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def random_inputs(rng, M, neg_rate=0.3, zero_rate=0.2):
    logw = rng.normal(0.05, 0.3, M)
    neg = rng.random(M) < neg_rate
    C = np.concatenate([[0.0], np.cumsum(logw)])
    Ng = np.concatenate([[0], np.cumsum(neg)]).astype(np.int64)
    sign = np.where(rng.random(M) < zero_rate, 0, np.where(rng.random(M) < 0.5, -1, 1)).astype(np.int8)
    logs = np.where(sign == 0, -np.inf, rng.normal(-1.0, 2.0, M))
    return C, Ng, sign, logs


@needs_compiled
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 200), st.integers(1, 4))
def test_orbit_kernels_agree(seed, N, k):
    rng = np.random.default_rng(seed)
    C, Ng, sign, logs = random_inputs(rng, N + k + 2)
    centers = rng.normal(0, 1, k)
    dev_c = compiled.orbit_deviation(C, Ng, sign, logs, centers, N)
    dev_p = pure.orbit_deviation(C, Ng, sign, logs, centers, N)
    assert np.allclose(dev_c, dev_p, rtol=1e-12, atol=0)
    for r in (0.1, 1.0, 3.0):
        assert np.array_equal(compiled.orbit_visit_mask(C, Ng, sign, logs, centers, r, N),
                              pure.orbit_visit_mask(C, Ng, sign, logs, centers, r, N))


@needs_compiled
@given(st.lists(st.booleans(), min_size=1, max_size=300), st.data())
def test_window_extrema_agree(bits, data):
    counts = np.cumsum(np.array(bits, dtype=np.int64))
    lo = data.draw(st.integers(0, len(bits) - 1))
    hi = data.draw(st.integers(lo, len(bits) - 1))
    assert compiled.window_extrema(counts, lo, hi) == pure.window_extrema(counts, lo, hi)


@given(st.lists(st.booleans(), min_size=1, max_size=200))
def test_window_extrema_against_fractions(bits):
    from fractions import Fraction
    counts = np.cumsum(np.array(bits, dtype=np.int64))
    ratios = [Fraction(int(c), n + 1) for n, c in enumerate(counts)]
    hi_i, lo_i = pure.window_extrema(counts, 0, len(bits) - 1)
    assert hi_i == ratios.index(max(ratios))
    assert lo_i == ratios.index(min(ratios))


def test_pure_backend_selected_by_env():
    code = "import shiftlab._kernels as k; print(k.BACKEND_NAME)"
    env = dict(os.environ, SHIFTLAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_backend_name_reflects_import():
    assert _kernels.BACKEND_NAME == ("cython" if compiled is not None else "numpy")
    assert importlib.import_module("shiftlab").BACKEND_NAME == _kernels.BACKEND_NAME
