"""Weight sequences for backward shifts, with exact and log-domain products."""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpq

__all__ = [
    "WeightSequence",
    "Constant",
    "FRatio",
    "Explicit",
    "RuleWeights",
    "to_exact",
    "is_exact_value",
]

EXACT_TYPES = (int, Fraction, type(mpq(0)))


def is_exact_value(v) -> bool:
    return isinstance(v, EXACT_TYPES) and not isinstance(v, bool)


def to_exact(v):
    """int/Fraction/mpq -> mpq.  Floats are rejected: exactness is never guessed."""
    if isinstance(v, float):
        raise TypeError("float value in exact arithmetic")
    return mpq(v)


class WeightSequence:
    """n -> w_n, nonzero.  ``exact`` sequences return ``mpq`` values and products."""

    exact: bool = False
    name: str = "weights"
    bound = None  # declared sup_n |w_n| (used as the operator norm of the shift)

    def __init__(self):
        self._lock = threading.Lock()
        self._logc = np.zeros(1)
        self._negc = np.zeros(1, dtype=np.int64)

    # single weights -------------------------------------------------------

    def weight(self, n: int):
        raise NotImplementedError

    def _log_abs(self, lo: int, hi: int) -> np.ndarray:
        """log|w_n| for n in [lo, hi)."""
        return np.array([math.log(abs(float(self.weight(n)))) for n in range(lo, hi)])

    def _negative(self, lo: int, hi: int) -> np.ndarray:
        return np.array([self.weight(n) < 0 for n in range(lo, hi)], dtype=bool)

    # cached prefix sums -----------------------------------------------------

    def log_cumsum(self, M: int) -> np.ndarray:
        """C with C[m] = sum_{i<m} log|w_i| for m in [0, M]."""
        if self._logc.size <= M:
            self._grow(M)
        return self._logc

    def neg_cumsum(self, M: int) -> np.ndarray:
        """Number of negative weights among w_0..w_{m-1}, for m in [0, M]."""
        if self._negc.size <= M:
            self._grow(M)
        return self._negc

    def _grow(self, M: int) -> None:
        with self._lock:
            have = self._logc.size - 1
            if have >= M:
                return
            target = max(M, 2 * have, 1024)
            logs = self._log_abs(have, target)
            negs = self._negative(have, target).astype(np.int64)
            # build fresh arrays so concurrent readers never see a partial update
            self._logc = np.concatenate([self._logc, self._logc[-1] + np.cumsum(logs)])
            self._negc = np.concatenate([self._negc, self._negc[-1] + np.cumsum(negs)])

    # products -------------------------------------------------------------

    def log_product(self, n: int, k: int) -> float:
        """log|w_n ... w_k| (0 for the empty product k = n - 1)."""
        if k < n:
            return 0.0
        C = self.log_cumsum(k + 1)
        return float(C[k + 1] - C[n])

    def product_sign(self, n: int, k: int) -> int:
        if k < n:
            return 1
        N = self.neg_cumsum(k + 1)
        return -1 if (N[k + 1] - N[n]) % 2 else 1

    def _exact_product(self, n: int, k: int):
        out = mpq(1)
        for i in range(n, k + 1):
            out *= self.weight(i)
        return out

    def product(self, n: int, k: int):
        """w_n w_{n+1} ... w_k, exact for exact sequences; the empty product is 1."""
        if k < n:
            return mpq(1) if self.exact else 1.0
        if self.exact:
            return self._exact_product(n, k)
        return self.product_sign(n, k) * math.exp(self.log_product(n, k))

    def min_weight(self, M: int) -> float:
        """min_{n <= M} w_n as a float (for the w_n >= 1 hypothesis)."""
        return float(min(float(self.weight(n)) for n in range(M + 1)))

    def check_bound(self, samples: Sequence[int]) -> bool:
        if self.bound is None:
            return False
        return all(abs(float(self.weight(n))) <= float(self.bound) + 1e-12 for n in samples)

    def tail_constant(self):
        """lambda if w_n = lambda for all large n, else None."""
        return None

    def describe(self) -> str:
        return self.name


def weight_product(w: WeightSequence, n: int, k: int):
    """w~_{n,k} = w_n ... w_k; requires n <= k."""
    if n > k:
        raise ValueError(f"weight_product needs n <= k, got n={n}, k={k}")
    return w.product(n, k)


class Constant(WeightSequence):
    def __init__(self, lam):
        super().__init__()
        if lam == 0:
            raise ValueError("weights must be nonzero")
        self.exact = is_exact_value(lam)
        self.lam = to_exact(lam) if self.exact else float(lam)
        self.bound = abs(self.lam)
        self.name = f"constant:{lam}"

    def weight(self, n):
        return self.lam

    def _log_abs(self, lo, hi):
        return np.full(hi - lo, math.log(abs(float(self.lam))))

    def _negative(self, lo, hi):
        return np.full(hi - lo, self.lam < 0, dtype=bool)

    def _exact_product(self, n, k):
        return self.lam ** (k - n + 1)

    def tail_constant(self):
        return self.lam


class FRatio(WeightSequence):
    """w_n = f(n+1)/f(n) with f(n) = ((n+2) log(n+2))^(1/p)."""

    def __init__(self, p: float):
        super().__init__()
        if p < 1:
            raise ValueError("p must lie in [1, inf)")
        self.p = p
        self.name = f"fratio:{p}"
        self.bound = self.weight(0)

    def f(self, n: int) -> float:
        return ((n + 2) * math.log(n + 2)) ** (1.0 / self.p)

    def log_f(self, n):
        n = np.asarray(n, dtype=np.float64)
        return (np.log(n + 2) + np.log(np.log(n + 2))) / self.p

    def weight(self, n):
        ratio = ((n + 3) * math.log(n + 3)) / ((n + 2) * math.log(n + 2))
        return ratio ** (1.0 / self.p)

    def _log_abs(self, lo, hi):
        n = np.arange(lo, hi, dtype=np.float64)
        return self.log_f(n + 1) - self.log_f(n)

    def _negative(self, lo, hi):
        return np.zeros(hi - lo, dtype=bool)

    def _grow(self, M):
        # telescoping closed form: C[m] = log f(m) - log f(0)
        with self._lock:
            if self._logc.size > M:
                return
            target = max(M, 2 * (self._logc.size - 1), 1024)
            m = np.arange(target + 1, dtype=np.float64)
            self._logc = self.log_f(m) - self.log_f(0)
            self._negc = np.zeros(target + 1, dtype=np.int64)


class Explicit(WeightSequence):
    """Listed weights w_0..w_{L-1}, then a constant tail."""

    def __init__(self, values: Sequence, tail=1):
        super().__init__()
        if any(v == 0 for v in values) or tail == 0:
            raise ValueError("weights must be nonzero")
        self.exact = all(is_exact_value(v) for v in values) and is_exact_value(tail)
        conv = to_exact if self.exact else float
        self.values = tuple(conv(v) for v in values)
        self.tail = conv(tail)
        self.bound = max([abs(v) for v in self.values] + [abs(self.tail)])
        self.name = f"explicit:{len(self.values)}+tail={tail}"

    def weight(self, n):
        return self.values[n] if n < len(self.values) else self.tail

    def _exact_product(self, n, k):
        L = len(self.values)
        out = mpq(1)
        for i in range(n, min(k, L - 1) + 1):
            out *= self.values[i]
        if k >= L:
            out *= self.tail ** (k - max(n, L) + 1)
        return out

    def tail_constant(self):
        return self.tail


class RuleWeights(WeightSequence):
    """w_n = rule(n).  Exact rules get a cached exact prefix-product table."""

    def __init__(self, rule: Callable[[int], object], exact: bool, bound=None, name: str = "rule",
                 tail_constant=None):
        super().__init__()
        self.rule = rule
        self.exact = exact
        self.bound = bound
        self.name = name
        self._tail = tail_constant
        self._prefix = [mpq(1)]

    def weight(self, n):
        v = self.rule(n)
        if v == 0:
            raise ValueError(f"weight w_{n} is zero")
        return to_exact(v) if self.exact else float(v)

    def _exact_product(self, n, k):
        with self._lock:
            while len(self._prefix) <= k + 1:
                i = len(self._prefix) - 1
                self._prefix.append(self._prefix[-1] * self.weight(i))
            pref = self._prefix
        return pref[k + 1] / pref[n]

    def tail_constant(self):
        return self._tail
