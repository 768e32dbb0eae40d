"""Small expression language for sets, weights, points and ideals in config files.

Each expression is a head word, optionally followed by ``:payload`` or by
``key=value`` parameters::

    evens | odds | full | empty | squares
    multiples:3                 multiples of 3
    powers base=2               {1, 2, 4, 8, ...}
    interval-union base=2       union over k of [b^(2k), b^(2k+1))
    explicit:[0, 4, 9]

    constant:2 | constant:3/2   constant weights
    fratio p=2                  w_n = f(n+1)/f(n), f(n) = ((n+2) log(n+2))^(1/p)
    explicit:[2, 3] tail=2      listed weights, then a constant tail

    constant:1 | diagonal | sqrt-growth growth=2      points of the Baire space

    fin | density-zero | log-density-zero | summable  ideals
"""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction

import numpy as np

from .cantor import BaireRule
from .ideals import IdealSpec, NatSet
from .weights import Constant, Explicit, FRatio, WeightSequence

__all__ = ["DSLError", "parse_expr", "parse_set", "parse_weights", "parse_point", "parse_ideal",
           "parse_number"]


class DSLError(ValueError):
    pass


_HEAD = re.compile(r"\s*([a-z][a-z0-9-]*)\s*(?::\s*(.*?))?\s*((?:\s+[a-z_]+\s*=\s*\S+)*)\s*$")
_PARAM = re.compile(r"([a-z_]+)\s*=\s*(\S+)")


def parse_expr(text: str) -> tuple[str, str | None, dict[str, str]]:
    """Split ``head[:payload] [k=v ...]`` into its parts."""
    if not isinstance(text, str):
        raise DSLError(f"expected an expression string, got {type(text).__name__}")
    # the payload of explicit:[...] may contain spaces
    m = re.match(r"\s*([a-z][a-z0-9-]*)\s*:\s*(\[[^\]]*\])\s*(.*)$", text)
    if m:
        head, payload, rest = m.group(1), m.group(2), m.group(3)
    else:
        m = _HEAD.match(text)
        if not m:
            raise DSLError(f"cannot parse expression {text!r}")
        head, payload, rest = m.group(1), m.group(2), m.group(3) or ""
        if payload is not None and "=" in payload:
            raise DSLError(f"cannot parse expression {text!r}")
    params = dict(_PARAM.findall(rest))
    leftover = _PARAM.sub("", rest).strip()
    if leftover:
        raise DSLError(f"unexpected text {leftover!r} in {text!r}")
    return head, payload, params


def parse_number(text: str) -> Fraction | float:
    """Integers and ratios stay exact; decimals become binary64."""
    text = text.strip()
    if re.fullmatch(r"[+-]?\d+(/\d+)?", text):
        try:
            return Fraction(text)
        except ZeroDivisionError as exc:
            raise DSLError(f"zero denominator in {text!r}") from exc
    try:
        return float(text)
    except ValueError as exc:
        raise DSLError(f"not a number: {text!r}") from exc


def _int_param(params: dict, key: str, default: int | None = None, lo: int = 0) -> int:
    if key not in params:
        if default is None:
            raise DSLError(f"missing parameter {key}=")
        return default
    try:
        v = int(params[key])
    except ValueError as exc:
        raise DSLError(f"{key} must be an integer, got {params[key]!r}") from exc
    if v < lo:
        raise DSLError(f"{key} must be at least {lo}")
    return v


def _list_payload(payload: str | None) -> list:
    if payload is None:
        raise DSLError("explicit needs a list payload, e.g. explicit:[1, 2]")
    try:
        items = json.loads(payload)
    except json.JSONDecodeError:
        inner = payload.strip()[1:-1]
        items = [s for s in (p.strip() for p in inner.split(",")) if s]
    if not isinstance(items, list):
        raise DSLError("explicit payload must be a list")
    return items


def _no_params(head: str, params: dict) -> None:
    if params:
        raise DSLError(f"{head} takes no parameters")


# sets ------------------------------------------------------------------------


def _powers_mask(N: int, b: int) -> np.ndarray:
    out = np.zeros(N + 1, dtype=np.uint8)
    v = 1
    while v <= N:
        out[v] = 1
        v *= b
    return out


def _interval_union_mask(N: int, b: int) -> np.ndarray:
    out = np.zeros(N + 1, dtype=np.uint8)
    lo = 1
    while lo <= N:
        out[lo: min(lo * b, N + 1)] = 1
        lo *= b * b
    return out


def _in_interval_union(n: int, b: int) -> bool:
    if n < 1:
        return False
    # n in [b^(2k), b^(2k+1)) iff floor(log_b n) is even
    e = 0
    while n >= b:
        n //= b
        e += 1
    return e % 2 == 0


def parse_set(text: str) -> NatSet:
    head, payload, params = parse_expr(text)
    if head in ("evens", "odds", "full", "empty", "squares"):
        _no_params(head, params)
        if payload is not None:
            raise DSLError(f"{head} takes no payload")
    if head == "evens":
        return NatSet.rule(lambda n: n % 2 == 0, lambda N: (np.arange(N + 1) % 2 == 0), name="evens")
    if head == "odds":
        return NatSet.rule(lambda n: n % 2 == 1, lambda N: (np.arange(N + 1) % 2 == 1), name="odds")
    if head == "full":
        return NatSet.rule(lambda n: True, lambda N: np.ones(N + 1, dtype=np.uint8), name="full")
    if head == "empty":
        return NatSet.explicit([], name="empty")
    if head == "squares":
        def vec(N):
            out = np.zeros(N + 1, dtype=np.uint8)
            out[np.arange(math.isqrt(N) + 1) ** 2] = 1
            return out
        return NatSet.rule(lambda n: math.isqrt(n) ** 2 == n, vec, name="squares")
    if head == "multiples":
        k = int(payload) if payload is not None else _int_param(params, "k")
        if k < 1:
            raise DSLError("multiples needs k >= 1")
        return NatSet.rule(lambda n: n % k == 0, lambda N: (np.arange(N + 1) % k == 0),
                           name=f"multiples:{k}")
    if head == "powers":
        b = _int_param(params, "base", 2, lo=2)
        return NatSet.rule(lambda n: n >= 1 and _powers_mask(n, b)[n] == 1,
                           lambda N: _powers_mask(N, b), name=f"powers base={b}")
    if head == "interval-union":
        b = _int_param(params, "base", 2, lo=2)
        return NatSet.rule(lambda n: _in_interval_union(n, b), lambda N: _interval_union_mask(N, b),
                           name=f"interval-union base={b}")
    if head == "explicit":
        items = _list_payload(payload)
        try:
            elems = [int(v) for v in items]
        except (TypeError, ValueError) as exc:
            raise DSLError("explicit sets list natural numbers") from exc
        if any(v < 0 for v in elems):
            raise DSLError("explicit sets list natural numbers")
        return NatSet.explicit(elems, name="explicit")
    raise DSLError(f"unknown set rule {head!r}")


# weights ---------------------------------------------------------------------


def parse_weights(text: str) -> WeightSequence:
    head, payload, params = parse_expr(text)
    if head == "constant":
        if payload is None:
            raise DSLError("constant weights need a value, e.g. constant:2")
        lam = parse_number(payload)
        if lam == 0:
            raise DSLError("weights must be nonzero")
        return Constant(lam)
    if head == "fratio":
        p = parse_number(params.get("p", "2"))
        if not 1 <= p < math.inf:
            raise DSLError("fratio needs p in [1, inf)")
        return FRatio(float(p))
    if head == "explicit":
        values = [parse_number(str(v)) for v in _list_payload(payload)]
        tail = parse_number(params.get("tail", "1"))
        if not values or any(v == 0 for v in values) or tail == 0:
            raise DSLError("explicit weights must be a nonempty list of nonzero numbers")
        return Explicit(values, tail)
    raise DSLError(f"unknown weight rule {head!r}")


# points ----------------------------------------------------------------------


def parse_point(text: str) -> BaireRule:
    head, payload, params = parse_expr(text)
    if head == "constant":
        if payload is None or not payload.isdigit():
            raise DSLError("constant points need a natural value, e.g. constant:1")
        return BaireRule.constant(int(payload))
    if head == "diagonal":
        return BaireRule.diagonal()
    if head == "sqrt-growth":
        return BaireRule.sqrt_growth(_int_param(params, "growth", 1, lo=1))
    raise DSLError(f"unknown point rule {head!r}")


# ideals ----------------------------------------------------------------------

_IDEALS = {
    "fin": IdealSpec.fin,
    "density-zero": IdealSpec.density_zero,
    "log-density-zero": IdealSpec.log_density_zero,
    "summable": IdealSpec.summable,
}


def parse_ideal(text: str) -> IdealSpec:
    head, payload, params = parse_expr(text)
    if head not in _IDEALS or payload is not None or params:
        raise DSLError(f"unknown ideal {text!r}; expected one of {sorted(_IDEALS)}")
    return _IDEALS[head]()
