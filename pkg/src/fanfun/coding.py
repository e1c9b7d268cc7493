"""Cantor pairing and the sequence-number coding built on it.

    pair(x, y)        = (x + y)(x + y + 1)/2 + y
    seq([])           = 0
    seq([x, *rest])   = 1 + pair(x, seq(rest))

``seq`` is a bijection between finite sequences of naturals and naturals.
"""

from __future__ import annotations

from math import isqrt
from typing import Sequence


def pair(x: int, y: int) -> int:
    if x < 0 or y < 0:
        raise ValueError("pairing is defined on naturals")
    s = x + y
    return s * (s + 1) // 2 + y


def unpair(z: int) -> tuple[int, int]:
    if z < 0:
        raise ValueError("pairing is defined on naturals")
    w = (isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


def seq(xs: Sequence[int]) -> int:
    code = 0
    for x in reversed(xs):
        code = 1 + pair(x, code)
    return code


def unseq(code: int) -> tuple[int, ...]:
    out = []
    while code:
        x, code = unpair(code - 1)
        out.append(x)
    return tuple(out)
