"""Intersection numbers of psi classes on the moduli space of stable curves.

``psi_integral(g, d)`` returns the integral of psi_1^d_1 ... psi_n^d_n over
M_{g,n}-bar.  Genus zero uses the closed multinomial form; higher genus uses
the DVV recursion, memoized on sorted exponents.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Tuple

from .series import UnstableKey


def double_factorial(n: int) -> int:
    """(2k+1)!! style product with (-1)!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def psi_integral(g: int, d: Iterable[int]) -> Fraction:
    d = tuple(sorted(d, reverse=True))
    if g < 0 or any(x < 0 for x in d):
        raise ValueError(f"bad psi key g={g} d={d}")
    if 2 * g - 2 + len(d) <= 0:
        raise UnstableKey(f"unstable psi key g={g} d={d}")
    return _psi(g, d)


@lru_cache(maxsize=None)
def _psi(g: int, d: Tuple[int, ...]) -> Fraction:
    n = len(d)
    if sum(d) != 3 * g - 3 + n:
        return Fraction(0)
    if g == 0:
        out = math.factorial(n - 3)
        for x in d:
            out //= math.factorial(x)
        return Fraction(out)
    if d == (1,) and g == 1:
        return Fraction(1, 24)
    if d[-1] == 0:
        # string equation
        rest = d[:-1]
        total = Fraction(0)
        for j, x in enumerate(rest):
            if x:
                total += _psi(g, _sorted(rest[:j] + (x - 1,) + rest[j + 1:]))
        return total
    if d[-1] == 1 and 2 * g - 2 + n - 1 > 0:
        return (2 * g - 2 + n - 1) * _psi(g, d[:-1])
    return _dvv(g, d)


def _sorted(d):
    return tuple(sorted(d, reverse=True))


def _dvv(g: int, d: Tuple[int, ...]) -> Fraction:
    k = d[0] - 1
    rest = d[1:]
    total = Fraction(0)
    for j, x in enumerate(rest):
        others = rest[:j] + rest[j + 1:]
        coeff = Fraction(double_factorial(2 * k + 2 * x + 1), double_factorial(2 * x - 1))
        total += coeff * _safe(g, others + (x + k,))
    for r in range(k):
        s = k - 1 - r
        weight = Fraction(double_factorial(2 * r + 1) * double_factorial(2 * s + 1), 2)
        total += weight * _safe(g - 1, rest + (r, s))
        idx = range(len(rest))
        for size in range(len(rest) + 1):
            for left in combinations(idx, size):
                a = tuple(rest[i] for i in left)
                b = tuple(rest[i] for i in idx if i not in left)
                for g1 in range(g + 1):
                    total += weight * _safe(g1, a + (r,)) * _safe(g - g1, b + (s,))
    return total / double_factorial(2 * k + 3)


def _safe(g: int, d) -> Fraction:
    if g < 0 or 2 * g - 2 + len(d) <= 0:
        return Fraction(0)
    return _psi(g, _sorted(d))


def psi_table(g_max: int, n_max: int):
    """All nonzero intersection numbers with g <= g_max and n <= n_max."""
    out = []
    for g in range(g_max + 1):
        for n in range(n_max + 1):
            if 2 * g - 2 + n <= 0:
                continue
            total = 3 * g - 3 + n
            for d in _partitions(total, n):
                value = _psi(g, d)
                if value:
                    out.append((g, tuple(sorted(d)), value))
    return out


def _partitions(total: int, parts: int, cap: int | None = None):
    """Non-increasing tuples of ``parts`` non-negative ints summing to total."""
    if cap is None:
        cap = total
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(total, cap), -1, -1):
        if first * parts < total:
            break
        for tail in _partitions(total - first, parts - 1, first):
            yield (first,) + tail
