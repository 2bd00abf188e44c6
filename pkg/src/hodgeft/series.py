"""Correlator tables and the Leibniz rules of quantized operators.

A log-potential ``F = sum_g hbar^(g-1) F_g`` is stored as a table of
correlators.  A key is a sorted tuple of insertions ``(d, i)``: ``d`` is the
psi-power and ``i`` a 0-based basis index.  The variable ``t_{d,i}`` has the
parity of ``e_i``.

Sign reference.  For a sequence ``s = (s_1, ..., s_n)`` of insertions put

    D_s F = d_{s_n} ... d_{s_2} d_{s_1} F  at t = 0,

with the left derivative ``d_{s_1}`` applied first.  The table value at a
sorted key ``m`` is ``D_m F``.  Left derivatives supercommute, so ``D_s F``
for any other order is the table value times the Koszul sign of sorting
``s``.  Equivalently ``F_g = sum_m value(m) * t^m / Aut(m)`` with ``t^m``
the ordered product in sorted order and ``Aut(m)`` the product of factorials
of even multiplicities.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

Insertion = Tuple[int, int]
Key = Tuple[Insertion, ...]

ZERO = Fraction(0)


class UnknownCoefficient(LookupError):
    """A coefficient lies beyond the truncation and is not forced to vanish."""


class UnstableKey(ValueError):
    """A key with 2g - 2 + n <= 0 was requested."""


class WindowOverflow(ValueError):
    """An operation would need data beyond what the window determines."""


@dataclass(frozen=True, order=True)
class TruncationWindow:
    g_max: int = 2
    n_max: int = 6
    d_max: int = 4

    def __post_init__(self):
        if self.g_max < 0 or self.n_max < 3 or self.d_max < 0:
            raise ValueError(f"invalid window {self}")

    def contains(self, g: int, key: Key) -> bool:
        return (g <= self.g_max and len(key) <= self.n_max
                and all(d <= self.d_max for d, _ in key))

    def __str__(self):
        return f"g_max={self.g_max} n_max={self.n_max} d_max={self.d_max}"


def is_stable(g: int, n: int) -> bool:
    return 2 * g - 2 + n > 0


def defect(g: int, key: Sequence[Insertion]) -> int:
    """3g - 3 + n - sum of psi-powers; negative values force vanishing."""
    return 3 * g - 3 + len(key) - sum(d for d, _ in key)


def koszul_sort(seq: Sequence[Insertion], parity: Sequence[int]):
    """Sort insertions, returning ``(key, sign)``.

    The sign counts transpositions of odd insertions.  It is 0 when an odd
    insertion repeats, since odd variables square to zero.
    """
    odd = [parity[i] for _, i in seq]
    sign = 1
    for a in range(len(seq)):
        if not odd[a]:
            continue
        for b in range(a + 1, len(seq)):
            if odd[b] and seq[b] < seq[a]:
                sign = -sign
    key = tuple(sorted(seq))
    for a in range(len(key) - 1):
        if key[a] == key[a + 1] and parity[key[a][1]]:
            return key, 0
    return key, sign


def key_parity(key: Iterable[Insertion], parity: Sequence[int]) -> int:
    return sum(parity[i] for _, i in key) % 2


def shuffle_sign(odd: Sequence[int], perm: Sequence[int]) -> int:
    """Koszul sign of listing items in the order ``perm``.

    ``odd[k]`` is the parity of item ``k``; ``perm`` is a permutation of
    ``range(len(odd))``.
    """
    sign = 1
    for a in range(len(perm)):
        if not odd[perm[a]]:
            continue
        for b in range(a + 1, len(perm)):
            if odd[perm[b]] and perm[b] < perm[a]:
                sign = -sign
    return sign


def automorphism_factor(key: Key) -> int:
    out = 1
    for _, group in itertools.groupby(key):
        out *= math.factorial(len(list(group)))
    return out


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text.strip())


class Potential:
    """Anything that answers ``coefficient(g, key)``.

    Subclasses fix ``parity`` (one bit per basis vector).  ``derivative``
    evaluates ``D_s F`` for an unsorted sequence and returns exact zero for
    unstable or parity-odd sequences, which never carry coefficients.
    """

    parity: Tuple[int, ...] = ()
    total_parity: int = 0
    # (lo, hi) bounds on defect(g, key) of nonzero coefficients, if known
    defect_support: Optional[Tuple[int, int]] = None

    def coefficient(self, g: int, key: Key) -> Fraction:
        raise NotImplementedError

    @property
    def rank(self) -> int:
        return len(self.parity)

    def derivative(self, g: int, seq: Sequence[Insertion]) -> Fraction:
        if g < 0 or not is_stable(g, len(seq)):
            return ZERO
        support = self.defect_support
        if support is not None:
            dft = 3 * g - 3 + len(seq) - sum(d for d, _ in seq)
            if not support[0] <= dft <= support[1]:
                return ZERO
        if key_parity(seq, self.parity) != self.total_parity:
            return ZERO
        key, sign = koszul_sort(seq, self.parity)
        if sign == 0:
            return ZERO
        value = self.coefficient(g, key)
        return value if sign > 0 else -value


class LogPotential(Potential):
    """Exact correlator table valid inside a truncation window.

    Keys absent from ``entries`` but inside the window are exact zeros.
    Outside the window only keys that vanish by the 3g-2 property or by
    parity are known; anything else raises :class:`UnknownCoefficient`.
    """

    def __init__(self, entries: Mapping[Tuple[int, Key], Fraction],
                 window: TruncationWindow, parity: Sequence[int],
                 total_parity: int = 0):
        self.window = window
        self.parity = tuple(int(p) for p in parity)
        self.total_parity = total_parity
        clean = {}
        for (g, key), value in entries.items():
            value = Fraction(value)
            if value == 0:
                continue
            key = tuple(tuple(x) for x in key)
            if key != tuple(sorted(key)):
                raise ValueError(f"key {key} is not sorted")
            if not is_stable(g, len(key)):
                raise UnstableKey(f"unstable key g={g} {key}")
            if not window.contains(g, key):
                raise WindowOverflow(f"key g={g} {key} outside {window}")
            if key_parity(key, self.parity) != total_parity:
                raise ValueError(f"wrong total parity at g={g} {key}")
            clean[(g, key)] = value
        self.entries: Dict[Tuple[int, Key], Fraction] = clean

    def coefficient(self, g: int, key: Key) -> Fraction:
        key = tuple(key)
        if not is_stable(g, len(key)):
            raise UnstableKey(f"unstable key g={g} {key}")
        for _, i in key:
            if not 0 <= i < self.rank:
                raise KeyError(f"basis index {i} out of range")
        if self.window.contains(g, key):
            return self.entries.get((g, key), ZERO)
        if defect(g, key) < 0 or key_parity(key, self.parity) != self.total_parity:
            return ZERO
        raise UnknownCoefficient(f"g={g} {key} beyond {self.window}")

    def __getitem__(self, gk):
        return self.coefficient(*gk)

    def items(self):
        return sorted(self.entries.items())

    def __eq__(self, other):
        if not isinstance(other, LogPotential):
            return NotImplemented
        return (self.window == other.window and self.parity == other.parity
                and self.total_parity == other.total_parity
                and self.entries == other.entries)

    def restrict(self, window: TruncationWindow) -> "LogPotential":
        kept = {k: v for k, v in self.entries.items()
                if window.contains(k[0], k[1])}
        return LogPotential(kept, window, self.parity, self.total_parity)

    def differences(self, other: "LogPotential"):
        keys = set(self.entries) | set(other.entries)
        return sorted((k, self.entries.get(k, ZERO), other.entries.get(k, ZERO))
                      for k in keys
                      if self.entries.get(k, ZERO) != other.entries.get(k, ZERO))

    def serialize(self) -> str:
        return "".join(format_line(g, key, v) + "\n" for (g, key), v in self.items())

    @classmethod
    def parse(cls, text: str, window: TruncationWindow,
              parity: Sequence[int]) -> "LogPotential":
        entries = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                g, key, value = parse_line(line)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
            entries[(g, key)] = value
        return cls(entries, window, parity)


def format_line(g: int, key: Key, value: Fraction) -> str:
    body = "".join(f"({d},{i + 1})" for d, i in key)
    return f"{g}; {body}; {format_fraction(value)}"


def parse_line(line: str):
    parts = [p.strip() for p in line.split(";")]
    if len(parts) != 3:
        raise ValueError(f"expected 'g; keys; p/q', got {line!r}")
    g = int(parts[0])
    key = []
    body = parts[1].replace(" ", "")
    while body:
        if not body.startswith("(") or ")" not in body:
            raise ValueError(f"bad insertion list {parts[1]!r}")
        head, body = body[1:].split(")", 1)
        d, i = head.split(",")
        key.append((int(d), int(i) - 1))
    return g, tuple(sorted(key)), parse_fraction(parts[2])


def iter_keys(window: TruncationWindow, indices: Sequence[int],
              parity: Sequence[int], g: int,
              total_parity: int = 0, min_defect: int = 0) -> Iterator[Key]:
    """Stable keys of genus ``g`` with the given parity and defect at least
    ``min_defect`` (the 3g-2 admissible ones by default)."""
    variables = [(d, i) for d in range(window.d_max + 1) for i in sorted(indices)]
    for n in range(0, window.n_max + 1):
        if not is_stable(g, n):
            continue
        for key in itertools.combinations_with_replacement(variables, n):
            if defect(g, key) < min_defect or key_parity(key, parity) != total_parity:
                continue
            if any(key[a] == key[a + 1] and parity[key[a][1]]
                   for a in range(n - 1)):
                continue
            yield key


def tabulate(source: Potential, window: TruncationWindow,
             indices: Sequence[int] | None = None,
             mapper: Callable = map) -> LogPotential:
    """Materialize every in-window coefficient of ``source``."""
    if indices is None:
        indices = range(source.rank)
    tp = source.total_parity
    keys = [(g, key) for g in range(window.g_max + 1)
            for key in iter_keys(window, indices, source.parity, g, tp)]
    values = mapper(lambda gk: source.coefficient(*gk), keys)
    entries = {gk: v for gk, v in zip(keys, values) if v != 0}
    return LogPotential(entries, window, source.parity, tp)


# Leibniz rules -----------------------------------------------------------
#
# ``linear`` maps an insertion u to a list of (w, c): the derivation
# sum c * t_u d/dt_w.  ``shift`` maps w to c: the constant-coefficient
# derivation sum c * d/dt_w.  ``quadratic`` maps (k, l) to b: the operator
# hbar * sum b * d_k d_l, with d_l applied first.


def first_order_term(F: Potential, linear: Mapping, g: int, key: Key) -> Fraction:
    """Coefficient of the derivation ``sum c t_u d_w`` applied to exp(F)."""
    total = ZERO
    parity = F.parity
    before = 0
    for j, u in enumerate(key):
        pu = parity[u[1]]
        sign = -1 if (pu and before) else 1
        rest = key[:j] + key[j + 1:]
        for w, c in linear.get(u, ()):
            value = F.derivative(g, (w,) + rest)
            if value:
                total += sign * c * value
        before ^= pu
    return total


def shift_term(F: Potential, shift: Mapping, g: int, key: Key) -> Fraction:
    total = ZERO
    for w, c in shift.items():
        value = F.derivative(g, (w,) + tuple(key))
        if value:
            total += c * value
    return total


def loop_term(F: Potential, quadratic: Mapping, g: int, key: Key) -> Fraction:
    """Genus-reducing part ``d_k d_l F_{g-1}`` of hbar b d d exp(F)."""
    if g < 1:
        return ZERO
    total = ZERO
    for (k, l), b in quadratic.items():
        value = F.derivative(g - 1, (l, k) + tuple(key))
        if value:
            total += b * value
    return total


def _groups(key: Key):
    """Distinct insertions of a sorted key with multiplicities."""
    out = []
    for u, grp in itertools.groupby(key):
        out.append((u, len(list(grp))))
    return out


def split_term(F1: Potential, F2: Potential, quadratic: Mapping, g: int,
               key: Key) -> Fraction:
    """Splitting part ``(d_k F1)(d_l F2)`` of hbar b d d exp(F).

    Sub-multisets of the key are enumerated with binomial weights; repeated
    insertions are even, so the Koszul signs only see the odd ones, which
    occur once each.
    """
    parity = F1.parity
    groups = _groups(tuple(key))
    ks = sorted({k for k, _ in quadratic})
    ls = sorted({l for _, l in quadratic})
    total = ZERO
    for counts in itertools.product(*(range(m + 1) for _, m in groups)):
        weight = 1
        left, right = [], []
        # Leibniz sign: each odd derivative landing on the right factor
        # passes the odd derivatives already taken by the left factor.
        base = seen = right_odd = 0
        for (u, m), c in zip(groups, counts):
            weight *= math.comb(m, c)
            left.extend([u] * c)
            right.extend([u] * (m - c))
            if parity[u[1]]:
                if c:
                    seen ^= 1
                else:
                    base ^= seen
                    right_odd ^= 1
        left, right = tuple(left), tuple(right)
        for g1 in range(g + 1):
            a = {k: F1.derivative(g1, (k,) + left) for k in ks}
            if not any(a.values()):
                continue
            c = {l: F2.derivative(g - g1, (l,) + right) for l in ls}
            if not any(c.values()):
                continue
            for (k, l), b in quadratic.items():
                x = a[k] * c[l]
                if x:
                    neg = base ^ (parity[k[1]] & right_odd)
                    total += (-weight if neg else weight) * b * x
    return total


def apply_first_order(F: Potential, linear: Mapping, window: TruncationWindow,
                      shift: Mapping | None = None,
                      indices: Sequence[int] | None = None) -> LogPotential:
    """Log-level action of a first-order operator on exp(F), tabulated.

    Raises :class:`UnknownCoefficient` when an in-window result needs an
    undetermined input coefficient.
    """
    shift = shift or {}
    odd = {(F.parity[u[1]] + F.parity[w[1]]) % 2
           for u, targets in linear.items() for w, _ in targets}
    odd |= {F.parity[w[1]] for w in shift}
    if len(odd) > 1:
        raise ValueError("operator is not homogeneous")
    op_parity = odd.pop() if odd else 0

    class _Result(Potential):
        parity = F.parity
        total_parity = F.total_parity ^ op_parity

        def coefficient(self, g, key):
            value = first_order_term(F, linear, g, key)
            if shift:
                value += shift_term(F, shift, g, key)
            return value

    return tabulate(_Result(), window, indices)


def apply_second_order(F: Potential, quadratic: Mapping,
                       window: TruncationWindow,
                       indices: Sequence[int] | None = None) -> LogPotential:
    """Log-level action ``exp(-F) hbar b d d exp(F)``, tabulated."""
    odd = {(F.parity[k[1]] + F.parity[l[1]]) % 2 for k, l in quadratic}
    if len(odd) > 1:
        raise ValueError("operator is not homogeneous")
    op_parity = odd.pop() if odd else 0

    class _Result(Potential):
        parity = F.parity
        total_parity = F.total_parity ^ op_parity

        def coefficient(self, g, key):
            return loop_term(F, quadratic, g, key) + split_term(F, F, quadratic, g, key)

    return tabulate(_Result(), window, indices)
