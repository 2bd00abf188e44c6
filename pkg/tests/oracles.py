"""Independent reference computations used by the tests.

Nothing here imports the code under test beyond plain data types.
"""

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from math import factorial


def dfact(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@lru_cache(maxsize=None)
def dvv(g, d):
    """<tau_d>_g by the DVV (Virasoro) recursion in double-factorial form."""
    d = tuple(sorted(d))
    n = len(d)
    if g < 0 or 2 * g - 2 + n <= 0 or sum(d) != 3 * g - 3 + n:
        return Fraction(0)
    if g == 0 and d == (0, 0, 0):
        return Fraction(1)
    if g == 1 and d == (1,):
        return Fraction(1, 24)
    if d[-1] == 0:
        # string equation with every other insertion lowered
        rest = d[:-1]
        total = Fraction(0)
        for j, x in enumerate(rest):
            if x:
                total += dvv(g, rest[:j] + (x - 1,) + rest[j + 1:])
        return total
    k = d[-1] - 1
    rest = d[:-1]
    total = Fraction(0)
    for j, x in enumerate(rest):
        total += Fraction(dfact(2 * k + 2 * x + 1), dfact(2 * x - 1)) * \
            dvv(g, rest[:j] + (x + k,) + rest[j + 1:])
    for r in range(k):
        s = k - 1 - r
        w = Fraction(dfact(2 * r + 1) * dfact(2 * s + 1), 2)
        total += w * dvv(g - 1, rest + (r, s))
        for mask in product((0, 1), repeat=len(rest)):
            left = tuple(x for x, m in zip(rest, mask) if m)
            right = tuple(x for x, m in zip(rest, mask) if not m)
            for g1 in range(g + 1):
                total += w * dvv(g1, left + (r,)) * dvv(g - g1, right + (s,))
    return total / dfact(2 * k + 3)


def genus0_closed(d):
    """(n-3)! / prod d_j! when sum d = n - 3."""
    n = len(d)
    if sum(d) != n - 3:
        return Fraction(0)
    den = 1
    for x in d:
        den *= factorial(x)
    return Fraction(factorial(n - 3), den)


def brute_force_contraction(algebra, loops, edges, leaves, P):
    """T of a graph for an even algebra by summing over half-edge labels.

    ``P`` is a symmetric bivector; every empty loop inserts the handle
    element sum eta^{ab} e_a e_b at its vertex.
    """
    s = algebra.s
    eta_inv = algebra.eta_inverse
    handle = [Fraction(0)] * s
    for a, b in product(range(s), repeat=2):
        if eta_inv[a][b]:
            prod_ab = algebra.mul(algebra.basis(a), algebra.basis(b))
            handle = [h + eta_inv[a][b] * x for h, x in zip(handle, prod_ab)]
    total = Fraction(0)
    for labels in product(range(s), repeat=2 * len(edges)):
        weight = Fraction(1)
        for i in range(len(edges)):
            weight *= P[labels[2 * i]][labels[2 * i + 1]]
            if not weight:
                break
        if not weight:
            continue
        for v in range(len(loops)):
            elt = algebra.basis(0)
            for i, (a, b) in enumerate(edges):
                if a == v:
                    elt = algebra.mul(elt, algebra.basis(labels[2 * i]))
                if b == v:
                    elt = algebra.mul(elt, algebra.basis(labels[2 * i + 1]))
            for vertex, vec in leaves:
                if vertex == v:
                    elt = algebra.mul(elt, vec)
            for _ in range(loops[v]):
                elt = algebra.mul(elt, handle)
            weight *= algebra.integrate(elt)
            if not weight:
                break
        total += weight
    return total


def subsets(seq):
    for r in range(len(seq) + 1):
        yield from combinations(seq, r)
