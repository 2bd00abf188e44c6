import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from hodgeft.frobenius import HodgeAlgebra
from hodgeft.graphs import enumerate_graphs, t_contraction
from hodgeft.psi import psi_integral
from hodgeft.series import (LogPotential, TruncationWindow, format_line, koszul_sort,
                            parse_line, shuffle_sign)

PARITY = (0, 1, 1, 0, 1)
insertion = st.tuples(st.integers(0, 3), st.integers(0, len(PARITY) - 1))
fractions = st.fractions(max_denominator=10 ** 6)


@given(st.integers(0, 3), st.lists(st.integers(0, 6), min_size=1, max_size=6))
def test_psi_symmetric_and_dimension(g, d):
    if 2 * g - 2 + len(d) <= 0:
        return
    value = psi_integral(g, d)
    assert value == psi_integral(g, list(reversed(d)))
    if sum(d) != 3 * g - 3 + len(d):
        assert value == 0
    else:
        assert value > 0


@given(st.integers(0, 3), st.lists(st.integers(0, 5), min_size=1, max_size=5))
def test_psi_string_and_dilaton(g, d):
    n = len(d)
    if 2 * g - 2 + n <= 0:
        return
    lowered = sum((psi_integral(g, d[:j] + [d[j] - 1] + d[j + 1:]) for j in range(n) if d[j]),
                  Fraction(0))
    assert psi_integral(g, [0] + d) == lowered
    assert psi_integral(g, [1] + d) == (2 * g - 2 + n) * psi_integral(g, d)


@given(st.lists(insertion, max_size=7))
def test_koszul_sign_is_a_character(seq):
    """Sorting sign equals the sign of the sorting permutation on odd items."""
    key, sign = koszul_sort(seq, PARITY)
    assert list(key) == sorted(seq)
    perm = sorted(range(len(seq)), key=lambda k: (seq[k], k))
    odd = [PARITY[i] for _, i in seq]
    if sign:
        assert sign == shuffle_sign(odd, perm)
    else:
        assert any(seq.count(u) > 1 and PARITY[u[1]] for u in seq)


@given(st.lists(insertion, min_size=2, max_size=6), st.data())
def test_derivatives_supercommute(seq, data):
    window = TruncationWindow(3, 6, 3)
    key, sign = koszul_sort(seq, PARITY)
    g = 3
    if sum(PARITY[i] for _, i in key) % 2 or sign == 0:
        return
    F = LogPotential({(g, key): Fraction(5, 7)}, window, PARITY)
    j = data.draw(st.integers(0, len(seq) - 2))
    swapped = seq[:j] + [seq[j + 1], seq[j]] + seq[j + 2:]
    both_odd = PARITY[seq[j][1]] and PARITY[seq[j + 1][1]]
    assert F.derivative(g, swapped) == (-1 if both_odd else 1) * F.derivative(g, seq)


@given(st.integers(0, 4), st.lists(insertion, min_size=1, max_size=6), fractions)
def test_line_roundtrip(g, key, value):
    key = tuple(sorted(key))
    assert parse_line(format_line(g, key, value)) == (g, key, value)


def _algebra():
    z = [[Fraction(0)] * 4 for _ in range(4)]
    mult = [[[Fraction(0)] * 4 for _ in range(4)] for _ in range(4)]
    for i in range(4):
        mult[0][i][i] = mult[i][0][i] = Fraction(1)
    mult[1][2][3] = Fraction(1)
    mult[2][1][3] = Fraction(-1)
    return HodgeAlgebra(["1", "u", "v", "uv"], [0, 1, 1, 0], mult,
                        [0, 0, 0, 1], z, z, z)


EXT = _algebra()
ODD_OP = [[Fraction(0)] * 4 for _ in range(4)]
ODD_OP[1][0] = ODD_OP[3][2] = Fraction(1)   # 1 -> u, v -> uv
EVEN_OP = [[Fraction(int(r == c)) * (1 + r) for c in range(4)] for r in range(4)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2), st.integers(1, 4), st.integers(0, 10 ** 6), st.booleans())
def test_contraction_mark_independence(g, n, seed, odd):
    if 2 * g - 2 + n <= 0:
        return
    rng = random.Random(seed)
    k = rng.randint(0, 3 * g - 3 + n)
    graphs = enumerate_graphs(g, (k,) + (0,) * (n - 1))
    if not graphs:
        return
    G = rng.choice(graphs)
    vs = []
    for _ in range(n):
        p = rng.randint(0, 1)
        vs.append([Fraction(rng.randint(-3, 3)) if EXT.parity[i] == p else Fraction(0)
                   for i in range(4)])
    op = ODD_OP if odd else EVEN_OP
    base = t_contraction(G, EXT, vs, edge_op=op)
    assert t_contraction(G, EXT, vs, marks=G.random_marks(rng), edge_op=op) == base
