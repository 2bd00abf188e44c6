"""Decorated stable graphs, their weights P, A, T and the graph-sum potential.

A graph has vertices carrying a number of empty loops, heavy edges (pairs of
vertices, self-pairs allowed) and labeled leaves with psi-powers.  Its
genus is the number of empty loops plus the first Betti number of the
heavy-edge graph.

Tensor contraction.  A heavy edge with operator A carries the bivector
P = A eta^{-1} and every empty loop the Casimir eta^{-1}, so that an empty
loop at a vertex produces a supertrace.  Every vertex carries the form
(a_1, ..., a_k) -> int a_1...a_k.  The value T is the Koszul contraction of

    (edge bivectors in edge order, first factor at the lower endpoint)
    (x) (leaf vectors in label order)

against the product of the vertex forms, evaluated along the spanning tree
left after removing the cut edges.  A tree edge glues by applying the
operator of its bivector to the element of the subtree below it; a cut
edge is opened into two virtual leaves.  The result does not depend on the
cut edges or on the root; the test suite checks this for random spanning
trees.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .frobenius import HodgeAlgebra, apply, matmul, operator_parity
from .psi import psi_integral
from .series import LogPotential, TruncationWindow, iter_keys, is_stable


class SignConventionError(AssertionError):
    """An odd-parity contraction produced a nonzero value."""


class MarkError(ValueError):
    """Cut-edge marks do not leave a spanning tree."""


@dataclass(frozen=True)
class DecoratedGraph:
    loops: Tuple[int, ...]
    edges: Tuple[Tuple[int, int], ...]
    leaves: Tuple[Tuple[int, int, int], ...]  # (vertex, label, psi power)

    @property
    def n_vertices(self) -> int:
        return len(self.loops)

    @property
    def betti(self) -> int:
        return len(self.edges) - self.n_vertices + 1

    @property
    def genus(self) -> int:
        return sum(self.loops) + self.betti

    def half_edges(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)

    def leaves_at(self, v: int):
        return [leaf for leaf in self.leaves if leaf[0] == v]

    def is_valid(self) -> bool:
        for v in range(self.n_vertices):
            if 2 * self.loops[v] + self.half_edges(v) + len(self.leaves_at(v)) < 3:
                return False
        return _connected(self.n_vertices, [e for e in self.edges if e[0] != e[1]])

    def default_marks(self) -> Tuple[int, ...]:
        """Cut edges complementary to the BFS spanning tree from vertex 0."""
        seen = {0}
        tree = set()
        frontier = [0]
        while frontier:
            nxt = []
            for v in frontier:
                for idx, (a, b) in enumerate(self.edges):
                    if a == b or (a != v and b != v):
                        continue
                    w = b if a == v else a
                    if w not in seen:
                        seen.add(w)
                        tree.add(idx)
                        nxt.append(w)
            frontier = nxt
        return tuple(i for i in range(len(self.edges)) if i not in tree)

    def random_marks(self, rng: random.Random) -> Tuple[int, ...]:
        """Complement of a uniformly shuffled Kruskal spanning tree."""
        order = list(range(len(self.edges)))
        rng.shuffle(order)
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        tree = set()
        for idx in order:
            a, b = self.edges[idx]
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
                tree.add(idx)
        return tuple(sorted(i for i in range(len(self.edges)) if i not in tree))

    def describe(self) -> str:
        verts = " ".join(f"v{v}[g={g}]" for v, g in enumerate(self.loops))
        edges = " ".join(f"{a}-{b}" for a, b in self.edges) or "-"
        leaves = " ".join(f"{lab}:v{v}^{d}" for v, lab, d in self.leaves)
        return f"vertices {verts} | edges {edges} | leaves {leaves}"


def _connected(n: int, edges) -> bool:
    if n == 0:
        return False
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v] - seen:
            seen.add(w)
            stack.append(w)
    return len(seen) == n


# enumeration ------------------------------------------------------------------


def _canonical(loops, edges, leafv):
    """Canonical relabelling of vertices; returns (form, vertex automorphisms).

    Vertices carrying leaves are ordered by their smallest leaf label.  The
    remaining vertices are permuted within classes of equal invariants and
    the lexicographically least edge list wins.
    """
    V = len(loops)
    first_leaf = {}
    for j, v in enumerate(leafv):
        first_leaf.setdefault(v, j)
    legged = sorted(first_leaf, key=first_leaf.get)
    free = [v for v in range(V) if v not in first_leaf]
    pos0 = {v: i for i, v in enumerate(legged)}

    def sig(v):
        nbrs = sorted(pos0.get(b if a == v else a, -1)
                      for a, b in edges if v in (a, b) and a != b)
        selfs = sum(1 for a, b in edges if a == b == v)
        return (loops[v], selfs, tuple(nbrs))

    groups = {}
    for v in free:
        groups.setdefault(sig(v), []).append(v)
    keys = sorted(groups)
    best = None
    count = 0
    for choice in itertools.product(*(itertools.permutations(groups[k]) for k in keys)):
        order = legged + [v for part in choice for v in part]
        pos = {v: i for i, v in enumerate(order)}
        form = (tuple(loops[v] for v in order),
                tuple(sorted(tuple(sorted((pos[a], pos[b]))) for a, b in edges)),
                tuple(pos[v] for v in leafv))
        if best is None or form < best:
            best, count = form, 1
        elif form == best:
            count += 1
    return best, count


def _uncontractions(loops, edges, leafv):
    V = len(loops)
    for v in range(V):
        if loops[v]:
            new_loops = list(loops)
            new_loops[v] -= 1
            yield tuple(new_loops), edges + ((v, v),), leafv
    for v in range(V):
        inc = [i for i, (a, b) in enumerate(edges) if v in (a, b)]
        my_leaves = [j for j, u in enumerate(leafv) if u == v]
        options = []
        for i in inc:
            a, b = edges[i]
            if a == b:
                options.append((((v, v), 2, 0), ((V, V), 0, 2), ((v, V), 1, 1)))
            else:
                w = b if a == v else a
                options.append(((tuple(sorted((w, v))), 1, 0), (tuple(sorted((w, V))), 0, 1)))
        edge_choices = []
        for picks in itertools.product(*options):
            he_old = sum(p[1] for p in picks) + 1
            he_new = sum(p[2] for p in picks) + 1
            edge_choices.append(([p[0] for p in picks], he_old, he_new))
        for g1 in range(loops[v] + 1):
            g2 = loops[v] - g1
            new_loops = loops[:v] + (g1,) + loops[v + 1:] + (g2,)
            for mask in range(1 << len(my_leaves)):
                moved = {my_leaves[k] for k in range(len(my_leaves)) if mask >> k & 1}
                l_new = len(moved)
                l_old = len(my_leaves) - l_new
                new_leafv = None
                for picked, he_old, he_new in edge_choices:
                    if 2 * g1 + he_old + l_old < 3 or 2 * g2 + he_new + l_new < 3:
                        continue
                    if new_leafv is None:
                        new_leafv = tuple(V if j in moved else u for j, u in enumerate(leafv))
                    new_edges = list(edges)
                    for i, e in zip(inc, picked):
                        new_edges[i] = e
                    new_edges.append((v, V))
                    yield new_loops, tuple(sorted(new_edges)), new_leafv


_LEVELS: Dict[Tuple[int, int], list] = {}


def _graph_levels(g: int, n: int, upto: int):
    """Canonical forms of stable graphs of type (g, n), grouped by edge count.

    Levels are built lazily, so asking for few edges stays cheap.
    """
    levels = _LEVELS.get((g, n))
    if levels is None:
        levels = _LEVELS[(g, n)] = [tuple(sorted({_canonical((g,), (), (0,) * n)[0]}))]
    top = min(upto, 3 * g - 3 + n)
    while len(levels) <= top:
        raw = set()
        for loops, edges, leafv in levels[-1]:
            raw.update(_uncontractions(loops, edges, leafv))
        levels.append(tuple(sorted({_canonical(*cand)[0] for cand in raw})))
    return levels


def _graphs_by_edges(g: int, n: int, n_edges: int):
    levels = _graph_levels(g, n, n_edges)
    return levels[n_edges] if n_edges < len(levels) else ()


def enumerate_graphs(g: int, d: Sequence[int]) -> List[DecoratedGraph]:
    """All decorated graphs of genus g whose leaves carry psi-powers d."""
    n = len(d)
    if not is_stable(g, n):
        raise ValueError(f"unstable type g={g} n={n}")
    n_edges = 3 * g - 3 + n - sum(d)
    if n_edges < 0:
        return []
    out = []
    for loops, edges, leafv in _graphs_by_edges(g, n, n_edges):
        leaves = tuple((leafv[j], j + 1, d[j]) for j in range(n))
        out.append(DecoratedGraph(loops, edges, leaves))
    return out


# weights -----------------------------------------------------------------------


def aut_order(G: DecoratedGraph) -> int:
    leafv = tuple(v for v, _, _ in G.leaves)
    _, vertex_auts = _canonical(G.loops, G.edges, leafv)
    out = vertex_auts
    for gv in G.loops:
        out *= 2 ** gv * math.factorial(gv)
    mult = {}
    for e in G.edges:
        mult[e] = mult.get(e, 0) + 1
    for (a, b), m in mult.items():
        out *= math.factorial(m) * (2 ** m if a == b else 1)
    return out


def a_coefficient(G: DecoratedGraph) -> Fraction:
    num = 1
    for gv in G.loops:
        num *= 2 ** gv * math.factorial(gv)
    return Fraction(num, aut_order(G))


def p_coefficient(G: DecoratedGraph) -> Fraction:
    out = Fraction(1)
    for v in range(G.n_vertices):
        degrees = [d for _, _, d in G.leaves_at(v)] + [0] * G.half_edges(v)
        out *= psi_integral(G.loops[v], degrees)
        if not out:
            break
    return out


# contraction -------------------------------------------------------------------


class _Contractor:
    """Per-algebra cache of propagators, transposes and handle elements."""

    def __init__(self, algebra: HodgeAlgebra, op):
        A = self.algebra = algebra
        s = A.s
        self.op = op
        self.op_parity = operator_parity(op, A.parity) or 0
        P = A.propagator(op)
        self.components = [(a, b, P[a][b]) for a in range(s) for b in range(s)
                           if P[a][b]]
        Pe = [[Fraction(0)] * s for _ in range(s)]
        Pt = [[Fraction(0)] * s for _ in range(s)]
        for a, b, x in self.components:
            Pe[a][b] = x
            Pt[b][a] = -x if A.parity[a] and A.parity[b] else x
        self.edge_map = matmul(Pe, A.eta)
        self.op_transposed = matmul(Pt, A.eta)
        inv = A.eta_inverse
        delta = [Fraction(0)] * s
        for a in range(s):
            for b in range(s):
                if inv[a][b]:
                    prod = A.mul(A.basis(a), A.basis(b))
                    for k in range(s):
                        delta[k] += inv[a][b] * prod[k]
        self.handle = [A.basis(0)]
        self._delta = delta

    def handle_power(self, k):
        while len(self.handle) <= k:
            self.handle.append(self.algebra.mul(self.handle[-1], self._delta))
        return self.handle[k]


_CONTRACTORS: Dict[Tuple[int, int], _Contractor] = {}


def _contractor(algebra, op):
    key = (id(algebra), id(op))
    c = _CONTRACTORS.get(key)
    if c is None or c.algebra is not algebra or c.op is not op:
        c = _Contractor(algebra, op)
        _CONTRACTORS[key] = c
    return c


def _vector_parity(algebra, v):
    return algebra.vector_parity(v)


def t_contraction(G: DecoratedGraph, algebra: HodgeAlgebra,
                  leaf_vectors: Sequence[Sequence[Fraction]],
                  marks: Optional[Sequence[int]] = None,
                  edge_op=None, root: int = 0) -> Fraction:
    """Tensor contraction T(G) with the given leaf vectors (label order)."""
    A = algebra
    op = _default_op(A) if edge_op is None else edge_op
    C = _contractor(A, op)
    V = G.n_vertices
    E = G.edges
    cut = set(G.default_marks() if marks is None else marks)
    for i, (a, b) in enumerate(E):
        if a == b:
            cut.add(i)
    tree = [i for i in range(len(E)) if i not in cut]
    if len(tree) != V - 1 or not _connected(V, [E[i] for i in tree]):
        raise MarkError(f"marks {sorted(cut)} do not leave a spanning tree")
    if len(leaf_vectors) != len(G.leaves):
        raise ValueError("one vector per leaf is required")
    leaf_par = [_vector_parity(A, v) for v in leaf_vectors]
    total = sum(leaf_par) + C.op_parity * len(E)

    # spanning tree rooted at `root`, children in edge order
    children = {v: [] for v in range(V)}
    seen = {root}
    stack = [root]
    while stack:
        v = stack.pop()
        for i in tree:
            a, b = E[i]
            if v in (a, b):
                w = b if a == v else a
                if w not in seen:
                    seen.add(w)
                    children[v].append((i, w))
                    stack.append(w)
    for v in children:
        children[v].sort()

    opened = sorted(cut)
    leaf_at = {v: [] for v in range(V)}
    for j, (v, _, _) in enumerate(G.leaves):
        leaf_at[v].append(j)
    half_at = {v: [] for v in range(V)}
    for i in opened:
        a, b = E[i]
        half_at[a].append(("a", i))
        half_at[b].append(("b", i))

    # source word and nested evaluation word
    source = []
    for i in range(len(E)):
        source.extend([("t", i)] if i not in cut else [("a", i), ("b", i)])
    source.extend(("l", j) for j in range(len(G.leaves)))
    nested = []

    def walk(v):
        nested.extend(("l", j) for j in leaf_at[v])
        nested.extend(half_at[v])
        for i, w in children[v]:
            nested.append(("t", i))
            walk(w)

    walk(root)
    pos = {tok: k for k, tok in enumerate(nested)}
    src_pos = [pos[tok] for tok in source]

    parent_edge = {}
    for v in range(V):
        for i, w in children[v]:
            parent_edge[w] = (i, v)

    def element(v, comp):
        x = C.handle_power(G.loops[v])
        for j in leaf_at[v]:
            x = A.mul(x, leaf_vectors[j])
        for tok in half_at[v]:
            x = A.mul(x, A.basis(comp[tok]))
        for i, w in children[v]:
            y = element(w, comp)
            if not any(y):
                return y
            lower = E[i][0]
            x = A.mul(x, apply(C.edge_map if lower == v else C.op_transposed, y))
        return x

    value = Fraction(0)
    for picks in itertools.product(C.components, repeat=len(opened)):
        comp = {}
        weight = Fraction(1)
        for i, (a, b, x) in zip(opened, picks):
            comp[("a", i)] = a
            comp[("b", i)] = b
            weight *= x
        par = []
        for tok in source:
            kind, i = tok
            if kind == "t":
                par.append(C.op_parity)
            elif kind == "l":
                par.append(leaf_par[i])
            else:
                par.append(A.parity[comp[tok]])
        inversions = 0
        for x in range(len(source)):
            if not par[x]:
                continue
            for y in range(x + 1, len(source)):
                if par[y] and src_pos[x] > src_pos[y]:
                    inversions += 1
        contribution = A.integrate(element(root, comp))
        if contribution:
            value += -weight * contribution if inversions % 2 else weight * contribution
    if total % 2 and value:
        raise SignConventionError(f"odd contraction gave {value} on {G.describe()}")
    return value


_DEFAULT_OPS: Dict[int, tuple] = {}


def _default_op(A):
    cached = _DEFAULT_OPS.get(id(A))
    if cached is None or cached[0] is not A:
        cached = (A, A.GmGp())
        _DEFAULT_OPS[id(A)] = cached
    return cached[1]


def contribution(G: DecoratedGraph, algebra, leaf_vectors, marks=None, edge_op=None):
    p = p_coefficient(G)
    if not p:
        return Fraction(0)
    return p * a_coefficient(G) * t_contraction(G, algebra, leaf_vectors, marks, edge_op)


# potentials ----------------------------------------------------------------------


def _leaf_options(algebra, key, leaf_op):
    """Per-leaf alternatives (psi power, vector, weight).

    Without ``leaf_op`` a leaf keeps its insertion.  With ``leaf_op`` O the
    leaf may also raise its psi power by one and carry -O applied to the
    vector, the leaf factor exp(-psi O) for O with O^2 = 0.
    """
    A = algebra
    out = []
    for d, i in key:
        opts = [(d, A.basis(i))]
        if leaf_op is not None:
            v = [-x for x in apply(leaf_op, A.basis(i))]
            if any(v):
                opts.append((d + 1, v))
        out.append(opts)
    return out


def graph_correlator(algebra: HodgeAlgebra, g: int, key, edge_op=None,
                     leaf_op=None) -> Fraction:
    """Sum over graphs of P A T for one sorted key of (psi power, index).

    With ``leaf_op`` the leaves carry the factor exp(-psi O); the graded
    sign of applying the odd or even O to leaf j is the Koszul sign of
    moving it past the earlier leaves.
    """
    A = algebra
    if not is_stable(g, len(key)):
        raise ValueError("unstable key")
    total = Fraction(0)
    op_par = operator_parity(leaf_op, A.parity) or 0 if leaf_op is not None else 0
    no_edges = not _contractor(A, _default_op(A) if edge_op is None else edge_op).components
    for choice in itertools.product(*_leaf_options(A, key, leaf_op)):
        degrees = [d for d, _ in choice]
        if no_edges and 3 * g - 3 + len(degrees) != sum(degrees):
            continue
        vectors = [v for _, v in choice]
        sign = 1
        if op_par:
            odd_before = 0
            for (d0, i), (d1, _) in zip(key, choice):
                if d1 != d0 and odd_before % 2:
                    sign = -sign
                odd_before += A.parity[i]
        for graph, pa in weighted_graphs(g, tuple(degrees)):
            t = t_contraction(graph, A, vectors, edge_op=edge_op)
            if t:
                total += sign * pa * t
    return total


@lru_cache(maxsize=None)
def weighted_graphs(g: int, degrees: Tuple[int, ...]):
    """Graphs with nonzero P(G), paired with P(G) A(G)."""
    out = []
    for graph in enumerate_graphs(g, degrees):
        p = p_coefficient(graph)
        if p:
            out.append((graph, p * a_coefficient(graph)))
    return tuple(out)


def _correlator_task(args):
    return graph_correlator(*args)


def graph_sum_potential(algebra: HodgeAlgebra, window: TruncationWindow,
                        indices: Optional[Sequence[int]] = None,
                        edge_op=None, leaf_op=None, mapper=map) -> LogPotential:
    """Graph-sum potential on the span of ``indices`` (default: H0).

    ``mapper`` may be a parallel map; keys are evaluated independently and
    merged in key order.
    """
    A = algebra
    if indices is None:
        indices = A.h0_indices()
    keys = [(g, key) for g in range(window.g_max + 1)
            for key in iter_keys(window, indices, A.parity, g)]
    values = mapper(_correlator_task,
                    [(A, g, key, edge_op, leaf_op) for g, key in keys])
    entries = {gk: v for gk, v in zip(keys, values) if v}
    return LogPotential(entries, window, A.parity)


# graph identities ----------------------------------------------------------------


def _koszul_apply(algebra, op, vectors, i):
    p_op = operator_parity(op, algebra.parity) or 0
    sign = 1
    if p_op and sum(algebra.vector_parity(v) for v in vectors[:i]) % 2:
        sign = -1
    out = list(vectors)
    out[i] = [sign * x for x in apply(op, vectors[i])]
    return out


def seven_term_graph_sum(algebra: HodgeAlgebra, vectors) -> Fraction:
    """Genus 0, four leaves: psi-graphs with G- on a leaf minus [G-]-edge graphs."""
    A = algebra
    total = Fraction(0)
    for i in range(4):
        degrees = [1 if j == i else 0 for j in range(4)]
        (graph,) = enumerate_graphs(0, degrees)
        total += contribution(graph, A, _koszul_apply(A, A.Gm, vectors, i))
    for graph in enumerate_graphs(0, (0, 0, 0, 0)):
        total -= contribution(graph, A, vectors, edge_op=A.Gm)
    return total


def twelfth_graph_sum(algebra: HodgeAlgebra, vector) -> Fraction:
    """Genus 1, one leaf: (1/24) T(empty loop, G- a) - (1/2) T([G-] loop, a)."""
    A = algebra
    (loop_graph,) = enumerate_graphs(1, (1,))
    (heavy_graph,) = enumerate_graphs(1, (0,))
    return (contribution(loop_graph, A, [apply(A.Gm, vector)])
            - contribution(heavy_graph, A, [vector], edge_op=A.Gm))
