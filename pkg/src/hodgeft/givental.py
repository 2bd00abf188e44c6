"""The TFT potential and the quantized upper-triangular Givental action.

For an even operator ``r`` of z-degree ``l`` the quantization is the sum of

* the shift          -sum_mu r(e_1)^mu d/dt_{l+1,mu},
* the linear part    sum t_{d,nu} r^mu_nu d/dt_{d+l,mu}, i.e. ``r`` is
                     applied to the vector at one insertion,
* the quadratic part (hbar/2) sum_i (-1)^{i+1} b^{mu nu} d_{i,mu} d_{l-1-i,nu}

with ``b = [r] = r eta^{-1}`` the bivector of :mod:`hodgeft.frobenius`; the
operator ``d_{l-1-i,nu}`` acts first.  Odd operators (G-, Q) are quantized
the same way.

All results are log-level tables: for an operator X the table of X exp(F)
is ``exp(-F) X exp(F)``.  The exponential exp(X) F is computed from the flow
``dW/ds = exp(-W) X exp(W)`` order by order in s.  Every term of X lowers
the defect 3g-3+n-sum(d) by at least one, so on a source with the 3g-2
property only finitely many orders contribute to each coefficient.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from .frobenius import (AlgebraError, HodgeAlgebra, Matrix, matmul,
                        operator_parity, zeros)
from .graphs import DecoratedGraph, t_contraction
from .psi import psi_integral
from .series import (ZERO, LogPotential, Potential, TruncationWindow,
                     defect, first_order_term, iter_keys, loop_term, shift_term,
                     split_term, tabulate)


class ConvergenceError(RuntimeError):
    """The operator exponential needed more orders than the iteration cap."""


# R-matrices --------------------------------------------------------------------


def adjoint(algebra: HodgeAlgebra, M: Matrix) -> Matrix:
    """eta-adjoint of an even operator: int M(a) b = int a M*(b)."""
    MT = [list(col) for col in zip(*M)]
    return matmul(algebra.eta_inverse, matmul(MT, algebra.eta))


@dataclass
class RMatrixSeries:
    """r_1, r_2, ... with R(z) = exp(sum r_l z^l).

    Each r_l is even; it is eta-symmetric for odd l and eta-skew for even l.
    """

    algebra: HodgeAlgebra
    terms: Dict[int, Matrix]

    def __post_init__(self):
        A = self.algebra
        clean = {}
        for l, r in sorted(self.terms.items()):
            if l < 1:
                raise AlgebraError(f"r_{l}: degrees start at 1")
            r = [[Fraction(x) for x in row] for row in r]
            if len(r) != A.s or any(len(row) != A.s for row in r):
                raise AlgebraError(f"r_{l} has the wrong size")
            if operator_parity(r, A.parity) == 1:
                raise AlgebraError(f"r_{l} must be even")
            kind = A.symmetry_type(r)
            want = "symmetric" if l % 2 else "skew"
            if kind not in (want, "zero"):
                raise AlgebraError(f"r_{l} must be eta-{want}")
            if kind != "zero":
                clean[l] = r
        self.terms = clean

    @classmethod
    def random(cls, algebra: HodgeAlgebra, seed: int, l_max: int = 2,
               spread: int = 3) -> "RMatrixSeries":
        rng = random.Random(seed)
        A = algebra
        terms = {}
        for l in range(1, l_max + 1):
            M = [[Fraction(rng.randint(-spread, spread)) if A.parity[r] == A.parity[c]
                  else Fraction(0) for c in range(A.s)] for r in range(A.s)]
            Ms = adjoint(A, M)
            sign = 1 if l % 2 else -1
            terms[l] = [[(x + sign * y) / 2 for x, y in zip(ra, rb)]
                        for ra, rb in zip(M, Ms)]
        return cls(A, terms)

    def to_json(self):
        def fr(x):
            return str(x)

        return {"terms": [{"l": l, "entries": [[self.algebra.names[c], self.algebra.names[r], fr(x)]
                                               for c in range(self.algebra.s)
                                               for r in range(self.algebra.s)
                                               if (x := m[r][c])]}
                          for l, m in sorted(self.terms.items())]}

    @classmethod
    def from_json(cls, algebra: HodgeAlgebra, data) -> "RMatrixSeries":
        index = {n: i for i, n in enumerate(algebra.names)}
        terms = {}
        try:
            for term in data["terms"]:
                m = zeros(algebra.s)
                for src, dst, x in term["entries"]:
                    m[index[dst]][index[src]] = Fraction(str(x))
                terms[int(term["l"])] = m
        except (KeyError, TypeError, ValueError) as exc:
            raise AlgebraError(f"bad R-matrix data: {exc}") from None
        return cls(algebra, terms)


# quantized operators -------------------------------------------------------------


class _LinearMap(Mapping):
    """u=(d, nu) -> [((d + l, mu), c * r[mu][nu])] for every d."""

    def __init__(self, parts):
        self.parts = parts  # list of (l, {nu: [(mu, x)]})

    def get(self, u, default=()):
        d, nu = u
        out = []
        for l, cols in self.parts:
            for mu, x in cols.get(nu, ()):
                out.append(((d + l, mu), x))
        return out or default

    def __getitem__(self, u):
        return self.get(u)

    def __iter__(self):
        return iter(())

    def __len__(self):
        return 0


@dataclass
class QuantizedOperator:
    """Tables for the three parts of a sum of quantized operators."""

    linear: _LinearMap
    shift: Dict[Tuple[int, int], Fraction]
    quadratic: Dict[Tuple[Tuple[int, int], Tuple[int, int]], Fraction]
    parity: int

    @property
    def is_zero(self) -> bool:
        return not (self.linear.parts or self.shift or self.quadratic)

    @property
    def degrees(self) -> Tuple[int, int]:
        """Smallest and largest l among the parts; each lowers the defect by l."""
        ls = [l for l, _ in self.linear.parts] or [0]
        return min(ls), max(ls)


def _shifted(support, lo, hi):
    if support is None:
        return None
    return support[0] + lo, support[1] + hi


def quantize(algebra: HodgeAlgebra, terms: Mapping[int, Matrix]) -> QuantizedOperator:
    """Quantization of sum_l r_l z^l."""
    A = algebra
    parts = []
    shift: Dict = {}
    quadratic: Dict = {}
    parities = set()
    for l, r in sorted(terms.items()):
        p = operator_parity(r, A.parity)
        if p is None:
            continue
        parities.add(p)
        cols = {}
        for nu in range(A.s):
            entries = [(mu, r[mu][nu]) for mu in range(A.s) if r[mu][nu]]
            if entries:
                cols[nu] = entries
        parts.append((l, cols))
        for mu in range(A.s):
            if r[mu][0]:
                key = (l + 1, mu)
                shift[key] = shift.get(key, ZERO) - r[mu][0]
        prop = A.propagator(r)
        # hbar/2 sum_{i+j=l-1} (-1)^(j+1) (r eta^-1)^{ab} d_{i,a} d_{j,b}
        for i in range(l):
            coeff = Fraction((-1) ** (l - i), 2)
            for a in range(A.s):
                for b in range(A.s):
                    x = prop[a][b]
                    if not x:
                        continue
                    if A.parity[a] and A.parity[b]:
                        x = -x
                    key = ((i, a), (l - 1 - i, b))
                    quadratic[key] = quadratic.get(key, ZERO) + coeff * x
    if len(parities) > 1:
        raise AlgebraError("mixed parities in one quantized operator")
    quadratic = {k: v for k, v in quadratic.items() if v}
    shift = {k: v for k, v in shift.items() if v}
    return QuantizedOperator(_LinearMap(parts), shift, quadratic,
                             parities.pop() if parities else 0)


class _Applied(Potential):
    """Lazy table of exp(-F) X exp(F) for a single quantized operator X."""

    def __init__(self, X: QuantizedOperator, F: Potential):
        self.X, self.F = X, F
        self.parity = F.parity
        self.total_parity = F.total_parity ^ X.parity
        self.defect_support = _shifted(F.defect_support, *X.degrees)
        self._memo = {}

    def coefficient(self, g, key):
        k = (g, key)
        if k not in self._memo:
            X, F = self.X, self.F
            value = first_order_term(F, X.linear, g, key)
            if X.shift:
                value += shift_term(F, X.shift, g, key)
            if X.quadratic:
                value += loop_term(F, X.quadratic, g, key)
                value += split_term(F, F, X.quadratic, g, key)
            self._memo[k] = value
        return self._memo[k]


def r_hat_apply(l: int, r: Matrix, F: Potential, window: TruncationWindow,
                algebra: HodgeAlgebra, indices=None) -> LogPotential:
    """Table of (r z^l)^ acting on exp(F), for keys in the window."""
    X = quantize(algebra, {l: r})
    return tabulate(_Applied(X, F), window, indices)


class _FlowOrder(Potential):
    """W^[k] in the expansion W(s) = sum s^k W^[k] of log(exp(sX) exp(F)).

    dW/ds = exp(-W) X exp(W) is linear in W for the shift and linear parts
    and quadratic for the hbar part, which gives the recursion.
    """

    def __init__(self, X: QuantizedOperator, lower: List[Potential], k: int):
        self.X = X
        self.lower = lower  # W^[0], ..., W^[k-1]
        self.k = k
        self.parity = lower[0].parity
        self.total_parity = lower[0].total_parity
        lo, hi = X.degrees
        self.defect_support = _shifted(lower[0].defect_support, k * lo, k * hi)
        self._memo = {}

    def coefficient(self, g, key):
        k = self.k
        if defect(g, key) < k:
            return ZERO
        memo_key = (g, key)
        if memo_key in self._memo:
            return self._memo[memo_key]
        X, prev = self.X, self.lower[k - 1]
        value = first_order_term(prev, X.linear, g, key)
        if X.shift:
            value += shift_term(prev, X.shift, g, key)
        if X.quadratic:
            value += loop_term(prev, X.quadratic, g, key)
            for a in range(k):
                value += split_term(self.lower[a], self.lower[k - 1 - a], X.quadratic, g, key)
        value /= k
        self._memo[memo_key] = value
        return value


class _FlowSum(Potential):
    def __init__(self, orders: List[Potential], cap: int):
        self.orders = orders
        self.cap = cap
        self.parity = orders[0].parity
        self.total_parity = orders[0].total_parity
        if len(orders) > 1:
            self.defect_support = _shifted(orders[0].defect_support, 0,
                                           cap * orders[1].X.degrees[1])
        else:
            self.defect_support = orders[0].defect_support

    def coefficient(self, g, key):
        top = defect(g, key)
        if top > self.cap:
            raise ConvergenceError(
                f"key (g={g}, {key}) needs {top} orders, cap is {self.cap}")
        total = self.orders[0].coefficient(g, key)
        for k in range(1, min(top, len(self.orders) - 1) + 1):
            total += self.orders[k].coefficient(g, key)
        return total


def exp_flow(X: QuantizedOperator, F: Potential, cap: int) -> Potential:
    orders: List[Potential] = [F]
    if not X.is_zero:
        for k in range(1, cap + 1):
            orders.append(_FlowOrder(X, orders, k))
    return _FlowSum(orders, cap)


def exp_op_apply(R: RMatrixSeries, F: Potential, window: TruncationWindow,
                 indices=None, cap: Optional[int] = None) -> LogPotential:
    """exp(sum_l (r_l z^l)^) applied to exp(F), tabulated in the window."""
    if cap is None:
        cap = 3 * window.g_max + window.n_max
    X = quantize(R.algebra, R.terms)
    if X.parity:
        raise AlgebraError("the exponent must be even")
    return tabulate(exp_flow(X, F, cap), window, indices)


# potentials -------------------------------------------------------------------


class TftPotential(Potential):
    """Z°: psi integral times the one-vertex contraction with g [Id]-loops."""

    defect_support = (0, 0)

    def __init__(self, algebra: HodgeAlgebra):
        self.algebra = algebra
        self.parity = algebra.parity
        self._memo = {}

    def coefficient(self, g, key):
        k = (g, key)
        if k not in self._memo:
            value = psi_integral(g, [d for d, _ in key])
            if value:
                graph = DecoratedGraph((g,), (), tuple((0, j + 1, d) for j, (d, _) in enumerate(key)))
                A = self.algebra
                value *= t_contraction(graph, A, [A.basis(i) for _, i in key])
            self._memo[k] = value
        return self._memo[k]


class PointPotential(Potential):
    """The Gromov-Witten potential of the point, from the psi oracle."""

    parity = (0,)
    defect_support = (0, 0)

    def coefficient(self, g, key):
        return psi_integral(g, [d for d, _ in key])


def tft_potential(algebra: HodgeAlgebra, window: TruncationWindow) -> LogPotential:
    return tabulate(TftPotential(algebra), window)


def hodge_operator(algebra: HodgeAlgebra) -> Matrix:
    """r_1 = -G- G+."""
    return [[-x for x in row] for row in algebra.GmGp()]


def hodge_potential(algebra: HodgeAlgebra, window: TruncationWindow,
                    source: Optional[Potential] = None) -> LogPotential:
    """exp(-(G- G+ z)^) Z° restricted to H0."""
    X = quantize(algebra, {1: hodge_operator(algebra)})
    flow = exp_flow(X, source or TftPotential(algebra), 3 * window.g_max + window.n_max)
    return tabulate(flow, window, algebra.h0_indices())


def nilpotent_potential(algebra: HodgeAlgebra, O: Matrix, window: TruncationWindow,
                        indices=None) -> LogPotential:
    """exp(-(O z)^) Z° for an even symmetric O; no restriction."""
    X = quantize(algebra, {1: [[-x for x in row] for row in O]})
    flow = exp_flow(X, TftPotential(algebra), 3 * window.g_max + window.n_max)
    return tabulate(flow, window, indices)


def _leaf_operator(algebra: HodgeAlgebra, A: Matrix) -> QuantizedOperator:
    cols = {}
    for nu in range(algebra.s):
        entries = [(mu, A[mu][nu]) for mu in range(algebra.s) if A[mu][nu]]
        if entries:
            cols[nu] = entries
    return QuantizedOperator(_LinearMap([(0, cols)]), {}, {},
                             operator_parity(A, algebra.parity) or 0)


def leaf_operator_apply(A: Matrix, F: Potential, window: TruncationWindow,
                        algebra: HodgeAlgebra) -> LogPotential:
    """The derivation sum t_{d,nu} A^mu_nu d/dt_{d,mu} on exp(F), tabulated."""
    return tabulate(_Applied(_leaf_operator(algebra, A), F), window)


def gminus_z_check(algebra: HodgeAlgebra, window: TruncationWindow):
    """Whether (G- z)^ Z° vanishes in the window; returns (ok, first failing key)."""
    X = quantize(algebra, {1: algebra.Gm})
    applied = _Applied(X, TftPotential(algebra))
    return _first_nonzero(applied, window, algebra.s)


def q_closed_check(algebra: HodgeAlgebra, window: TruncationWindow):
    """Whether the leaf action of Q annihilates Z°; returns (ok, first failure)."""
    applied = _Applied(_leaf_operator(algebra, algebra.Q), TftPotential(algebra))
    return _first_nonzero(applied, window, algebra.s)


def _first_nonzero(source, window, s):
    for g in range(window.g_max + 1):
        for key in iter_keys(window, range(s), source.parity, g, source.total_parity):
            value = source.coefficient(g, key)
            if value:
                return False, (g, key, value)
    return True, None
