"""Tautological-equation and theorem checks on correlator tables.

Every check is exact and quantified over all in-window keys; a report
collects every failure rather than stopping at the first one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .frobenius import HodgeAlgebra
from .givental import RMatrixSeries, exp_op_apply, hodge_potential
from .graphs import graph_sum_potential, seven_term_graph_sum, twelfth_graph_sum
from .series import (ZERO, LogPotential, Potential, TruncationWindow, defect,
                     is_stable, iter_keys, shuffle_sign)

Failure = Tuple[int, tuple, Fraction, Fraction]


@dataclass
class CheckReport:
    """Outcome of one check; ``failures`` holds (g, key, lhs, rhs)."""

    name: str
    failures: List[Failure] = field(default_factory=list)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def add(self, g, key, lhs, rhs):
        self.checked += 1
        if lhs != rhs:
            self.failures.append((g, tuple(key), Fraction(lhs), Fraction(rhs)))

    def lines(self) -> List[str]:
        head = f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.checked} identities"
        head += f", {len(self.failures)} failing)"
        out = [head]
        for g, key, lhs, rhs in self.failures:
            body = "".join(f"({d},{i + 1})" for d, i in key)
            out.append(f"  g={g} {body}: {lhs} != {rhs}")
        return out

    def __str__(self):
        return "\n".join(self.lines())


def _indices(F: Potential, indices):
    return range(F.rank) if indices is None else sorted(indices)


def _window(F: Potential, window):
    w = window if window is not None else getattr(F, "window", None)
    if w is None:
        raise ValueError("a window is required for a lazy potential")
    return w


def _keys(F, window, indices, min_defect=0):
    for g in range(window.g_max + 1):
        for key in iter_keys(window, indices, F.parity, g, F.total_parity, min_defect):
            yield g, key


def check_string(F: Potential, eta, window: Optional[TruncationWindow] = None,
                 indices=None, unit: int = 0) -> CheckReport:
    """<tau_0(1) prod tau_{d_j}>_g = sum_j <... tau_{d_j - 1} ...>_g and the
    genus-0 base case <tau_0(1) tau_0(e_i) tau_0(e_j)>_0 = eta_ij."""
    window = _window(F, window)
    idx = _indices(F, indices)
    report = CheckReport("string")
    # prepending tau_0 raises the defect by one
    for g, key in _keys(F, window, idx, min_defect=-1):
        if len(key) + 1 > window.n_max:
            continue
        lhs = F.derivative(g, ((0, unit),) + key)
        if not is_stable(g, len(key)):
            if g == 0 and len(key) == 2 and key[0][0] == key[1][0] == 0:
                report.add(g, ((0, unit),) + key, lhs, eta[key[0][1]][key[1][1]])
            continue
        rhs = ZERO
        for j, (d, i) in enumerate(key):
            if d:
                rhs += F.derivative(g, key[:j] + ((d - 1, i),) + key[j + 1:])
        report.add(g, ((0, unit),) + key, lhs, rhs)
    return report


def check_dilaton(F: Potential, window: Optional[TruncationWindow] = None,
                  indices=None, unit: int = 0) -> CheckReport:
    """<tau_1(1) prod_{j=1}^n tau_{d_j}>_g = (2g - 2 + n) <prod tau_{d_j}>_g."""
    window = _window(F, window)
    idx = _indices(F, indices)
    report = CheckReport("dilaton")
    for g, key in _keys(F, window, idx):
        n = len(key)
        if n < 1 or n + 1 > window.n_max or window.d_max < 1:
            continue
        lhs = F.derivative(g, ((1, unit),) + key)
        rhs = (2 * g - 2 + n) * F.derivative(g, key)
        report.add(g, ((1, unit),) + key, lhs, rhs)
    return report


def _casimir(eta, indices):
    """Pairs (alpha, beta, c) of the inverse of eta restricted to ``indices``."""
    from .frobenius import inverse
    idx = list(indices)
    sub = [[Fraction(eta[a][b]) for b in idx] for a in idx]
    inv = inverse(sub)
    return [(idx[r], idx[c], inv[r][c]) for r in range(len(idx))
            for c in range(len(idx)) if inv[r][c]]


def check_trr0(F: Potential, eta, window: Optional[TruncationWindow] = None,
               indices=None) -> CheckReport:
    """Genus-0 topological recursion at correlator level:

        <tau_{a+1}(x) tau_b(y) tau_c(z) S>_0
            = sum_{S1 + S2 = S} sum eta^{alpha beta}
              <tau_a(x) S1 tau_0(e_alpha)>_0 <tau_0(e_beta) tau_b(y) tau_c(z) S2>_0

    with the Koszul sign of (x, y, z, S) -> (x, S1, y, z, S2); the pair
    (e_alpha, e_beta) is even and needs no sign.
    """
    window = _window(F, window)
    idx = _indices(F, indices)
    parity = F.parity
    cas = _casimir(eta, idx)
    report = CheckReport("trr0")
    seen = set()
    for key in iter_keys(window, idx, parity, 0, F.total_parity):
        n = len(key)
        if n < 3:
            continue
        # choose x (with positive degree), then y, z, rest S in key order
        for px in range(n):
            a1, i = key[px]
            if a1 < 1:
                continue
            rest = key[:px] + key[px + 1:]
            for py, pz in itertools.combinations(range(n - 1), 2):
                y, z = rest[py], rest[pz]
                S = tuple(rest[k] for k in range(n - 1) if k not in (py, pz))
                seq = ((a1, i), y, z) + S
                sig = (seq[0], y, z, S)
                if sig in seen:
                    continue
                seen.add(sig)
                lhs = F.derivative(0, seq)
                rhs = ZERO
                odd = [parity[u[1]] for u in seq]
                m = len(S)
                for mask in range(1 << m):
                    left = [k for k in range(m) if mask >> k & 1]
                    right = [k for k in range(m) if not mask >> k & 1]
                    # positions in seq: 0 = x, 1 = y, 2 = z, 3 + k = S[k]
                    perm = [0] + [3 + k for k in left] + [1, 2] + [3 + k for k in right]
                    sign = shuffle_sign(odd, perm)
                    S1 = tuple(S[k] for k in left)
                    S2 = tuple(S[k] for k in right)
                    if not is_stable(0, len(S1) + 2) or not is_stable(0, len(S2) + 3):
                        continue
                    for al, be, c in cas:
                        u = F.derivative(0, ((a1 - 1, i),) + S1 + ((0, al),))
                        if not u:
                            continue
                        v = F.derivative(0, ((0, be), y, z) + S2)
                        if v:
                            rhs += sign * c * u * v
                report.add(0, seq, lhs, rhs)
    return report


def check_3g2(F: LogPotential) -> CheckReport:
    """Every stored coefficient with sum d_j > 3g - 3 + n must vanish."""
    report = CheckReport("3g2")
    for (g, key), value in F.items():
        report.checked += 1
        if defect(g, key) < 0 and value:
            report.failures.append((g, key, value, ZERO))
    return report


def check_equivalence(algebra: HodgeAlgebra, window: TruncationWindow,
                      mapper=map) -> CheckReport:
    """Key-by-key equality of the graph sum and the operator potential."""
    report = CheckReport("equivalence")
    graph = graph_sum_potential(algebra, window, mapper=mapper)
    operator = hodge_potential(algebra, window)
    report.checked = len(set(graph.entries) | set(operator.entries))
    for (g, key), lhs, rhs in graph.differences(operator):
        report.failures.append((g, key, lhs, rhs))
    return report


def tautological_checks(F: LogPotential, eta, indices=None) -> List[CheckReport]:
    return [check_string(F, eta, indices=indices),
            check_dilaton(F, indices=indices),
            check_trr0(F, eta, indices=indices),
            check_3g2(F)]


def check_givental_invariance(F: Potential, R: RMatrixSeries,
                              window: TruncationWindow, indices=None) -> CheckReport:
    """Apply exp(R^) to F and rerun string, dilaton, TRR-0 and 3g-2."""
    image = exp_op_apply(R, F, window, indices)
    report = CheckReport("givental-invariance")
    for sub in tautological_checks(image, R.algebra.eta, indices):
        report.checked += sub.checked
        report.failures.extend(sub.failures)
    return report


def seven_term_vanishes(algebra: HodgeAlgebra) -> CheckReport:
    """The genus-0 four-leaf graph identity on every basis quadruple."""
    A = algebra
    report = CheckReport("seven-term-graphs")
    for quad in itertools.product(range(A.s), repeat=4):
        value = seven_term_graph_sum(A, [A.basis(i) for i in quad])
        report.add(0, tuple((0, i) for i in quad), value, ZERO)
    return report


def twelfth_vanishes(algebra: HodgeAlgebra) -> CheckReport:
    """The genus-1 one-leaf graph identity on every basis vector."""
    A = algebra
    report = CheckReport("twelfth-graphs")
    for i in range(A.s):
        report.add(1, ((0, i),), twelfth_graph_sum(A, A.basis(i)), ZERO)
    return report
