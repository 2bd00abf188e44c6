"""Z2-graded Frobenius algebras with Hodge operators Q, G-, G+.

Vectors are lists of Fractions in the chosen basis; operators are square
matrices ``M`` acting on column vectors, so ``M[r][c]`` is the coefficient
of ``e_r`` in ``M(e_c)``.  The unit is basis vector 0.

Koszul convention.  Tensors are multilinear forms; evaluating a form on
arguments taken out of their reference order multiplies by the sign of the
graded permutation.  Bivectors are stored as ``{(a, b): coefficient}``; the
bivector of an operator A is [A]^{ab} = (A eta^{-1})^{ab}, so that gluing
one factor against a vector y with the integral returns A(y).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

Matrix = List[List[Fraction]]
Vector = List[Fraction]


class AlgebraError(ValueError):
    """Malformed algebra data: sizes, parity violations, parse errors."""


def zeros(s: int) -> Matrix:
    return [[Fraction(0)] * s for _ in range(s)]


def identity(s: int) -> Matrix:
    m = zeros(s)
    for i in range(s):
        m[i][i] = Fraction(1)
    return m


def matmul(a: Matrix, b: Matrix) -> Matrix:
    s = len(a)
    out = zeros(s)
    for i in range(s):
        row = a[i]
        for k in range(s):
            if row[k]:
                bk = b[k]
                for j in range(s):
                    if bk[j]:
                        out[i][j] += row[k] * bk[j]
    return out


def matadd(a: Matrix, b: Matrix, scale: int = 1) -> Matrix:
    return [[x + scale * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def apply(m: Matrix, v: Vector) -> Vector:
    return [sum((m[r][c] * v[c] for c in range(len(v)) if v[c]), Fraction(0))
            for r in range(len(m))]


def rank(m: Matrix) -> int:
    rows = [list(r) for r in m]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def inverse(m: Matrix) -> Matrix:
    s = len(m)
    aug = [list(m[i]) + identity(s)[i] for i in range(s)]
    for c in range(s):
        pivot = next((i for i in range(c, s) if aug[i][c]), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[c], aug[pivot] = aug[pivot], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(s):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[s:] for row in aug]


def determinant(m: Matrix) -> Fraction:
    rows = [list(r) for r in m]
    s = len(rows)
    det = Fraction(1)
    for c in range(s):
        pivot = next((i for i in range(c, s) if rows[i][c]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            rows[c], rows[pivot] = rows[pivot], rows[c]
            det = -det
        det *= rows[c][c]
        for i in range(c + 1, s):
            if rows[i][c]:
                f = rows[i][c] / rows[c][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return det


def operator_parity(m: Matrix, parity: Sequence[int]):
    """0 or 1 for homogeneous operators, None for the zero matrix."""
    seen = set()
    for r, row in enumerate(m):
        for c, x in enumerate(row):
            if x:
                seen.add((parity[r] + parity[c]) % 2)
    if len(seen) > 1:
        raise AlgebraError("operator is not homogeneous")
    return seen.pop() if seen else None


def supertrace(m: Matrix, parity: Sequence[int]) -> Fraction:
    return sum((m[i][i] if not parity[i] else -m[i][i] for i in range(len(m))),
               Fraction(0))


@dataclass
class AxiomReport:
    """Outcome per axiom; ``witness`` holds a failing basis tuple or detail."""

    results: Dict[str, bool] = field(default_factory=dict)
    witness: Dict[str, tuple] = field(default_factory=dict)

    def record(self, name: str, ok: bool, witness=None):
        prev = self.results.get(name, True)
        self.results[name] = prev and ok
        if not ok and name not in self.witness:
            self.witness[name] = witness

    @property
    def passed(self) -> bool:
        return all(self.results.values())

    def __getitem__(self, name):
        return self.results[name]

    def lines(self):
        for name in sorted(self.results):
            mark = "pass" if self.results[name] else "FAIL"
            extra = "" if self.results[name] else f"  witness={self.witness.get(name)}"
            yield f"{name}: {mark}{extra}"


class HodgeAlgebra:
    """Finite-dimensional cyclic Hodge algebra data.

    ``mult[i][j]`` is the vector ``e_i e_j``.  ``integral`` is the covector
    of the integral.  ``Q``, ``Gm``, ``Gp`` are odd matrices.
    """

    def __init__(self, names: Sequence[str], parity: Sequence[int],
                 mult: Sequence[Sequence[Vector]], integral: Vector,
                 Q: Matrix, Gm: Matrix, Gp: Matrix, name: str = "algebra"):
        s = len(names)
        if s < 1 or len(parity) != s:
            raise AlgebraError("basis names and parities differ in length")
        if parity[0] != 0:
            raise AlgebraError("the unit e_1 must be even")
        if len(set(names)) != s:
            raise AlgebraError("duplicate basis names")
        self.name = name
        self.names = list(names)
        self.parity = tuple(int(p) for p in parity)
        self.s = s
        self.mult = [[[Fraction(x) for x in mult[i][j]] for j in range(s)]
                     for i in range(s)]
        self.integral = [Fraction(x) for x in integral]
        self.Q = [[Fraction(x) for x in row] for row in Q]
        self.Gm = [[Fraction(x) for x in row] for row in Gm]
        self.Gp = [[Fraction(x) for x in row] for row in Gp]
        for label, m in (("Q", self.Q), ("Gm", self.Gm), ("Gp", self.Gp)):
            if len(m) != s or any(len(r) != s for r in m):
                raise AlgebraError(f"{label} has the wrong size")
            if operator_parity(m, self.parity) == 0:
                raise AlgebraError(f"{label} must be odd")
        if len(self.integral) != s or any(len(v) != s for row in self.mult for v in row):
            raise AlgebraError("dimension mismatch in products or integral")
        for i, j in itertools.product(range(s), repeat=2):
            for k, x in enumerate(self.mult[i][j]):
                if x and (self.parity[i] + self.parity[j] + self.parity[k]) % 2:
                    raise AlgebraError(f"product {names[i]}*{names[j]} breaks parity")
        if any(x and self.parity[i] for i, x in enumerate(self.integral)):
            raise AlgebraError("the integral must be even")
        self._sparse = [[[(k, x) for k, x in enumerate(self.mult[i][j]) if x]
                         for j in range(s)] for i in range(s)]
        self._eta = None
        self._eta_inv = None

    # basic operations ------------------------------------------------------

    def basis(self, i: int) -> Vector:
        v = [Fraction(0)] * self.s
        v[i] = Fraction(1)
        return v

    def vector(self, mapping: Dict[int, Fraction]) -> Vector:
        v = [Fraction(0)] * self.s
        for i, x in mapping.items():
            v[i] += x
        return v

    def mul(self, u: Vector, v: Vector) -> Vector:
        out = [Fraction(0)] * self.s
        for i, x in enumerate(u):
            if not x:
                continue
            row = self._sparse[i]
            for j, y in enumerate(v):
                if not y:
                    continue
                xy = x * y
                for k, c in row[j]:
                    out[k] += xy * c
        return out

    def integrate(self, v: Vector) -> Fraction:
        return sum((x * y for x, y in zip(self.integral, v) if x and y), Fraction(0))

    def vector_parity(self, v: Vector):
        ps = {self.parity[i] for i, x in enumerate(v) if x}
        if len(ps) > 1:
            raise AlgebraError("vector is not homogeneous")
        return ps.pop() if ps else 0

    @property
    def eta(self) -> Matrix:
        if self._eta is None:
            self._eta = [[self.integrate(self.mult[i][j]) for j in range(self.s)]
                         for i in range(self.s)]
        return self._eta

    @property
    def eta_inverse(self) -> Matrix:
        if self._eta_inv is None:
            self._eta_inv = inverse(self.eta)
        return self._eta_inv

    def multiplication_operator(self, v: Vector) -> Matrix:
        m = zeros(self.s)
        for c in range(self.s):
            col = self.mul(v, self.basis(c))
            for r in range(self.s):
                m[r][c] = col[r]
        return m

    def Pi4(self) -> Matrix:
        return matadd(matmul(self.Q, self.Gp), matmul(self.Gp, self.Q))

    def Pi0(self) -> Matrix:
        return matadd(identity(self.s), self.Pi4(), -1)

    def h0_indices(self) -> List[int]:
        """Leading basis indices spanning H0 = ker Pi4."""
        p4 = self.Pi4()
        out = []
        for i in range(self.s):
            if any(p4[r][i] for r in range(self.s)):
                break
            out.append(i)
        return out

    def GmGp(self) -> Matrix:
        return matmul(self.Gm, self.Gp)

    def J(self) -> Matrix:
        m = identity(self.s)
        for i in range(self.s):
            if self.parity[i]:
                m[i][i] = Fraction(-1)
        return m

    # symmetry and bivectors -----------------------------------------------

    def symmetry_type(self, A: Matrix):
        """'symmetric', 'skew', 'zero', or None for no definite type.

        A of parity p is symmetric when int A(a) b = (-1)^{p p(a)} int a A(b).
        """
        p = operator_parity(A, self.parity)
        if p is None:
            return "zero"
        sym = skew = True
        for i, j in itertools.product(range(self.s), repeat=2):
            lhs = self.integrate(self.mul(apply(A, self.basis(i)), self.basis(j)))
            rhs = self.integrate(self.mul(self.basis(i), apply(A, self.basis(j))))
            if p and self.parity[i]:
                rhs = -rhs
            if lhs != rhs:
                sym = False
            if lhs != -rhs:
                skew = False
        if sym:
            return "symmetric"
        if skew:
            return "skew"
        return None

    def propagator(self, A: Matrix) -> Matrix:
        """The matrix A eta^{-1}, without any symmetry requirement."""
        return matmul(A, self.eta_inverse)

    def bivector_of(self, A: Matrix) -> Dict[Tuple[int, int], Fraction]:
        """[A] = (A (x) id) eta^{-1} for an operator of definite symmetry type."""
        if self.symmetry_type(A) is None:
            raise AlgebraError("operator has no definite symmetry type")
        prod = self.propagator(A)
        return {(a, b): prod[a][b] for a in range(self.s) for b in range(self.s)
                if prod[a][b]}

    def operator_of(self, bivector: Dict[Tuple[int, int], Fraction]) -> Matrix:
        """Inverse of :meth:`bivector_of`: contract back with eta."""
        m = zeros(self.s)
        for (a, b), x in bivector.items():
            for c in range(self.s):
                if self.eta[b][c]:
                    m[a][c] += x * self.eta[b][c]
        return m

    # serialization ------------------------------------------------------------

    def to_json(self) -> dict:
        def fr(x):
            return str(x)

        products = []
        for i in range(1, self.s):
            for j in range(i, self.s):
                entries = {self.names[k]: fr(x) for k, x in enumerate(self.mult[i][j]) if x}
                if entries:
                    products.append([self.names[i], self.names[j], entries])

        def ops(m):
            return [[self.names[c], self.names[r], fr(m[r][c])]
                    for c in range(self.s) for r in range(self.s) if m[r][c]]

        return {
            "name": self.name,
            "basis": [{"name": n, "parity": p} for n, p in zip(self.names, self.parity)],
            "products": products,
            "integral": {self.names[i]: fr(x) for i, x in enumerate(self.integral) if x},
            "Q": ops(self.Q),
            "Gm": ops(self.Gm),
            "Gp": ops(self.Gp),
        }

    def canonical_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]

    @classmethod
    def from_json(cls, data: dict) -> "HodgeAlgebra":
        try:
            basis = data["basis"]
            names = [b["name"] for b in basis]
            parity = [int(b["parity"]) for b in basis]
        except (KeyError, TypeError) as exc:
            raise AlgebraError(f"bad basis section: {exc}") from None
        s = len(names)
        index = {n: i for i, n in enumerate(names)}

        def idx(name):
            if name not in index:
                raise AlgebraError(f"unknown basis element {name!r}")
            return index[name]

        def num(x):
            try:
                return Fraction(str(x))
            except (ValueError, ZeroDivisionError):
                raise AlgebraError(f"bad rational {x!r}") from None

        mult = [[[Fraction(0)] * s for _ in range(s)] for _ in range(s)]
        for i in range(s):
            mult[0][i][i] = Fraction(1)
            mult[i][0][i] = Fraction(1)
        for entry in data.get("products", []):
            if len(entry) != 3:
                raise AlgebraError(f"bad product entry {entry!r}")
            a, b, vec = idx(entry[0]), idx(entry[1]), entry[2]
            v = [Fraction(0)] * s
            for k, x in vec.items():
                v[idx(k)] = num(x)
            sign = -1 if parity[a] and parity[b] else 1
            mult[a][b] = v
            mult[b][a] = [sign * x for x in v]

        def matrix(entries):
            m = zeros(s)
            for entry in entries:
                if len(entry) != 3:
                    raise AlgebraError(f"bad operator entry {entry!r}")
                src, dst, x = entry
                m[idx(dst)][idx(src)] = num(x)
            return m

        integral = [Fraction(0)] * s
        for k, x in data.get("integral", {}).items():
            integral[idx(k)] = num(x)
        return cls(names, parity, mult, integral,
                   matrix(data.get("Q", [])), matrix(data.get("Gm", [])),
                   matrix(data.get("Gp", [])), name=data.get("name", "algebra"))

    @classmethod
    def load(cls, path) -> "HodgeAlgebra":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise AlgebraError(
                    f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_json(data)

    def with_changes(self, **kw) -> "HodgeAlgebra":
        args = dict(names=self.names, parity=self.parity, mult=self.mult,
                    integral=self.integral, Q=self.Q, Gm=self.Gm, Gp=self.Gp,
                    name=self.name)
        args.update(kw)
        return HodgeAlgebra(**args)


def trivial_algebra() -> HodgeAlgebra:
    z = [[Fraction(0)]]
    return HodgeAlgebra(["1"], [0], [[[Fraction(1)]]], [Fraction(1)], z, z, z,
                        name="trivial")


# axioms -----------------------------------------------------------------------


def check_axioms(A: HodgeAlgebra) -> AxiomReport:
    rep = AxiomReport()
    s, par = A.s, A.parity
    E = [A.basis(i) for i in range(s)]
    mul, integ = A.mul, A.integrate

    def Qv(v):
        return apply(A.Q, v)

    def Gv(v):
        return apply(A.Gm, v)

    def neg(v):
        return [-x for x in v]

    def add(*vs):
        return [sum(xs, Fraction(0)) for xs in zip(*vs)]

    def sg(e, v):
        return neg(v) if e % 2 else v

    # Frobenius structure: unit, supercommutativity, associativity.
    for i in range(s):
        rep.record("F", mul(E[0], E[i]) == E[i] and mul(E[i], E[0]) == E[i], ("unit", i))
    for i, j in itertools.product(range(s), repeat=2):
        rep.record("F", mul(E[i], E[j]) == sg(par[i] * par[j], mul(E[j], E[i])),
                   ("commutativity", i, j))
    for i, j, k in itertools.product(range(s), repeat=3):
        rep.record("F", mul(mul(E[i], E[j]), E[k]) == mul(E[i], mul(E[j], E[k])),
                   ("associativity", i, j, k))

    # A1 bicomplex
    zero = zeros(s)
    rep.record("A1", matmul(A.Q, A.Q) == zero, "Q^2")
    rep.record("A1", matmul(A.Gm, A.Gm) == zero, "Gm^2")
    rep.record("A1", matadd(matmul(A.Q, A.Gm), matmul(A.Gm, A.Q)) == zero, "[Q,Gm]")

    # A2 Hodge decomposition with the given G+
    p4, p0 = A.Pi4(), A.Pi0()
    rep.record("A2", matmul(p4, p4) == p4, "Pi4 not a projector")
    rep.record("A2", matmul(A.Gp, p0) == zero, "G+ H0 != 0")
    rep.record("A2", matmul(p0, A.Gp) == zero, "G+ leaves H4")
    rep.record("A2", matmul(A.Gp, A.Gp) == zero, "G+^2")
    rep.record("A2", matadd(matmul(A.Gm, A.Gp), matmul(A.Gp, A.Gm)) == zero, "[Gm,G+]")
    rep.record("A2", matmul(A.Q, p0) == zero and matmul(A.Gm, p0) == zero, "Q H0, Gm H0")
    rep.record("A2", matmul(p0, A.Q) == zero and matmul(p0, A.Gm) == zero, "blocks not invariant")
    rep.record("A2", 4 * rank(matmul(matmul(A.Q, A.Gm), p4)) == rank(p4), "H4 not a sum of blocks")
    rep.record("A2", not any(p4[r][0] for r in range(s)), "unit not in H0")
    h0 = len(A.h0_indices())
    rep.record("A2", all(not any(p0[r][c] for r in range(s)) for c in range(h0, s)),
               "basis must list H0 first")

    # A3 Leibniz rule for Q
    for i, j in itertools.product(range(s), repeat=2):
        lhs = Qv(mul(E[i], E[j]))
        rhs = add(mul(Qv(E[i]), E[j]), sg(par[i], mul(E[i], Qv(E[j]))))
        rep.record("A3", lhs == rhs, (A.names[i], A.names[j]))

    # A4 seven-term relation
    for i, j, k in itertools.product(range(s), repeat=3):
        a, b, c = E[i], E[j], E[k]
        pa, pb = par[i], par[j]
        lhs = Gv(mul(mul(a, b), c))
        rhs = add(mul(Gv(mul(a, b)), c),
                  sg(pb * (pa + 1), mul(b, Gv(mul(a, c)))),
                  sg(pa, mul(a, Gv(mul(b, c)))),
                  neg(mul(mul(Gv(a), b), c)),
                  neg(sg(pa, mul(mul(a, Gv(b)), c))),
                  neg(sg(pa + pb, mul(mul(a, b), Gv(c)))))
        rep.record("A4", lhs == rhs, (A.names[i], A.names[j], A.names[k]))

    # A5 the 1/12 axiom
    for i in range(s):
        lhs = supertrace(matmul(A.Gm, A.multiplication_operator(E[i])), par)
        rhs = supertrace(A.multiplication_operator(Gv(E[i])), par) / 12
        rep.record("A5", lhs == rhs, (A.names[i], lhs, rhs))

    # A6 adjointness
    for i, j in itertools.product(range(s), repeat=2):
        a, b = E[i], E[j]
        pa = par[i]
        rep.record("A6", integ(mul(Qv(a), b)) == (-1) ** (pa + 1) * integ(mul(a, Qv(b))),
                   ("Q", A.names[i], A.names[j]))
        rep.record("A6", integ(mul(Gv(a), b)) == (-1) ** pa * integ(mul(a, Gv(b))),
                   ("Gm", A.names[i], A.names[j]))
        rep.record("A6", integ(mul(apply(A.Gp, a), b)) == (-1) ** pa * integ(mul(a, apply(A.Gp, b))),
                   ("Gp", A.names[i], A.names[j]))

    # A7 non-degenerate pairing
    rep.record("A7", determinant(A.eta) != 0, "det eta = 0")
    return rep
