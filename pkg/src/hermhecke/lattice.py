"""Matrices over E, local Smith normal form and the Cartan invariant.

A matrix g stands for the lattice g*O_E^n.  Everything here is exact.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

from .field import INFINITY, LocalField, LocalScalar


class SingularMatrixError(ValueError):
    pass


class NotUnimodularError(ValueError):
    """Raised when a matrix that should lie in SL_n(E) has det != 1."""


class MatrixE:
    """Immutable square matrix with LocalScalar entries."""

    __slots__ = ("field", "rows")

    def __init__(self, field: LocalField, rows: Sequence[Sequence[LocalScalar]]):
        self.field = field
        self.rows = tuple(tuple(r) for r in rows)
        if any(len(r) != len(self.rows) for r in self.rows):
            raise ValueError("MatrixE must be square")

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @classmethod
    def identity(cls, field: LocalField, n: int) -> "MatrixE":
        z, o = field.zero, field.one
        return cls(field, [[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, field: LocalField, entries: Sequence[LocalScalar]) -> "MatrixE":
        n = len(entries)
        z = field.zero
        return cls(field, [[entries[i] if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def t_power_diagonal(cls, field: LocalField, exponents: Sequence[int]) -> "MatrixE":
        """pi^lambda = diag(t^lambda_1, ..., t^lambda_n)."""
        return cls.diagonal(field, [field.t_power(e) for e in exponents])

    def __matmul__(self, other: "MatrixE") -> "MatrixE":
        n = self.n
        cols = list(zip(*other.rows))
        zero = self.field.zero
        out = []
        for row in self.rows:
            out_row = []
            for col in cols:
                acc = zero
                for a, b in zip(row, col):
                    if a.num and b.num:
                        acc = acc + a * b
                out_row.append(acc)
            out.append(out_row)
        return MatrixE(self.field, out)

    def scale(self, c: LocalScalar) -> "MatrixE":
        return MatrixE(self.field, [[c * x for x in r] for r in self.rows])

    def transpose(self) -> "MatrixE":
        return MatrixE(self.field, list(zip(*self.rows)))

    def galois(self) -> "MatrixE":
        return MatrixE(self.field, [[x.galois() for x in r] for r in self.rows])

    def conj_transpose(self) -> "MatrixE":
        """tau(g^t)."""
        return MatrixE(self.field, [[x.galois() for x in r] for r in zip(*self.rows)])

    def min_valuation(self):
        return min(x.valuation() for r in self.rows for x in r)

    def is_diagonal(self) -> bool:
        return all(not self.rows[i][j] for i in range(self.n) for j in range(self.n) if i != j)

    def det(self) -> LocalScalar:
        return determinant(self.rows, self.field)

    def inverse(self) -> "MatrixE":
        n = self.n
        F = self.field
        aug = [list(r) + [F.one if i == j else F.zero for j in range(n)] for i, r in enumerate(self.rows)]
        for c in range(n):
            piv = next((r for r in range(c, n) if aug[r][c]), None)
            if piv is None:
                raise SingularMatrixError("matrix is singular")
            aug[c], aug[piv] = aug[piv], aug[c]
            inv = aug[c][c].inverse()
            aug[c] = [x * inv for x in aug[c]]
            for r in range(n):
                if r != c and aug[r][c]:
                    f = aug[r][c]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
        return MatrixE(F, [r[n:] for r in aug])

    def __eq__(self, other):
        return isinstance(other, MatrixE) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "MatrixE([" + ", ".join("[" + ", ".join(map(repr, r)) + "]" for r in self.rows) + "])"

    def to_json(self) -> list:
        return [[x.to_json() for x in r] for r in self.rows]

    @classmethod
    def from_json(cls, field: LocalField, obj) -> "MatrixE":
        rows = [[field.from_json(x) for x in r] for r in obj]
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ValueError("matrix JSON must be a non-empty square array")
        return cls(field, rows)


def determinant(rows, field: LocalField) -> LocalScalar:
    a = [list(r) for r in rows]
    n = len(a)
    det = field.one
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return field.zero
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        p = a[c][c]
        det = det * p
        inv = p.inverse()
        for r in range(c + 1, n):
            if a[r][c]:
                f = a[r][c] * inv
                a[r] = [x - f * y if y else x for x, y in zip(a[r], a[c])]
    return det


# -- Smith normal form over O_E ------------------------------------------------


@dataclass(frozen=True)
class SmithForm:
    """left @ g @ right == diag(t^e_1, ..., t^e_n), e ascending.

    ``left`` and ``right`` have integral entries and unit determinant.
    """

    exponents: tuple[int, ...]
    left: MatrixE | None = None
    right: MatrixE | None = None


def _signed_swap_rows(a, i, j):
    if i != j:
        a[i], a[j] = [-x for x in a[j]], a[i]


def smith_form(g: MatrixE, witness: bool = False) -> SmithForm:
    """Local Smith form by minimum-valuation pivoting.

    Only elementary operations with integral multipliers and signed swaps are
    used, so the transforms lie in SL_n(O_E) until the final unit scaling.
    """
    F = g.field
    n = g.n
    a = [list(r) for r in g.rows]
    L = [list(r) for r in MatrixE.identity(F, n).rows] if witness else None
    # right transform accumulated as its transpose so column ops become row ops
    Rt = [list(r) for r in MatrixE.identity(F, n).rows] if witness else None
    for p in range(n):
        best, bi, bj = INFINITY, -1, -1
        for i in range(p, n):
            row = a[i]
            for j in range(p, n):
                x = row[j]
                if x.num:
                    v = x.valuation()
                    if v < best:
                        best, bi, bj = v, i, j
        if bi < 0:
            raise SingularMatrixError("matrix is singular")
        if bi != p:
            _signed_swap_rows(a, p, bi)
            if witness:
                _signed_swap_rows(L, p, bi)
        if bj != p:
            for row in a:
                row[p], row[bj] = -row[bj], row[p]
            if witness:
                _signed_swap_rows(Rt, p, bj)
        inv = a[p][p].inverse()
        for i in range(p + 1, n):
            if a[i][p].num:
                f = a[i][p] * inv
                a[i] = [x - f * y if y.num else x for x, y in zip(a[i], a[p])]
                if witness:
                    L[i] = [x - f * y for x, y in zip(L[i], L[p])]
        for j in range(p + 1, n):
            if a[p][j].num:
                f = a[p][j] * inv
                a[p][j] = F.zero
                if witness:
                    Rt[j] = [x - f * y for x, y in zip(Rt[j], Rt[p])]
    exps = tuple(a[i][i].valuation() for i in range(n))
    if not witness:
        return SmithForm(exps)
    # strip unit parts: diag(u_i t^e_i) -> diag(t^e_i) by scaling the left rows
    for i in range(n):
        unit = a[i][i] * F.t_power(-exps[i])
        uinv = unit.inverse()
        L[i] = [uinv * x for x in L[i]]
    return SmithForm(exps, MatrixE(F, L), MatrixE(F, Rt).transpose())


def smith_invariants(g: MatrixE) -> tuple[int, ...]:
    """Elementary-divisor exponents e_1 <= ... <= e_n of g over O_E."""
    return smith_form(g).exponents


def all_minors(rows, k: int, field: LocalField):
    n = len(rows)
    for R in itertools.combinations(range(n), k):
        for C in itertools.combinations(range(n), k):
            yield (R, C), determinant([[rows[i][j] for j in C] for i in R], field)


def min_minor_valuation(g: MatrixE, k: int):
    """Minimum valuation over all k x k minors of g."""
    if not 1 <= k <= g.n:
        raise ValueError(f"minor size k={k} out of range 1..{g.n}")
    return min(m.valuation() for _, m in all_minors(g.rows, k, g.field))


def lattice_index(g1: MatrixE, g2: MatrixE) -> int:
    """[L1:L2] for L_i = g_i O_E^n, in units of log_{q_E}."""
    return sum(smith_invariants(g1.inverse() @ g2))


def in_K0(g: MatrixE) -> bool:
    """Membership in SL_n(O_E)."""
    if any(x.valuation() < 0 for r in g.rows for x in r):
        return False
    return g.det() == g.field.one


def in_GL_O(g: MatrixE) -> bool:
    if any(x.valuation() < 0 for r in g.rows for x in r):
        return False
    return g.det().valuation() == 0


@dataclass(frozen=True)
class CartanDecomposition:
    """k1 @ g @ k2 == pi^coordinate with k1, k2 in K_0."""

    coordinate: tuple[int, ...]
    k1: MatrixE
    k2: MatrixE


def cartan_coordinate(g: MatrixE, witness: bool = False):
    """The dominant (non-increasing) lambda with g in K_0 pi^lambda K_0.

    Requires det(g) == 1 exactly.
    """
    F = g.field
    if g.det() != F.one:
        raise NotUnimodularError("not-unimodular: det(g) != 1")
    sf = smith_form(g, witness=witness)
    lam = tuple(reversed(sf.exponents))
    if not witness:
        return lam
    n = g.n
    # reverse order with a determinant-one signed permutation
    P = _reversal(F, n)
    k1 = P @ sf.left
    k2 = sf.right @ P.inverse()
    # elementary steps have det 1 and the stripped units multiply to det(g) = 1
    return CartanDecomposition(lam, k1, k2)


def cartan_chamber(g: MatrixE) -> tuple[int, ...]:
    """Chamber coordinate of g in PGL_n: differences of the sorted Smith exponents.

    Defined for every invertible g; agrees with the chamber of
    ``cartan_coordinate`` when det(g) == 1.
    """
    lam = tuple(reversed(smith_invariants(g)))
    return tuple(a - b for a, b in zip(lam, lam[1:]))


def _reversal(F: LocalField, n: int) -> MatrixE:
    """Signed anti-diagonal permutation of determinant one."""
    rows = [[F.zero] * n for _ in range(n)]
    for i in range(n):
        rows[i][n - 1 - i] = F.one
    m = MatrixE(F, rows)
    if m.det() != F.one:
        rows[0][n - 1] = -F.one
        m = MatrixE(F, rows)
    return m


# -- sampling --------------------------------------------------------------------


def random_integral(F: LocalField, rng: random.Random, degree: int = 2, unit_den: bool = True) -> LocalScalar:
    """A random element of O_E: polynomial, optionally over a random unit."""
    Q = F.residue.order
    num = [rng.randrange(Q) for _ in range(degree + 1)]
    x = F.scalar(num)
    if unit_den and rng.random() < 0.3:
        den = [rng.randrange(1, Q)] + [rng.randrange(Q) for _ in range(rng.randrange(2))]
        x = x / F.scalar(den)
    return x


def random_unit(F: LocalField, rng: random.Random, degree: int = 1) -> LocalScalar:
    Q = F.residue.order
    return F.scalar([rng.randrange(1, Q)] + [rng.randrange(Q) for _ in range(degree)])


def random_k0(F: LocalField, n: int, rng: random.Random, steps: int | None = None, degree: int = 2) -> MatrixE:
    """A random element of SL_n(O_E) as a product of elementary and torus factors."""
    steps = steps if steps is not None else 2 * n
    rows = [[F.one if i == j else F.zero for j in range(n)] for i in range(n)]
    for _ in range(steps):
        kind = rng.random()
        i, j = rng.sample(range(n), 2)
        if kind < 0.75:
            c = random_integral(F, rng, degree)
            rows[i] = [x + c * y for x, y in zip(rows[i], rows[j])]
        elif kind < 0.9:
            u = random_unit(F, rng)
            rows[i] = [u * x for x in rows[i]]
            ui = u.inverse()
            rows[j] = [ui * x for x in rows[j]]
        else:
            rows[i], rows[j] = [-x for x in rows[j]], rows[i]
    return MatrixE(F, rows)


def random_gl(F: LocalField, n: int, rng: random.Random, spread: int = 2) -> MatrixE:
    """A random invertible matrix k1 diag(t^e) k2 with GL_n(O_E) factors."""
    exps = [rng.randint(-spread, spread) for _ in range(n)]
    k1 = random_k0(F, n, rng)
    k2 = random_k0(F, n, rng)
    scale = MatrixE.diagonal(F, [random_unit(F, rng)] + [F.one] * (n - 1))
    return k1 @ scale @ MatrixE.t_power_diagonal(F, exps) @ k2
