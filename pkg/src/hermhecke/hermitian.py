"""Unimodular Hermitian forms, the twisted action g.x = g x tau(g^t) and K_0-orbits.

The K_0-orbit of a form is read off a congruence diagonalization
k.x = diag(u_i t^delta_i) with k in SL_n(O_E) and u_i units of the fixed
field.  Removing the unit parts needs square roots of norms, which exist
t-adically but not in F_{q^2}(t); they are produced by Hensel lifting to a
finite precision and the result reports whether it came out exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .field import LocalField, LocalScalar
from .lattice import MatrixE, NotUnimodularError, SingularMatrixError, smith_invariants


class NotHermitianError(ValueError):
    def __init__(self, index):
        super().__init__(f"not-hermitian: entry {index} differs from the conjugate of its mirror")
        self.index = index


def validity_report(m: MatrixE) -> dict | None:
    """None when m is a unimodular Hermitian form, else which invariant fails."""
    n = m.n
    for i in range(n):
        for j in range(i, n):
            if m[i, j] != m[j, i].galois():
                return {"error": "not-hermitian", "index": [i, j]}
    if m.det() != m.field.one:
        return {"error": "not-unimodular", "det": m.det().to_json()}
    return None


class HermitianForm:
    """A point of X: tau(x^t) == x and det(x) == 1."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: MatrixE):
        report = validity_report(matrix)
        if report is not None:
            if report["error"] == "not-hermitian":
                raise NotHermitianError(tuple(report["index"]))
            raise NotUnimodularError("not-unimodular: det(x) != 1")
        self.matrix = matrix

    @classmethod
    def diagonal(cls, field: LocalField, exponents: Sequence[int]) -> "HermitianForm":
        """x_lambda = diag(t^lambda_i); requires sum(lambda) == 0."""
        return cls(MatrixE.t_power_diagonal(field, exponents))

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def field(self) -> LocalField:
        return self.matrix.field

    def __eq__(self, other):
        return isinstance(other, HermitianForm) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"HermitianForm({self.matrix!r})"


def twisted_action(g: MatrixE, m: MatrixE) -> MatrixE:
    """g m tau(g^t) on raw matrices, no invariants checked."""
    return g @ m @ g.conj_transpose()


def group_action(g: MatrixE, x: HermitianForm) -> HermitianForm:
    if g.det() != g.field.one:
        raise NotUnimodularError("not-unimodular: det(g) != 1")
    return HermitianForm(twisted_action(g, x.matrix))


@dataclass(frozen=True)
class Diagonalization:
    """k.x == d exactly, k in K_0 and d diagonal with valuations `exponents`.

    When `exact` is true, d == diag(t^exponents) on the nose; otherwise each
    diagonal entry is t^delta_i times a unit congruent to 1 mod t^precision.
    """

    k: MatrixE
    d: MatrixE
    exponents: tuple[int, ...]
    exact: bool
    precision: int | None


def _diagonal_with_units(m: MatrixE):
    """Hermitian Gauss elimination over O_E.

    Returns (k rows, diagonal entries) with k m k^* diagonal and k in SL_n(O_E).
    """
    F = m.field
    R = F.residue
    n = m.n
    a = [list(r) for r in m.rows]
    k = [[F.one if i == j else F.zero for j in range(n)] for i in range(n)]

    def add_multiple(i, j, c):
        # E = 1 + c e_i e_j^T ; a <- E a E^*, k <- E k
        a[i] = [x + c * y if y.num else x for x, y in zip(a[i], a[j])]
        cb = c.galois()
        for row in a:
            if row[j].num:
                row[i] = row[i] + cb * row[j]
        k[i] = [x + c * y for x, y in zip(k[i], k[j])]

    def signed_swap(i, j):
        if i == j:
            return
        a[i], a[j] = [-x for x in a[j]], a[i]
        for row in a:
            row[i], row[j] = -row[j], row[i]
        k[i], k[j] = [-x for x in k[j]], k[i]

    for p in range(n):
        best, bi, bj = None, -1, -1
        for i in range(p, n):
            for j in range(p, n):
                x = a[i][j]
                if x.num:
                    v = x.valuation()
                    # prefer a diagonal entry on ties
                    if best is None or v < best or (v == best and i == j and bi != bj):
                        best, bi, bj = v, i, j
        if best is None:
            raise SingularMatrixError("form is degenerate")
        if bi != bj:
            # bring a minimal-valuation element onto the diagonal: Tr(1) = 2 != 0
            c = F.const(R.inv(a[bj][bi].leading()))
            add_multiple(bi, bj, c)
            assert a[bi][bi].valuation() == best
        signed_swap(p, bi)
        piv_inv = a[p][p].inverse()
        for i in range(p + 1, n):
            if a[i][p].num:
                add_multiple(i, p, -(a[i][p] * piv_inv))
    return k, [a[i][i] for i in range(n)]


def norm_lift(w: Sequence[int], field: LocalField) -> list[int]:
    """Coefficients of s with N(s) == w mod t^len(w), w a fixed-field unit series.

    Residue step from norm surjectivity, then Tr(s_0^q s_k) fixes each next
    coefficient (possible because 2 is invertible).
    """
    R = field.residue
    P = len(w)
    s = [R.norm_preimage(w[0])]
    half = R.inv(R.from_int(2))
    s0bar_inv = R.inv(R.frob(s[0]))
    for kdeg in range(1, P):
        acc = 0
        for i in range(1, kdeg):
            acc = R.add(acc, R.mul(s[i], R.frob(s[kdeg - i])))
        r = R.sub(w[kdeg], acc)
        s.append(R.mul(R.mul(r, half), s0bar_inv))
    return s


def congruence_diagonalize(x: HermitianForm, normalize: bool = True, precision: int | None = None) -> Diagonalization:
    """k in K_0 with k.x diagonal; with `normalize`, units pushed to 1 mod t^precision."""
    m = x.matrix if isinstance(x, HermitianForm) else x
    F = m.field
    n = m.n
    k_rows, diag = _diagonal_with_units(m)
    exps = tuple(d.valuation() for d in diag)
    k = MatrixE(F, k_rows)
    if not normalize:
        d = MatrixE.diagonal(F, diag)
        exact = all(e == F.t_power(v) for e, v in zip(diag, exps))
        return Diagonalization(k, d, exps, exact, None)
    if precision is None:
        precision = max(exps) - min(exps) + 2
    scales = []
    for i in range(n - 1):
        unit = diag[i] * F.t_power(-exps[i])
        w = unit.inverse().series(precision)
        scales.append(F.laurent(norm_lift(w, F)))
    last = F.one
    for s in scales:
        last = last * s
    scales.append(last.inverse())
    k = MatrixE.diagonal(F, scales) @ k
    d = twisted_action(k, m)
    target = MatrixE.t_power_diagonal(F, exps)
    return Diagonalization(k, d, exps, d == target, precision)


def orbit_invariant(x: HermitianForm) -> tuple[int, ...]:
    """Dominant (non-increasing) exponent vector labelling the K_0-orbit of x."""
    m = x.matrix if isinstance(x, HermitianForm) else x
    _, diag = _diagonal_with_units(m)
    return tuple(sorted((d.valuation() for d in diag), reverse=True))


def form_exponents(m: MatrixE) -> tuple[int, ...]:
    """Ascending Jordan exponents of any nondegenerate Hermitian matrix.

    For unramified forms these are the elementary divisors of the matrix.
    """
    return smith_invariants(m)


def gram_matrix(x: HermitianForm | MatrixE, basis: Sequence[Sequence[LocalScalar]]) -> MatrixE:
    m = x.matrix if isinstance(x, HermitianForm) else x
    F = m.field
    n = m.n
    if any(len(v) != n for v in basis):
        raise ValueError("basis vectors must have length n")
    xv = []
    for v in basis:
        xv.append([sum((m[i, j] * v[j] for j in range(n) if v[j].num), F.zero) for i in range(n)])
    rows = []
    for vi in basis:
        conj = [c.galois() for c in vi]
        rows.append([sum((conj[r] * w[r] for r in range(n) if conj[r].num), F.zero) for w in xv])
    return MatrixE(F, rows)


def _rank(vectors, F: LocalField) -> int:
    a = [list(v) for v in vectors]
    rank = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(a)) if a[r][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = a[rank][c].inverse()
        for r in range(len(a)):
            if r != rank and a[r][c]:
                f = a[r][c] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


def gram_valuation(x: HermitianForm | MatrixE, basis: Sequence[Sequence[LocalScalar]]):
    """nu(det Gram(basis)) with Gram_ij = tau(v_i)^t x v_j."""
    m = x.matrix if isinstance(x, HermitianForm) else x
    if not basis or _rank(basis, m.field) < len(basis):
        raise ValueError("basis vectors are linearly dependent")
    return gram_matrix(m, basis).det().valuation()


def min_subspace_valuation(x: HermitianForm | MatrixE, k: int) -> int:
    """Sum of the k smallest orbit exponents of x."""
    m = x.matrix if isinstance(x, HermitianForm) else x
    if not 1 <= k <= m.n:
        raise ValueError(f"k={k} out of range 1..{m.n}")
    _, diag = _diagonal_with_units(m)
    return sum(sorted(d.valuation() for d in diag)[:k])
