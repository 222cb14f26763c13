"""Spherical Hecke algebra of (G, K_0) and its action on K_0-invariant functions on X.

Counting normalization: K_0 has volume 1 and, for K_0 pi^lam K_0 = U g_i K_0,

    (a_lam * a_mu)(pi^nu) = #{i : g_i^{-1} pi^nu in K_0 pi^mu K_0}
    (a_lam . m_mu)(x_nu)  = #{i : g_i^{-1} . x_nu in K_0 . x_mu}

Coset representatives are Hermite forms H of lattices H O^n with the right
elementary divisors.  Both counts reduce to Smith exponents of integral
polynomial matrices built from A = t^s H^{-1}:

    convolution:  A diag(t^nu)            (Cartan coordinate of g^{-1} pi^nu)
    action:       A diag(t^nu) A^*        (orbit invariant of g^{-1} . x_nu)

and run batched through ``polymat``.  One pass over the family of lam for a
fixed nu yields the coefficients at nu for every mu at once.

Support windows are a priori, not heuristic: entry valuations give
nu_1 <= (lam+mu)_1 and nu_n >= (lam+mu)_n (resp. 2 lam + mu), so only nu
with sum(d(nu)) <= sum(d(top)) and the right class mod n can occur.
"""

from __future__ import annotations

import itertools
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import weights as W
from .field import FieldConfig, LocalField
from .hermitian import orbit_invariant, twisted_action
from .lattice import MatrixE, smith_invariants
from .polymat import PolyKernel, chamber_from_exponents

DEFAULT_BUDGET = 1_000_000
_CHUNK = 16384


class BudgetExceeded(RuntimeError):
    def __init__(self, chamber, size: int, budget: int):
        super().__init__(f"coset enumeration for chamber {tuple(chamber)} needs {size} candidates > budget {budget}")
        self.chamber = tuple(chamber)
        self.size = size
        self.budget = budget


# ---------------------------------------------------------------------------
# elements


class _Element:
    kind = "element"
    symbol = "?"

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict | None = None):
        if n < 2:
            raise ValueError("n must be at least 2")
        self.n = n
        clean = {}
        for d, c in (terms or {}).items():
            d = tuple(int(x) for x in d)
            if len(d) != n - 1 or any(x < 0 for x in d):
                raise ValueError(f"{d} is not a dominant chamber coordinate for n={n}")
            c = Fraction(c)
            if c:
                clean[d] = clean.get(d, Fraction(0)) + c
        self.terms = {d: c for d, c in clean.items() if c}

    @classmethod
    def from_chamber(cls, d: Sequence[int], coeff=1):
        return cls(len(d) + 1, {tuple(d): coeff})

    @classmethod
    def basis(cls, lam: Sequence, coeff=1):
        """The basis vector of a dominant weight (length-n, sum-zero)."""
        return cls.from_chamber(W.chamber_coords(lam), coeff)

    @classmethod
    def zero(cls, n: int):
        return cls(n)

    def _check(self, other):
        if type(other) is not type(self) or other.n != self.n:
            raise TypeError(f"cannot combine {type(self).__name__}(n={self.n}) with {other!r}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for d, c in other.terms.items():
            out[d] = out.get(d, 0) + c
        return type(self)(self.n, out)

    def __neg__(self):
        return type(self)(self.n, {d: -c for d, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        return type(self)(self.n, {d: c * x for d, x in self.terms.items()})

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def coefficient(self, d) -> Fraction:
        return self.terms.get(tuple(d), Fraction(0))

    def support(self) -> list:
        return sorted(self.terms, key=W.elimination_key)

    def items(self):
        return [(d, self.terms[d]) for d in self.support()]

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return type(other) is type(self) and other.n == self.n and other.terms == self.terms

    def __hash__(self):
        return hash((type(self).__name__, self.n, frozenset(self.terms.items())))

    def to_json(self) -> list:
        return [
            {"weight": W.weight_to_json(W.from_chamber(d)), "coeff": f"{c.numerator}/{c.denominator}"}
            for d, c in self.items()
        ]

    @classmethod
    def from_json(cls, obj, n: int | None = None):
        terms = {}
        for entry in obj:
            lam = W.parse_weight(entry["weight"])
            if n is not None and len(lam) != n:
                raise ValueError(f"weight {entry['weight']} has length {len(lam)}, expected {n}")
            n = len(lam)
            d = W.chamber_coords(lam)
            terms[d] = terms.get(d, Fraction(0)) + Fraction(str(entry["coeff"]))
        if n is None:
            raise ValueError("empty element needs an explicit n")
        return cls(n, terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = [f"{c}*{self.symbol}{W.format_weight(W.from_chamber(d))}" for d, c in reversed(self.items())]
        return " + ".join(parts)


class HeckeElement(_Element):
    """Finitely supported combination of the a_lam, keyed by chamber coordinate."""

    kind = "hecke"
    symbol = "a"
    __slots__ = ()


class ModuleElement(_Element):
    """Finitely supported combination of the m_lam, keyed by chamber coordinate."""

    kind = "module"
    symbol = "m"
    __slots__ = ()


@dataclass(frozen=True)
class LeadingDecomposition:
    coefficient: Fraction
    remainder: _Element
    top: tuple
    violations: tuple = ()

    @property
    def certified(self) -> bool:
        return not self.violations


def leading_decomposition(e: _Element, top) -> LeadingDecomposition:
    """e = c * basis(top) + remainder; remainder keys not strictly below top are violations."""
    top = tuple(top)
    if len(top) == e.n:
        top = W.chamber_coords(top)
    c = e.coefficient(top)
    rest = {d: x for d, x in e.terms.items() if d != top}
    remainder = type(e)(e.n, rest)
    bad = tuple(d for d in remainder.support() if not W.chamber_lt(d, top))
    return LeadingDecomposition(c, remainder, top, bad)


# ---------------------------------------------------------------------------
# coset families


@dataclass
class CosetGroup:
    """All family members whose Hermite form has diagonal t^diag."""

    diag: tuple
    hermite: np.ndarray  # (B, n, n, L, D)
    adjugate: np.ndarray  # t^s H^{-1}, (B, n, n, L', D)


@dataclass
class CosetFamily:
    """Left K_0-coset representatives of K_0 pi^lam K_0 (adjoint normalization).

    Representative i is the lattice H_i O^n.  For integral lam the matrices
    t^{-c} H_i (c = sum(exponents)/n) lie in SL_n(E); ``reps`` returns those,
    and H_i itself otherwise.
    """

    chamber: tuple
    n: int
    q: int
    field: LocalField
    kernel: PolyKernel
    groups: list
    candidates: int
    _reps: list | None = dc_field(default=None, repr=False)

    @property
    def weight(self):
        return W.from_chamber(self.chamber)

    @property
    def exponents(self) -> tuple:
        return W.gl_exponents(self.chamber)

    @property
    def scale(self) -> int:
        return max(self.exponents)

    @property
    def size(self) -> int:
        return sum(g.hermite.shape[0] for g in self.groups)

    def __len__(self):
        return self.size

    def hermite_matrices(self) -> list[MatrixE]:
        F = self.field
        out = []
        for g in self.groups:
            codes = self.kernel.decode(g.hermite)
            for b in range(codes.shape[0]):
                rows = [[F.laurent([int(c) for c in codes[b, i, j]]) for j in range(self.n)] for i in range(self.n)]
                out.append(MatrixE(F, rows))
        return out

    @property
    def reps(self) -> list[MatrixE]:
        if self._reps is None:
            hs = self.hermite_matrices()
            if W.is_integral(self.chamber):
                c = sum(self.exponents) // self.n
                s = self.field.t_power(-c)
                hs = [h.scale(s) for h in hs]
            self._reps = hs
        return self._reps


def expected_family_size(d: Sequence[int], q: int) -> int:
    """|K_0 pi^lam K_0 / K_0| from the Bruhat/Macdonald count with residue field of size q^2.

    Counted as q_E^{<2 rho, lam>} * P_W(1/q_E) / P_{W_lam}(1/q_E).
    """
    Q = Fraction(q * q)
    n = len(d) + 1

    def poincare(blocks):
        out = Fraction(1)
        for m in blocks:
            for k in range(1, m + 1):
                out *= sum(Q ** (-i) for i in range(k))
        return out

    # stabilizer blocks: runs of equal entries in the weight
    blocks, run = [], 1
    for x in d:
        if x == 0:
            run += 1
        else:
            blocks.append(run)
            run = 1
    blocks.append(run)
    val = Q ** W.height(d) * poincare([n]) / poincare(blocks)
    assert val.denominator == 1
    return int(val)


def _compositions(total: int, parts: int, cap: int):
    if parts == 1:
        if 0 <= total <= cap:
            yield (total,)
        return
    for a in range(min(total, cap) + 1):
        for rest in _compositions(total - a, parts - 1, cap):
            yield (a,) + rest


def _candidates_for(diag, n: int, Q: int) -> int:
    return Q ** sum((n - 1 - i) * a for i, a in enumerate(diag))


def _hermite_batch(diag, n: int, Q: int, start: int, stop: int, L: int) -> np.ndarray:
    """Codes (B, n, n, L) of Hermite forms number start..stop-1 with this diagonal."""
    slots = [(i, j, k) for i in range(n) for j in range(i + 1, n) for k in range(diag[i])]
    idx = np.arange(start, stop, dtype=np.int64)
    codes = np.zeros((stop - start, n, n, L), dtype=np.int64)
    for i, a in enumerate(diag):
        codes[:, i, i, a] = 1
    for pos, (i, j, k) in enumerate(slots):
        codes[:, i, j, k] = (idx // Q**pos) % Q
    return codes


def _upper_adjugate(K: PolyKernel, H: np.ndarray, diag, s: int) -> np.ndarray:
    """t^s H^{-1} for a batch of upper triangular H with common diagonal t^diag."""
    n = len(diag)
    B, D = H.shape[0], H.shape[-1]
    M = [[None] * n for _ in range(n)]
    for i in range(n):
        M[i][i] = K.shift(_unit_poly(B, D), s - diag[i])
    for j in range(n):
        for i in range(j - 1, -1, -1):
            acc = None
            for k in range(i + 1, j + 1):
                term = K.mul(H[:, i, k], M[k][j])
                acc = term if acc is None else K.add(acc, term)
            M[i][j] = K.unshift(K.neg(acc), diag[i])
    zero = np.zeros((B, 1, D), dtype=np.int64)
    for i in range(n):
        for j in range(i):
            M[i][j] = zero
    L = max(m.shape[-2] for row in M for m in row)
    out = np.stack([np.stack([K.pad_to(m, L) for m in row], axis=1) for row in M], axis=1)
    return _trim(out)


def _unit_poly(B: int, D: int) -> np.ndarray:
    one = np.zeros((B, 1, D), dtype=np.int64)
    one[:, 0, 0] = 1
    return one


def _trim(A: np.ndarray) -> np.ndarray:
    nz = (A != 0).any(axis=-1)
    used = np.nonzero(nz.reshape(-1, A.shape[-2]).any(axis=0))[0]
    L = int(used[-1]) + 1 if used.size else 1
    return A[..., :L, :]


def _enumerate_family(d: tuple, config: FieldConfig, budget: int) -> CosetFamily:
    n = len(d) + 1
    F = config.local_field
    K = _kernel(config)
    e = W.gl_exponents(d)
    target = np.array(sorted(e), dtype=np.int64)
    S, s = sum(e), max(e)
    Q = F.residue.order
    diags = list(_compositions(S, n, s))
    total = sum(_candidates_for(a, n, Q) for a in diags)
    if total > budget:
        raise BudgetExceeded(d, total, budget)
    groups = []
    for a in diags:
        count = _candidates_for(a, n, Q)
        kept = []
        for start in range(0, count, _CHUNK):
            stop = min(count, start + _CHUNK)
            H = K.encode(_hermite_batch(a, n, Q, start, stop, s + 1))
            ok = (K.elementary_divisors(H) == target).all(axis=-1)
            if ok.any():
                kept.append(H[ok])
        if kept:
            H = np.concatenate(kept)
            groups.append(CosetGroup(a, H, _upper_adjugate(K, H, a, s)))
    return CosetFamily(tuple(d), n, config.q, F, K, groups, total)


# ---------------------------------------------------------------------------
# shared caches (pure: a hit is indistinguishable from a recompute)

_LOCK = threading.Lock()
_KERNELS: dict = {}
_FAMILIES: dict = {}
_COLUMNS: dict = {}


def _config_key(config: FieldConfig):
    return (config.q, config.local_field.residue.irreducible)


def _kernel(config: FieldConfig) -> PolyKernel:
    key = _config_key(config)
    with _LOCK:
        K = _KERNELS.get(key)
    if K is None:
        K = PolyKernel(config.local_field.residue)
        with _LOCK:
            K = _KERNELS.setdefault(key, K)
    return K


def clear_caches():
    with _LOCK:
        _FAMILIES.clear()
        _COLUMNS.clear()


def coset_reps(lam, config: FieldConfig | None = None, budget: int = DEFAULT_BUDGET) -> CosetFamily:
    """Coset family of a dominant weight (or chamber coordinate of length n-1)."""
    config = config or FieldConfig()
    d = _as_chamber(lam, config.n)
    key = _config_key(config) + (len(d) + 1, d)
    with _LOCK:
        fam = _FAMILIES.get(key)
    if fam is not None:
        # a hit must behave exactly like a recompute, budget included
        if fam.candidates > budget:
            raise BudgetExceeded(d, fam.candidates, budget)
        return fam
    fam = _enumerate_family(d, config.with_n(len(d) + 1), budget)
    with _LOCK:
        return _FAMILIES.setdefault(key, fam)


def _as_chamber(lam, n: int) -> tuple:
    lam = tuple(lam)
    if len(lam) == n - 1 and all(isinstance(x, int) for x in lam):
        if any(x < 0 for x in lam):
            raise ValueError(f"chamber coordinate {lam} is not dominant")
        return lam
    return W.chamber_coords(lam)


def window(top: Sequence[int]) -> list:
    """Dominant nu that may appear below top: same class, no larger spread."""
    n = len(top) + 1
    S = sum(top)
    cls = W.weight_class(top)
    out = [
        c
        for c in itertools.product(range(S + 1), repeat=n - 1)
        if sum(c) <= S and W.weight_class(c) == cls
    ]
    return sorted(out, key=W.elimination_key)


# ---------------------------------------------------------------------------
# counting


def _column(kind: str, fam: CosetFamily, nu: tuple) -> Counter:
    """Counter mu -> coefficient of basis(mu) ... at nu, for lam = fam.chamber."""
    K = fam.kernel
    nu_e = W.gl_exponents(nu)
    hist = Counter()
    for g in fam.groups:
        for start in range(0, g.adjugate.shape[0], _CHUNK):
            A = g.adjugate[start : start + _CHUNK]
            L = A.shape[-2] + max(nu_e)
            Bm = np.stack([K.pad_to(K.shift(A[:, :, j], nu_e[j]), L) for j in range(fam.n)], axis=2)
            if kind == "act":
                Bm = K.matmul(Bm, K.conj_transpose(A))
            ch = chamber_from_exponents(K.elementary_divisors(Bm))
            keys, counts = np.unique(ch, axis=0, return_counts=True)
            for key, c in zip(keys, counts):
                hist[tuple(int(x) for x in key)] += int(c)
    return hist


def _column_exact(kind: str, fam: CosetFamily, nu: tuple) -> Counter:
    """Same counts through MatrixE, Smith elimination and Hermitian diagonalization."""
    F = fam.field
    x_nu = MatrixE.t_power_diagonal(F, W.gl_exponents(nu))
    hist = Counter()
    for h in fam.hermite_matrices():
        hinv = h.inverse()
        if kind == "act":
            exps = orbit_invariant(twisted_action(hinv, x_nu))
        else:
            exps = tuple(sorted(smith_invariants(hinv @ x_nu), reverse=True))
        hist[tuple(a - b for a, b in zip(exps, exps[1:]))] += 1
    return hist


class HeckeContext:
    """Entry point for convolution and action at a fixed (q, irreducible, n)."""

    def __init__(self, config: FieldConfig | None = None, budget: int = DEFAULT_BUDGET, method: str = "fast"):
        if budget <= 0:
            raise ValueError("budget must be positive")
        if method not in ("fast", "exact"):
            raise ValueError("method must be 'fast' or 'exact'")
        self.config = config or FieldConfig()
        self.n = self.config.n
        self.budget = budget
        self.method = method

    def family(self, lam) -> CosetFamily:
        return coset_reps(lam, self.config, self.budget)

    def column(self, kind: str, lam: tuple, nu: tuple) -> Counter:
        fam = self.family(lam)  # enforces the budget on cache hits too
        key = _config_key(self.config) + (self.n, kind, self.method, tuple(lam), tuple(nu))
        with _LOCK:
            col = _COLUMNS.get(key)
        if col is not None:
            return col
        col = (_column if self.method == "fast" else _column_exact)(kind, fam, tuple(nu))
        with _LOCK:
            return _COLUMNS.setdefault(key, col)

    def _basis_product(self, kind: str, lam: tuple, mu: tuple):
        top = W.add(W.phi_chamber(lam), mu) if kind == "act" else W.add(lam, mu)
        cls = ModuleElement if kind == "act" else HeckeElement
        terms = {}
        for nu in window(top):
            c = self.column(kind, lam, nu).get(tuple(mu), 0)
            if c:
                terms[nu] = c
        return cls(self.n, terms)

    def convolve_basis(self, lam, mu) -> HeckeElement:
        return self._basis_product("conv", _as_chamber(lam, self.n), _as_chamber(mu, self.n))

    def act_basis(self, lam, mu) -> ModuleElement:
        return self._basis_product("act", _as_chamber(lam, self.n), _as_chamber(mu, self.n))

    def convolve(self, a: HeckeElement, b: HeckeElement) -> HeckeElement:
        out = HeckeElement(self.n)
        for la, ca in a.items():
            for mu, cb in b.items():
                out = out + self.convolve_basis(la, mu).scale(ca * cb)
        return out

    def act(self, a: HeckeElement, m: ModuleElement) -> ModuleElement:
        out = ModuleElement(self.n)
        for la, ca in a.items():
            for mu, cm in m.items():
                out = out + self.act_basis(la, mu).scale(ca * cm)
        return out

    def mass_defect(self, lam, mu) -> int:
        """sum_nu c(nu) |fam(nu)| - |fam(lam)| |fam(mu)|; zero when no support escaped."""
        prod = self.convolve_basis(lam, mu)
        lhs = sum(int(c) * expected_family_size(nu, self.config.q) for nu, c in prod.items())
        return lhs - expected_family_size(_as_chamber(lam, self.n), self.config.q) * expected_family_size(
            _as_chamber(mu, self.n), self.config.q
        )

    def table(self, kind: str, box: Iterable, workers: int = 1) -> list[tuple]:
        """Rows (lam, mu, nu, count) over box x box, deterministic order."""
        box = sorted({tuple(b) for b in box}, key=W.elimination_key)
        pairs = [(la, mu) for la in box for mu in box]
        fn = self.act_basis if kind == "act" else self.convolve_basis
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                results = list(ex.map(lambda p: fn(*p), pairs))
        else:
            results = [fn(*p) for p in pairs]
        rows = []
        for (la, mu), res in zip(pairs, results):
            for nu, c in res.items():
                rows.append((la, mu, nu, c))
        return rows


def convolve(a: HeckeElement, b: HeckeElement, context: HeckeContext | None = None) -> HeckeElement:
    context = context or HeckeContext(FieldConfig(n=a.n))
    return context.convolve(a, b)


def act(a: HeckeElement, m: ModuleElement, context: HeckeContext | None = None) -> ModuleElement:
    context = context or HeckeContext(FieldConfig(n=a.n))
    return context.act(a, m)


def table_csv_rows(rows: Iterable[tuple]) -> list[list[str]]:
    """CSV rows with weights printed in the (a,b,...) form."""
    out = [["lambda", "mu", "nu", "count"]]
    for la, mu, nu, c in rows:
        out.append(
            [
                W.format_weight(W.from_chamber(la)),
                W.format_weight(W.from_chamber(mu)),
                W.format_weight(W.from_chamber(nu)),
                str(c),
            ]
        )
    return out
