"""Exact arithmetic for F_q, F_{q^2} and the local field model E = F_{q^2}(t).

Residue field elements are stored as small integer codes so that the hot
polynomial loops only do list lookups:

* an element of F_q = F_p[v]/(h) is the integer whose base-p digits are its
  coefficients in v (for prime q this is just the residue mod q);
* an element a + b*u of F_{q^2} = F_q[u]/(u^2 + c1*u + c0) has code a + q*b.

Elements of E are reduced fractions num/den of polynomials in t with
F_{q^2} coefficients (ascending degree, den monic).  The valuation is the
t-adic one and the Galois involution applies x -> x^q coefficientwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

INFINITY = math.inf

Poly = tuple  # tuple of residue codes, ascending t-degree, no trailing zeros


def _factor_prime_power(q: int) -> tuple[int, int] | None:
    if q < 2:
        return None
    p = next(d for d in range(2, q + 1) if q % d == 0)
    f = 0
    while q % p == 0:
        q //= p
        f += 1
    return (p, f) if q == 1 else None


@dataclass(frozen=True)
class FieldConfig:
    """Residue size q, matrix size n and the quadratic defining F_{q^2}.

    ``irreducible`` is ``(c0, c1)`` for the monic polynomial u^2 + c1*u + c0
    over F_q (coefficients as F_q codes).  ``None`` picks u^2 - c with c the
    smallest non-square, which for q = 3 is u^2 + 1.
    """

    q: int = 3
    n: int = 2
    irreducible: tuple[int, int] | None = None

    def __post_init__(self):
        pf = _factor_prime_power(self.q)
        if pf is None:
            raise ValueError(f"q={self.q} is not a prime power")
        if pf[0] == 2:
            raise ValueError("residue characteristic 2 is not supported (q must be odd)")
        if self.q > 31:
            raise ValueError("q > 31 is not supported (residue tables grow as q^4)")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        base = base_field(self.q)
        if self.irreducible is None:
            c = next(x for x in range(1, self.q) if not base.is_square(x))
            object.__setattr__(self, "irreducible", (base.neg(c), 0))
        c0, c1 = self.irreducible
        if not (0 <= c0 < self.q and 0 <= c1 < self.q):
            raise ValueError("irreducible coefficients must be F_q codes in [0, q)")
        for r in range(self.q):
            val = base.add(base.add(base.mul(r, r), base.mul(c1, r)), c0)
            if val == 0:
                raise ValueError(f"u^2 + {c1}u + {c0} has the root {r} in F_{self.q}")

    def with_n(self, n: int) -> "FieldConfig":
        return FieldConfig(self.q, n, self.irreducible)

    @property
    def local_field(self) -> "LocalField":
        return local_field(self.q, self.irreducible)


class BaseField:
    """F_q with integer codes; tables for everything."""

    def __init__(self, q: int):
        p, f = _factor_prime_power(q)
        self.q, self.p, self.f = q, p, f
        self.modulus = _find_irreducible(p, f) if f > 1 else None
        self._add = [[0] * q for _ in range(q)]
        self._mul = [[0] * q for _ in range(q)]
        vecs = [self._digits(x) for x in range(q)]
        for a in range(q):
            for b in range(q):
                self._add[a][b] = self._code([(x + y) % p for x, y in zip(vecs[a], vecs[b])])
                self._mul[a][b] = self._code(self._polymulmod(vecs[a], vecs[b]))
        self._neg = [self._code([(-x) % p for x in vecs[a]]) for a in range(q)]
        self._inv = [0] * q
        for a in range(1, q):
            self._inv[a] = next(b for b in range(1, q) if self._mul[a][b] == 1)
        self._squares = {self._mul[a][a] for a in range(1, q)}

    def _digits(self, x: int) -> list[int]:
        out = []
        for _ in range(self.f):
            out.append(x % self.p)
            x //= self.p
        return out

    def _code(self, digits: Sequence[int]) -> int:
        return sum(d * self.p**i for i, d in enumerate(digits))

    def _polymulmod(self, a, b):
        p, f = self.p, self.f
        prod = [0] * (2 * f - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
        if f > 1:
            h = self.modulus  # monic, length f + 1
            for k in range(2 * f - 2, f - 1, -1):
                c = prod[k]
                if c:
                    for i in range(f + 1):
                        prod[k - f + i] = (prod[k - f + i] - c * h[i]) % p
        return prod[:f]

    def add(self, a, b):
        return self._add[a][b]

    def mul(self, a, b):
        return self._mul[a][b]

    def neg(self, a):
        return self._neg[a]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_q")
        return self._inv[a]

    def is_square(self, a) -> bool:
        return a in self._squares

    def from_int(self, k: int) -> int:
        return k % self.p


def _find_irreducible(p: int, f: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree f over F_p (coefficients ascending)."""

    def polymod(a, m):
        a = list(a)
        while len(a) >= len(m):
            c = a[-1]
            if c:
                shift = len(a) - len(m)
                for i, y in enumerate(m):
                    a[shift + i] = (a[shift + i] - c * y) % p
            a.pop()
        return a

    def monics(deg):
        for k in range(p**deg):
            coeffs = [(k // p**i) % p for i in range(deg)]
            yield tuple(coeffs) + (1,)

    for cand in monics(f):
        if cand[0] == 0:
            continue
        if all(any(polymod(cand, d)) for deg in range(1, f // 2 + 1) for d in monics(deg)):
            return cand
    raise AssertionError("no irreducible polynomial found")


@lru_cache(maxsize=None)
def base_field(q: int) -> BaseField:
    return BaseField(q)


class ResidueField:
    """F_{q^2} = F_q[u]/(u^2 + c1 u + c0), element a + b u has code a + q*b."""

    def __init__(self, q: int, irreducible: tuple[int, int]):
        self.q = q
        self.order = Q = q * q
        self.irreducible = irreducible
        self.base = F = base_field(q)
        c0, c1 = irreducible
        # u^2 = -c1 u - c0
        nu_a, nu_b = F.neg(c0), F.neg(c1)

        def pmul(x, y):
            a, b = x % q, x // q
            c, d = y % q, y // q
            bd = F.mul(b, d)
            re = F.add(F.mul(a, c), F.mul(bd, nu_a))
            im = F.add(F.add(F.mul(a, d), F.mul(b, c)), F.mul(bd, nu_b))
            return re + q * im

        def padd(x, y):
            return F.add(x % q, y % q) + q * F.add(x // q, y // q)

        self.add_table = [padd(x, y) for x in range(Q) for y in range(Q)]
        self.mul_table = [pmul(x, y) for x in range(Q) for y in range(Q)]
        self.neg_table = [F.neg(x % q) + q * F.neg(x // q) for x in range(Q)]
        self.sub_table = [self.add_table[x * Q + self.neg_table[y]] for x in range(Q) for y in range(Q)]
        self.inv_table = [0] * Q
        for x in range(1, Q):
            self.inv_table[x] = next(y for y in range(1, Q) if self.mul_table[x * Q + y] == 1)
        self.frob_table = [self.power(x, q) for x in range(Q)]
        self.one = 1
        self.u = q

    def pair(self, x: int) -> tuple[int, int]:
        return (x % self.q, x // self.q)

    def code(self, a: int, b: int = 0) -> int:
        return a % self.q + self.q * (b % self.q)

    def from_int(self, k: int) -> int:
        return self.base.from_int(k)

    def add(self, x, y):
        return self.add_table[x * self.order + y]

    def sub(self, x, y):
        return self.sub_table[x * self.order + y]

    def mul(self, x, y):
        return self.mul_table[x * self.order + y]

    def neg(self, x):
        return self.neg_table[x]

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of 0 in F_{q^2}")
        return self.inv_table[x]

    def frob(self, x):
        return self.frob_table[x]

    def power(self, x, e):
        acc, base = 1, x
        while e:
            if e & 1:
                acc = self.mul_table[acc * self.order + base]
            base = self.mul_table[base * self.order + base]
            e >>= 1
        return acc

    def norm(self, x):
        """x * x^q, an element of F_q (its code has b = 0)."""
        return self.mul(x, self.frob(x))

    def trace(self, x):
        return self.add(x, self.frob(x))

    def is_fixed(self, x) -> bool:
        return self.frob(x) == x

    def norm_preimage(self, r: int) -> int:
        """Some s with s * s^q = r, for r a nonzero element of F_q."""
        if r == 0:
            raise ValueError("norm preimage of 0 requested")
        for s in range(1, self.order):
            if self.norm(s) == r:
                return s
        raise AssertionError("norm map is not surjective")  # cannot happen for finite fields

    def elements(self) -> range:
        return range(self.order)


class ResidueScalar:
    """An element a + b*u of F_{q^2}; thin value wrapper around a code."""

    __slots__ = ("field", "code")

    def __init__(self, field: ResidueField, code: int):
        self.field = field
        self.code = code

    @classmethod
    def from_pair(cls, field: ResidueField, a: int, b: int = 0) -> "ResidueScalar":
        return cls(field, field.code(a, b))

    @property
    def pair(self) -> tuple[int, int]:
        return self.field.pair(self.code)

    def _wrap(self, code):
        return ResidueScalar(self.field, code)

    def __add__(self, other):
        return self._wrap(self.field.add(self.code, other.code))

    def __sub__(self, other):
        return self._wrap(self.field.sub(self.code, other.code))

    def __mul__(self, other):
        return self._wrap(self.field.mul(self.code, other.code))

    def __truediv__(self, other):
        return self._wrap(self.field.mul(self.code, self.field.inv(other.code)))

    def __neg__(self):
        return self._wrap(self.field.neg(self.code))

    def __pow__(self, e: int):
        if e < 0:
            return self._wrap(self.field.inv(self.field.power(self.code, -e)))
        return self._wrap(self.field.power(self.code, e))

    def frobenius(self) -> "ResidueScalar":
        return self._wrap(self.field.frob(self.code))

    def __eq__(self, other):
        return isinstance(other, ResidueScalar) and other.field is self.field and other.code == self.code

    def __hash__(self):
        return hash(("res", self.code))

    def __bool__(self):
        return self.code != 0

    def __repr__(self):
        a, b = self.pair
        return f"ResidueScalar({a}+{b}u)"


# -- polynomials over F_{q^2} -------------------------------------------------


def _trim(c: list) -> tuple:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class LocalField:
    """E = F_{q^2}(t) with the t-adic valuation; a factory for LocalScalar."""

    def __init__(self, q: int, irreducible: tuple[int, int]):
        self.q = q
        self.residue = ResidueField(q, irreducible)
        R = self.residue
        self._Q = R.order
        self._add = R.add_table
        self._sub = R.sub_table
        self._mul = R.mul_table
        self._neg = R.neg_table
        self._inv = R.inv_table
        self._frob = R.frob_table
        self.zero = LocalScalar._raw(self, (), (1,))
        self.one = LocalScalar._raw(self, (1,), (1,))
        self.t = LocalScalar._raw(self, (0, 1), (1,))

    # polynomial kernels (tuples of codes) ---------------------------------
    def padd(self, a: Poly, b: Poly) -> Poly:
        if len(a) < len(b):
            a, b = b, a
        Q, add = self._Q, self._add
        out = list(a)
        for i, y in enumerate(b):
            out[i] = add[out[i] * Q + y]
        return _trim(out)

    def psub(self, a: Poly, b: Poly) -> Poly:
        Q, sub, neg = self._Q, self._sub, self._neg
        n = max(len(a), len(b))
        out = [0] * n
        for i in range(n):
            x = a[i] if i < len(a) else 0
            y = b[i] if i < len(b) else 0
            out[i] = sub[x * Q + y]
        return _trim(out)

    def pmul(self, a: Poly, b: Poly) -> Poly:
        if not a or not b:
            return ()
        Q, add, mul = self._Q, self._add, self._mul
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            row = x * Q
            for j, y in enumerate(b):
                if y:
                    k = i + j
                    out[k] = add[out[k] * Q + mul[row + y]]
        return _trim(out)

    def pscale(self, a: Poly, c: int) -> Poly:
        if c == 0:
            return ()
        Q, mul = self._Q, self._mul
        row = c * Q
        return tuple(mul[row + x] for x in a)

    def pdivmod(self, a: Poly, b: Poly) -> tuple[Poly, Poly]:
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        Q, mul, sub = self._Q, self._mul, self._sub
        rem = list(a)
        db = len(b) - 1
        lead_inv = self._inv[b[-1]]
        if len(rem) - 1 < db:
            return (), tuple(rem)
        quot = [0] * (len(rem) - db)
        for k in range(len(rem) - 1, db - 1, -1):
            c = rem[k]
            if c == 0:
                continue
            c = mul[c * Q + lead_inv]
            quot[k - db] = c
            row = c * Q
            for i, y in enumerate(b):
                if y:
                    rem[k - db + i] = sub[rem[k - db + i] * Q + mul[row + y]]
        return _trim(quot), _trim(rem[:db])

    def pmonic(self, a: Poly) -> tuple[Poly, int]:
        """(monic associate, leading coefficient)."""
        lead = a[-1]
        if lead == 1:
            return a, 1
        return self.pscale(a, self._inv[lead]), lead

    def pgcd(self, a: Poly, b: Poly) -> Poly:
        while b:
            a, b = b, self.pdivmod(a, b)[1]
        return self.pmonic(a)[0] if a else ()

    def pfrob(self, a: Poly) -> Poly:
        fr = self._frob
        return tuple(fr[x] for x in a)

    @staticmethod
    def pord(a: Poly) -> int:
        for i, x in enumerate(a):
            if x:
                return i
        return INFINITY

    # constructors -----------------------------------------------------------
    def scalar(self, num: Iterable[int], den: Iterable[int] = (1,)) -> "LocalScalar":
        return LocalScalar(self, tuple(num), tuple(den))

    def const(self, c: int) -> "LocalScalar":
        return LocalScalar._raw(self, (c,) if c else (), (1,))

    def from_int(self, k: int) -> "LocalScalar":
        return self.const(self.residue.from_int(k))

    def monomial(self, c: int, k: int) -> "LocalScalar":
        """c * t^k for a residue code c and any integer k."""
        if c == 0:
            return self.zero
        if k >= 0:
            return LocalScalar._raw(self, (0,) * k + (c,), (1,))
        return LocalScalar._raw(self, (c,), (0,) * (-k) + (1,))

    def t_power(self, k: int) -> "LocalScalar":
        return self.monomial(1, k)

    def laurent(self, coeffs: Sequence[int], low: int = 0) -> "LocalScalar":
        """Sum of coeffs[i] * t^(low + i)."""
        num = _trim(list(coeffs))
        if not num:
            return self.zero
        if low >= 0:
            return LocalScalar(self, (0,) * low + num, (1,))
        return LocalScalar(self, num, (0,) * (-low) + (1,))

    def from_json(self, obj) -> "LocalScalar":
        R = self.residue
        num = [R.code(a, b) for a, b in obj["num"]]
        den = [R.code(a, b) for a, b in obj.get("den", [[1, 0]])]
        return LocalScalar(self, tuple(num), tuple(den))


@lru_cache(maxsize=None)
def local_field(q: int = 3, irreducible: tuple[int, int] | None = None) -> LocalField:
    if irreducible is None:
        irreducible = FieldConfig(q).irreducible
    return LocalField(q, irreducible)


class LocalScalar:
    """Exact element num/den of E = F_{q^2}(t), kept reduced with den monic."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field: LocalField, num: Poly, den: Poly = (1,)):
        num = _trim(list(num))
        den = _trim(list(den))
        if not den:
            raise ZeroDivisionError("zero denominator")
        self.field = field
        if not num:
            self.num, self.den = (), (1,)
            return
        if len(den) > 1:
            g = field.pgcd(num, den)
            if len(g) > 1:
                num = field.pdivmod(num, g)[0]
                den = field.pdivmod(den, g)[0]
        den, lead = field.pmonic(den)
        if lead != 1:
            num = field.pscale(num, field._inv[lead])
        self.num, self.den = num, den

    @classmethod
    def _raw(cls, field, num, den):
        obj = object.__new__(cls)
        obj.field, obj.num, obj.den = field, num, den
        return obj

    # arithmetic ---------------------------------------------------------------
    def _coerce(self, other) -> "LocalScalar":
        if isinstance(other, LocalScalar):
            return other
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        F = self.field
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return LocalScalar(F, F.padd(self.num, other.num), self.den)
        num = F.padd(F.pmul(self.num, other.den), F.pmul(other.num, self.den))
        return LocalScalar(F, num, F.pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        F = self.field
        return LocalScalar._raw(F, tuple(F._neg[x] for x in self.num), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        F = self.field
        if not self.num or not other.num:
            return F.zero
        if self.den == (1,) and other.den == (1,):
            return LocalScalar._raw(F, F.pmul(self.num, other.num), (1,))
        return LocalScalar(F, F.pmul(self.num, other.num), F.pmul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self) -> "LocalScalar":
        if not self.num:
            raise ZeroDivisionError("division by zero in E")
        return LocalScalar(self.field, self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        acc, base = self.field.one, self
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc

    # structure ----------------------------------------------------------------
    def valuation(self):
        """ord_t(num) - ord_t(den); +inf for zero."""
        if not self.num:
            return INFINITY
        return LocalField.pord(self.num) - LocalField.pord(self.den)

    def galois(self) -> "LocalScalar":
        F = self.field
        return LocalScalar._raw(F, F.pfrob(self.num), F.pfrob(self.den))

    def norm(self) -> "LocalScalar":
        return self * self.galois()

    def is_fixed(self) -> bool:
        return self.galois() == self

    def is_integral(self) -> bool:
        return self.valuation() >= 0

    def is_zero(self) -> bool:
        return not self.num

    def leading(self) -> int:
        """Residue code of the leading t-adic coefficient (x = c t^v + ...)."""
        if not self.num:
            raise ValueError("zero has no leading coefficient")
        F = self.field
        a = self.num[LocalField.pord(self.num)]
        b = self.den[LocalField.pord(self.den)]
        return F.residue.mul(a, F._inv[b])

    def series(self, precision: int) -> list[int]:
        """First `precision` t-adic coefficients of t^(-v) * x (x nonzero)."""
        F = self.field
        v_num, v_den = LocalField.pord(self.num), LocalField.pord(self.den)
        a = list(self.num[v_num:]) + [0] * precision
        b = self.den[v_den:]
        Q, mul, sub = F._Q, F._mul, F._sub
        binv = F._inv[b[0]]
        out = []
        for k in range(precision):
            c = mul[a[k] * Q + binv]
            out.append(c)
            if c:
                row = c * Q
                for i, y in enumerate(b):
                    if y and k + i < len(a):
                        a[k + i] = sub[a[k + i] * Q + mul[row + y]]
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field.from_int(other)
        if not isinstance(other, LocalScalar):
            return NotImplemented
        return self.num == other.num and self.den == other.den and self.field is other.field

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return bool(self.num)

    def to_json(self) -> dict:
        R = self.field.residue
        return {"num": [list(R.pair(c)) for c in self.num], "den": [list(R.pair(c)) for c in self.den]}

    def __repr__(self):
        def fmt(p):
            terms = []
            for i, c in enumerate(p):
                if c:
                    a, b = self.field.residue.pair(c)
                    coef = f"{a}" if b == 0 else f"({a}+{b}u)"
                    terms.append(coef if i == 0 else f"{coef}*t^{i}")
            return " + ".join(terms) or "0"

        if self.den == (1,):
            return fmt(self.num)
        return f"({fmt(self.num)})/({fmt(self.den)})"


def valuation(x: LocalScalar):
    return x.valuation()


def galois(x: LocalScalar) -> LocalScalar:
    return x.galois()
