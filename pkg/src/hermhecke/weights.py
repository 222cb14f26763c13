"""Coweights, dominance and the doubling decomposition of the dominant chamber.

The primary index is the chamber coordinate d in N^{n-1}, d_i = lambda_i -
lambda_{i+1}.  Every d is allowed: the weight lambda = sum d_k omega_k then
has entries in (1/n)Z and is integral exactly when ``is_integral(d)``.
Integral weights are the SL_n ones; the others live in the adjoint group,
where a weight is realised by the integer exponent vector ``gl_exponents``
(same differences, last entry 0).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Sequence

Chamber = tuple  # tuple[int, ...] of length n-1, entries >= 0


def _as_fractions(lam: Sequence) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in lam)


def is_weight(lam: Sequence) -> bool:
    """Sum zero and integral differences."""
    lam = _as_fractions(lam)
    return sum(lam) == 0 and all((a - b).denominator == 1 for a, b in zip(lam, lam[1:]))


def is_integral(d: Chamber) -> bool:
    n = len(d) + 1
    return sum((k + 1) * x for k, x in enumerate(d)) % n == 0


def weight_class(d: Chamber) -> int:
    """Class of the weight modulo the coroot lattice (0 for integral weights)."""
    n = len(d) + 1
    return sum((k + 1) * x for k, x in enumerate(d)) % n


def gl_exponents(d: Chamber) -> tuple[int, ...]:
    """Non-increasing integer vector with differences d and last entry 0."""
    out = [0]
    for x in reversed(d):
        out.append(out[-1] + x)
    return tuple(reversed(out))


def from_chamber(d: Chamber) -> tuple:
    """The sum-zero weight with chamber coordinate d (ints when integral)."""
    if any(x < 0 for x in d):
        raise ValueError(f"chamber coordinate {d} has a negative entry")
    e = gl_exponents(d)
    n = len(e)
    shift = Fraction(sum(e), n)
    lam = tuple(Fraction(x) - shift for x in e)
    if all(x.denominator == 1 for x in lam):
        return tuple(int(x) for x in lam)
    return lam


def is_dominant(lam: Sequence) -> bool:
    """Non-increasing entries (the canonical chamber)."""
    return is_weight(lam) and all(a >= b for a, b in zip(lam, lam[1:]))


def chamber_coords(lam: Sequence) -> Chamber:
    if not is_weight(lam):
        raise ValueError(f"{tuple(lam)} is not a weight (sum 0, integral differences)")
    if not is_dominant(lam):
        raise ValueError(f"{tuple(lam)} is not dominant")
    lam = _as_fractions(lam)
    return tuple(int(a - b) for a, b in zip(lam, lam[1:]))


def dominant_sort(lam: Sequence) -> tuple:
    """Sort a weight into the chamber (the Weyl group action is permutation)."""
    return tuple(sorted(lam, reverse=True))


def dominance_leq(lower: Sequence, upper: Sequence) -> bool:
    """lower <= upper: upper - lower is integral with nonnegative prefix sums."""
    diff = [Fraction(a) - Fraction(b) for a, b in zip(upper, lower)]
    if len(upper) != len(lower) or sum(diff) != 0:
        return False
    acc = Fraction(0)
    for x in diff:
        if x.denominator != 1:
            return False
        acc += x
        if acc < 0:
            return False
    return True


def dominance_lt(lower: Sequence, upper: Sequence) -> bool:
    return tuple(map(Fraction, lower)) != tuple(map(Fraction, upper)) and dominance_leq(lower, upper)


def chamber_leq(lower: Chamber, upper: Chamber) -> bool:
    """Dominance order on chamber coordinates, in pure integer arithmetic."""
    if len(lower) != len(upper):
        return False
    n = len(upper) + 1
    el, eu = gl_exponents(lower), gl_exponents(upper)
    diff = [a - b for a, b in zip(eu, el)]
    total = sum(diff)
    # prefix sums of (upper - lower) after recentring, scaled by n
    acc = 0
    for k in range(1, n):
        acc += diff[k - 1]
        scaled = n * acc - k * total
        if scaled < 0 or scaled % n:
            return False
    return True


def chamber_lt(lower: Chamber, upper: Chamber) -> bool:
    return tuple(lower) != tuple(upper) and chamber_leq(lower, upper)


def height(d: Chamber) -> int:
    """<2 rho, lambda>; goes up by exactly 2 along each simple coroot."""
    n = len(d) + 1
    return sum((k + 1) * (n - k - 1) * x for k, x in enumerate(d))


def elimination_key(d: Chamber):
    """Linear extension of dominance used for every ordered traversal.

    sum(d) goes up by exactly one along each simple coroot, so e < d in
    dominance forces sum(e) < sum(d); ties are broken lexicographically.
    """
    return (sum(d), tuple(d))


def add(a: Chamber, b: Chamber) -> Chamber:
    return tuple(x + y for x, y in zip(a, b))


def phi(lam: Sequence) -> tuple:
    """The doubling map lambda -> 2 lambda."""
    return tuple(2 * x for x in lam)


def phi_chamber(d: Chamber) -> Chamber:
    return tuple(2 * x for x in d)


def residue_classes(n: int, integral: bool = False) -> list[Chamber]:
    """L: chamber coordinates in {0,1}^{n-1}; every dominant d is l + 2 mu uniquely."""
    if n < 2:
        raise ValueError("n must be at least 2")
    out = [tuple(c) for c in itertools.product((0, 1), repeat=n - 1)]
    if integral:
        out = [c for c in out if is_integral(c)]
    return sorted(out, key=elimination_key)


def split_residue(d: Chamber) -> tuple[Chamber, Chamber]:
    """(l, mu) with d = l + 2 mu and l in {0,1}^{n-1}."""
    ell = tuple(x % 2 for x in d)
    return ell, tuple(x // 2 for x in d)


def dominant_box(n: int, radius: int, integral: bool = False) -> list[Chamber]:
    """Chamber coordinates with every entry <= radius, lexicographic order."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    out = [tuple(c) for c in itertools.product(range(radius + 1), repeat=n - 1)]
    if integral:
        out = [c for c in out if is_integral(c)]
    return out


def lower_set(d: Chamber) -> list[Chamber]:
    """All dominant e <= d (finite: height(e) <= height(d) bounds every entry)."""
    n = len(d) + 1
    h = height(d)
    ranges = [range(h // ((k + 1) * (n - k - 1)) + 1) for k in range(n - 1)]
    out = [e for e in itertools.product(*ranges) if height(e) <= h and chamber_leq(e, d)]
    return sorted(out, key=elimination_key)


def downward_closure(ds: Iterable[Chamber]) -> list[Chamber]:
    out = set()
    for d in ds:
        out.update(lower_set(d))
    return sorted(out, key=elimination_key)


def format_weight(lam: Sequence) -> str:
    return "(" + ",".join(str(x) for x in lam) + ")"


def weight_to_json(lam: Sequence) -> list:
    return [x if isinstance(x, int) else str(x) for x in lam]


def parse_weight(obj) -> tuple:
    """Accepts a list of ints / 'p/q' strings, or a comma string like '1,-1'."""
    if isinstance(obj, str):
        obj = [s for s in obj.replace("(", "").replace(")", "").split(",") if s.strip()]
    lam = tuple(Fraction(str(x).strip()) for x in obj)
    if not is_weight(lam):
        raise ValueError(f"{obj} is not a weight")
    return tuple(int(x) for x in lam) if all(x.denominator == 1 for x in lam) else lam
