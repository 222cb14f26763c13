"""Independent oracles: Bruhat-Tits tree BFS and brute-force coset-pair counts.

The tree oracle only uses residue-field tables and truncated power series,
nothing from the coset enumeration it checks.
"""

from __future__ import annotations

from collections import deque

from hermhecke.lattice import MatrixE, in_K0

PREC = 40


class Series:
    """Truncated power series over F_{q^2} (list of codes, length PREC)."""

    def __init__(self, R):
        self.R = R

    def const(self, c):
        return [c] + [0] * (PREC - 1)

    def mono(self, k):
        out = [0] * PREC
        out[k] = 1
        return out

    def add(self, a, b):
        return [self.R.add(x, y) for x, y in zip(a, b)]

    def sub(self, a, b):
        return [self.R.sub(x, y) for x, y in zip(a, b)]

    def mul(self, a, b):
        R = self.R
        out = [0] * PREC
        for i, x in enumerate(a):
            if x:
                for j in range(PREC - i):
                    if b[j]:
                        out[i + j] = R.add(out[i + j], R.mul(x, b[j]))
        return out

    @staticmethod
    def val(a):
        return next((i for i, x in enumerate(a) if x), PREC)

    def shift_down(self, a, k):
        assert all(x == 0 for x in a[:k])
        return a[k:] + [0] * k

    def unit_inverse(self, a):
        R = self.R
        inv0 = R.inv(a[0])
        out = [inv0] + [0] * (PREC - 1)
        for k in range(1, PREC):
            acc = 0
            for i in range(1, k + 1):
                acc = R.add(acc, R.mul(a[i], out[k - i]))
            out[k] = R.neg(R.mul(acc, inv0))
        return out

    def div(self, a, b):
        """a / b for v(a) >= v(b)."""
        v = self.val(b)
        return self.mul(self.shift_down(a, v), self.unit_inverse(self.shift_down(b, v)))


def _canon(S: Series, cols):
    """Homothety class key of the lattice spanned by two column vectors."""
    (a, c), (b, d) = cols
    if S.val(c) < S.val(d):
        (a, c), (b, d) = (b, d), (a, c)
    f = S.div(c, d)
    a, c = S.sub(a, S.mul(f, b)), S.sub(c, S.mul(f, d))
    beta = S.val(d)
    alpha = S.val(a)
    # unit parts of the diagonal do not change the lattice
    b = S.mul(b, S.unit_inverse(S.shift_down(d, beta)))
    m = min(alpha, beta, S.val(b))
    alpha, beta = alpha - m, beta - m
    b = S.shift_down(b, m)
    return (alpha, beta, tuple(b[:alpha]))


def tree_sphere_sizes(R, radius: int) -> list[int]:
    """Vertex counts at distance 0..radius from the standard lattice class."""
    S = Series(R)
    one, zero, t = S.const(1), S.const(0), S.mono(1)
    root = ((one, zero), (zero, one))
    start = _canon(S, root)
    dist = {start: 0}
    queue = deque([(root, 0)])
    while queue:
        cols, r = queue.popleft()
        if r == radius:
            continue
        (a, c), (b, d) = cols
        # the q_E + 1 index-q_E sublattices: span(v, t L) for lines v in L / t L
        subs = [((a, c), (S.mul(t, b), S.mul(t, d)))]
        for x in R.elements():
            xc = S.const(x)
            v = (S.add(S.mul(xc, a), b), S.add(S.mul(xc, c), d))
            subs.append((v, (S.mul(t, a), S.mul(t, c))))
        for nb in subs:
            key = _canon(S, nb)
            if key not in dist:
                dist[key] = r + 1
                queue.append((nb, r + 1))
    sizes = [0] * (radius + 1)
    for r in dist.values():
        sizes[r] += 1
    return sizes


def pair_count(reps_lam, reps_mu, pi_nu: MatrixE) -> int:
    """#{(i, j) : g_i h_j in pi^nu K_0}, which equals (a_lam * a_mu)(pi^nu)."""
    inv = pi_nu.inverse()
    return sum(1 for g in reps_lam for h in reps_mu if in_K0(inv @ g @ h))
