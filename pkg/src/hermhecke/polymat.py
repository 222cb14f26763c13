"""Batched polynomial matrices over F_{q^2} for the counting hot path.

A polynomial in t with F_{q^2} coefficients is an int64 array of shape
(..., L, D): L coefficients, each a vector over F_p in a basis of F_{q^2}
(D = 2f for q = p^f).  Products use the structure tensor of that basis, so
the same code serves every odd q.  Everything is exact: lengths grow with
products, nothing is truncated.
"""

from __future__ import annotations

import itertools

import numpy as np

from .field import ResidueField

NO_VALUATION = 1 << 30


class PolyKernel:
    def __init__(self, residue: ResidueField):
        self.residue = R = residue
        base = R.base
        self.p, self.f = base.p, base.f
        self.D = D = 2 * self.f
        q = R.q
        # code -> coordinate vector: digits of a, then digits of b
        vecs = np.zeros((R.order, D), dtype=np.int64)
        for c in range(R.order):
            a, b = c % q, c // q
            vecs[c, : self.f] = base._digits(a)
            vecs[c, self.f :] = base._digits(b)
        self.vectors = vecs
        weights = np.array([self.p**i for i in range(self.f)], dtype=np.int64)
        self._weights = weights
        basis = [self.decode_vector(np.eye(D, dtype=np.int64)[i]) for i in range(D)]
        T = np.zeros((D, D, D), dtype=np.int64)
        for i, j in itertools.product(range(D), repeat=2):
            T[i, j] = vecs[R.mul(basis[i], basis[j])]
        self.T = T
        self.frob_matrix = np.stack([vecs[R.frob(b)] for b in basis])  # row i = frob(e_i)

    # encoding -----------------------------------------------------------------
    def decode_vector(self, v) -> int:
        a = int(np.dot(v[: self.f], self._weights))
        b = int(np.dot(v[self.f :], self._weights))
        return a + self.residue.q * b

    def encode(self, codes: np.ndarray) -> np.ndarray:
        return self.vectors[codes]

    def decode(self, arr: np.ndarray) -> np.ndarray:
        a = arr[..., : self.f] @ self._weights
        b = arr[..., self.f :] @ self._weights
        return a + self.residue.q * b

    # arithmetic ---------------------------------------------------------------
    def mul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Product of polynomial arrays (..., L1, D) x (..., L2, D)."""
        L1, L2 = A.shape[-2], B.shape[-2]
        batch = np.broadcast_shapes(A.shape[:-2], B.shape[:-2])
        out = np.zeros(batch + (L1 + L2 - 1, self.D), dtype=np.int64)
        # left multiplication matrices: MA[..., l, b, k] = sum_a A[..., l, a] T[a, b, k]
        MA = np.einsum("...la,abk->...lbk", A, self.T)
        for i in range(L1):
            Mi = MA[..., i, :, :]
            if not Mi.any():
                continue
            out[..., i : i + L2, :] += B @ Mi
        out %= self.p
        return out

    def add(self, A, B):
        A, B = self._pad_pair(A, B)
        return (A + B) % self.p

    def sub(self, A, B):
        A, B = self._pad_pair(A, B)
        return (A - B) % self.p

    def neg(self, A):
        return (-A) % self.p

    def frob(self, A):
        return (A @ self.frob_matrix) % self.p

    @staticmethod
    def shift(A: np.ndarray, k: int) -> np.ndarray:
        """Multiply by t^k (k >= 0)."""
        if k == 0:
            return A
        pad = [(0, 0)] * A.ndim
        pad[-2] = (k, 0)
        return np.pad(A, pad)

    @staticmethod
    def unshift(A: np.ndarray, k: int) -> np.ndarray:
        """Exact division by t^k; caller guarantees divisibility."""
        if k == 0:
            return A
        if A[..., :k, :].any():
            raise ArithmeticError("polynomial not divisible by t^k")
        return A[..., k:, :]

    @staticmethod
    def pad_to(A: np.ndarray, L: int) -> np.ndarray:
        if A.shape[-2] >= L:
            return A
        pad = [(0, 0)] * A.ndim
        pad[-2] = (0, L - A.shape[-2])
        return np.pad(A, pad)

    def _pad_pair(self, A, B):
        L = max(A.shape[-2], B.shape[-2])
        return self.pad_to(A, L), self.pad_to(B, L)

    @staticmethod
    def valuation(A: np.ndarray) -> np.ndarray:
        nz = (A != 0).any(axis=-1)
        v = np.argmax(nz, axis=-1)
        return np.where(nz.any(axis=-1), v, NO_VALUATION)

    # matrices -----------------------------------------------------------------
    def matmul(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Batched product of polynomial matrices (..., n, m, L, D)."""
        n, m = X.shape[-4], X.shape[-3]
        k = Y.shape[-3]
        rows = []
        for i in range(n):
            row = []
            for j in range(k):
                acc = None
                for r in range(m):
                    term = self.mul(X[..., i, r, :, :], Y[..., r, j, :, :])
                    acc = term if acc is None else self.add(acc, term)
                row.append(acc)
            rows.append(row)
        L = max(e.shape[-2] for row in rows for e in row)
        return np.stack([np.stack([self.pad_to(e, L) for e in row], axis=-3) for row in rows], axis=-4)

    def conj_transpose(self, X: np.ndarray) -> np.ndarray:
        return self.frob(np.swapaxes(X, -4, -3))

    def determinantal_divisors(self, X: np.ndarray) -> np.ndarray:
        """(..., n) array: D_k = min valuation over k x k minors, k = 1..n."""
        n = X.shape[-4]
        prev = {((i,), (j,)): X[..., i, j, :, :] for i in range(n) for j in range(n)}
        out = [np.min(np.stack([self.valuation(v) for v in prev.values()], axis=-1), axis=-1)]
        for k in range(2, n + 1):
            cur = {}
            for R in itertools.combinations(range(n), k):
                r0, rest = R[0], R[1:]
                for C in itertools.combinations(range(n), k):
                    acc = None
                    for pos, c in enumerate(C):
                        sub = prev[(rest, C[:pos] + C[pos + 1 :])]
                        term = self.mul(X[..., r0, c, :, :], sub)
                        if pos % 2:
                            term = self.neg(term)
                        acc = term if acc is None else self.add(acc, term)
                    cur[(R, C)] = acc
            prev = cur
            out.append(np.min(np.stack([self.valuation(v) for v in prev.values()], axis=-1), axis=-1))
        return np.stack(out, axis=-1)

    def elementary_divisors(self, X: np.ndarray) -> np.ndarray:
        """Ascending Smith exponents of each matrix in the batch."""
        Dk = self.determinantal_divisors(X)
        if (Dk[..., -1] >= NO_VALUATION).any():
            raise ArithmeticError("singular matrix in batch")
        prev = np.concatenate([np.zeros(Dk.shape[:-1] + (1,), dtype=Dk.dtype), Dk[..., :-1]], axis=-1)
        return Dk - prev


def chamber_from_exponents(e: np.ndarray) -> np.ndarray:
    """Ascending exponents (..., n) -> chamber coordinates (..., n-1) of the sorted weight."""
    e = np.sort(e, axis=-1)
    return (e[..., 1:] - e[..., :-1])[..., ::-1]
