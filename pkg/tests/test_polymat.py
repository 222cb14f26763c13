from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hermhecke.field import FieldConfig
from hermhecke.lattice import MatrixE, smith_invariants
from hermhecke.polymat import NO_VALUATION, PolyKernel, chamber_from_exponents


def kernel(q):
    return PolyKernel(FieldConfig(q=q).local_field.residue)


@pytest.mark.parametrize("q", [3, 5, 9, 25])
def test_mul_matches_residue_tables(q):
    K = kernel(q)
    R = K.residue
    rng = np.random.default_rng(q)
    a = rng.integers(0, R.order, (40, 3))
    b = rng.integers(0, R.order, (40, 2))
    prod = K.decode(K.mul(K.encode(a), K.encode(b)))
    for r in range(40):
        ref = [0] * 4
        for i in range(3):
            for j in range(2):
                ref[i + j] = R.add(ref[i + j], R.mul(int(a[r, i]), int(b[r, j])))
        assert list(prod[r]) == ref
    frob = K.decode(K.frob(K.encode(np.arange(R.order))))
    assert list(frob) == [R.frob(x) for x in range(R.order)]


def test_valuation_and_shift():
    K = kernel(3)
    A = K.encode(np.array([[0, 0, 4], [0, 0, 0], [1, 0, 0]]))
    assert list(K.valuation(A)) == [2, NO_VALUATION, 0]
    assert list(K.valuation(K.shift(A, 2))) == [4, NO_VALUATION, 2]
    with pytest.raises(ArithmeticError):
        K.unshift(A, 1)


def _to_matrix(F, K, X):
    codes = K.decode(X)
    n = codes.shape[0]
    return MatrixE(F, [[F.laurent([int(c) for c in codes[i, j]]) for j in range(n)] for i in range(n)])


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_elementary_divisors_match_smith_elimination(seed, n):
    F = FieldConfig(q=3).local_field
    K = kernel(3)
    rng = np.random.default_rng(seed)
    # sparse low-degree entries make non-trivial divisors common
    codes = rng.integers(0, 9, (n, n, 3)) * (rng.random((n, n, 3)) < 0.45)
    X = K.encode(codes)
    M = _to_matrix(F, K, X)
    if M.det().num == ():
        with pytest.raises(ArithmeticError):
            K.elementary_divisors(X[None])
        return
    got = K.elementary_divisors(X[None])[0]
    assert tuple(int(x) for x in got) == smith_invariants(M)


def test_matmul_and_conj_transpose():
    F = FieldConfig(q=3).local_field
    K = kernel(3)
    rng = np.random.default_rng(1)
    X = K.encode(rng.integers(0, 9, (3, 3, 2)))
    Y = K.encode(rng.integers(0, 9, (3, 3, 3)))
    mx, my = _to_matrix(F, K, X), _to_matrix(F, K, Y)
    assert _to_matrix(F, K, K.matmul(X, Y)) == mx @ my
    assert _to_matrix(F, K, K.conj_transpose(X)) == mx.conj_transpose()


def test_chamber_from_exponents():
    e = np.array([[0, 1, 3], [2, 2, 2], [5, 0, 1]])
    assert chamber_from_exponents(e).tolist() == [[2, 1], [0, 0], [4, 1]]
