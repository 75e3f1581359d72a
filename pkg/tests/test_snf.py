import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stabcheck.snf import invariant_factors, smith_normal_form, smith_with_inverses

from helpers import determinantal_divisors, exact_det


def _as_int(M):
    return np.asarray(M, dtype=object)


def _check(A, D, U, V):
    A, D, U, V = map(_as_int, (A, D, U, V))
    assert (U.dot(A).dot(V) == D).all()
    assert abs(exact_det(U)) == 1 and abs(exact_det(V)) == 1
    diag = [int(D[i, i]) for i in range(min(D.shape))]
    off = D.copy()
    for i in range(min(D.shape)):
        off[i, i] = 0
    assert not off.any()
    assert all(d >= 0 for d in diag)
    nz = [d for d in diag if d]
    assert diag[:len(nz)] == nz  # zeros trail
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


def test_two_by_two_example():
    A = np.array([[2, 4], [6, 8]])
    D, U, V = smith_normal_form(A)
    assert np.array_equal(np.asarray(D, dtype=np.int64), np.diag([2, 4]))
    _check(A, D, U, V)


def test_identity_and_zero():
    D, U, V = smith_normal_form(np.eye(3, dtype=np.int64))
    assert np.array_equal(np.asarray(D, dtype=np.int64), np.eye(3))
    D, U, V = smith_normal_form(np.zeros((2, 3), dtype=np.int64))
    assert not np.asarray(D, dtype=np.int64).any()
    assert D.shape == (2, 3)


def test_empty_matrices():
    for shape in [(0, 3), (3, 0), (0, 0)]:
        D, U, V = smith_normal_form(np.zeros(shape, dtype=np.int64))
        assert D.shape == shape
    assert invariant_factors(np.zeros((0, 2), dtype=np.int64)) == []


def test_inverses_are_tracked():
    rng = np.random.default_rng(1)
    A = rng.integers(-9, 10, (7, 5))
    D, U, V, Ui, Vi = smith_with_inverses(A)
    n, m = A.shape
    assert (_as_int(U).dot(_as_int(Ui)) == np.eye(n, dtype=np.int64)).all()
    assert (_as_int(V).dot(_as_int(Vi)) == np.eye(m, dtype=np.int64)).all()


def test_coefficient_growth_switches_to_big_integers():
    # entries near 2^40 force the arbitrary-precision path
    A = np.array([[2**40 + 1, 2**40], [2**40 - 1, 2**40 + 3], [7, 11]], dtype=object)
    D, U, V = smith_normal_form(A)
    _check(A, D, U, V)
    assert [int(D[i, i]) for i in range(2)] == determinantal_ratio(A)


def determinantal_ratio(A):
    dk = determinantal_divisors(A)
    return [dk[0]] + [dk[i] // dk[i - 1] for i in range(1, len(dk))]


def test_invariant_factors_match_determinantal_divisors():
    rng = np.random.default_rng(5)
    for _ in range(30):
        r, c = rng.integers(1, 5, 2)
        A = rng.integers(-9, 10, (r, c))
        if rng.random() < 0.3:
            A[:, 0] = 2 * A[:, -1]
        assert invariant_factors(A) == determinantal_ratio(A)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 12).flatmap(lambda r: st.integers(1, 12).flatmap(
    lambda c: arrays(np.int64, (r, c), elements=st.integers(-9, 9)))))
def test_postconditions(A):
    D, U, V = smith_normal_form(A)
    _check(A, D, U, V)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_low_rank_products(k, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-3, 4, (k + 3, 2)).dot(rng.integers(-3, 4, (2, k + 1)))
    D, U, V = smith_normal_form(A)
    _check(A, D, U, V)
    assert sum(1 for i in range(min(D.shape)) if D[i, i]) <= 2
