"""Smith normal form over the integers.

The reduction works on int64 arrays while every entry stays below 2**30 and
switches all matrices to Python integers (object dtype) as soon as one grows
past that bound, so results are never silently wrapped.
"""

from __future__ import annotations

import numpy as np

_LIMIT = 1 << 30


class _State:
    def __init__(self, A, track_inverses):
        A = np.asarray(A)
        self.m, self.n = A.shape
        self.big = A.dtype == object or (A.size and int(np.max(np.abs(A.astype(object)))) >= _LIMIT)
        dtype = object if self.big else np.int64
        self.D = A.astype(dtype).copy()
        self.U = np.eye(self.m, dtype=np.int64).astype(dtype)
        self.V = np.eye(self.n, dtype=np.int64).astype(dtype)
        self.track = track_inverses
        if track_inverses:
            self.Ui = self.U.copy()
            self.Vi = self.V.copy()

    def _mats(self):
        mats = [self.D, self.U, self.V]
        if self.track:
            mats += [self.Ui, self.Vi]
        return mats

    def guard(self):
        if self.big:
            return
        if any(M.size and np.max(np.abs(M)) >= _LIMIT for M in self._mats()):
            self.big = True
            self.D, self.U, self.V = (M.astype(object) for M in (self.D, self.U, self.V))
            if self.track:
                self.Ui, self.Vi = self.Ui.astype(object), self.Vi.astype(object)

    def swap_rows(self, i, j):
        if i == j:
            return
        self.D[[i, j]] = self.D[[j, i]]
        self.U[[i, j]] = self.U[[j, i]]
        if self.track:
            self.Ui[:, [i, j]] = self.Ui[:, [j, i]]

    def swap_cols(self, i, j):
        if i == j:
            return
        self.D[:, [i, j]] = self.D[:, [j, i]]
        self.V[:, [i, j]] = self.V[:, [j, i]]
        if self.track:
            self.Vi[[i, j]] = self.Vi[[j, i]]

    def eliminate_rows(self, t, q):
        # row_i -= q_i * row_t for i > t
        self.D[t + 1:] -= np.outer(q, self.D[t])
        self.U[t + 1:] -= np.outer(q, self.U[t])
        if self.track:
            self.Ui[:, t] += self.Ui[:, t + 1:].dot(q)
        self.guard()

    def eliminate_cols(self, t, q):
        # col_j -= q_j * col_t for j > t
        self.D[:, t + 1:] -= np.outer(self.D[:, t], q)
        self.V[:, t + 1:] -= np.outer(self.V[:, t], q)
        if self.track:
            self.Vi[t] += q.dot(self.Vi[t + 1:])
        self.guard()

    def add_row(self, t, i):
        self.D[t] += self.D[i]
        self.U[t] += self.U[i]
        if self.track:
            self.Ui[:, i] -= self.Ui[:, t]
        self.guard()

    def negate_row(self, t):
        self.D[t] = -self.D[t]
        self.U[t] = -self.U[t]
        if self.track:
            self.Ui[:, t] = -self.Ui[:, t]


def _reduce(A, track_inverses=False) -> _State:
    st = _State(A, track_inverses)
    m, n = st.m, st.n
    for t in range(min(m, n)):
        sub = st.D[t:, t:]
        rows, cols = np.nonzero(sub)
        if rows.size == 0:
            break
        k = int(np.argmin(np.abs(sub[rows, cols])))
        st.swap_rows(t, t + int(rows[k]))
        st.swap_cols(t, t + int(cols[k]))
        while True:
            p = st.D[t, t]
            col = st.D[t + 1:, t]
            if np.any(col != 0):
                st.eliminate_rows(t, col // p)
            row = st.D[t, t + 1:]
            if np.any(row != 0):
                st.eliminate_cols(t, row // p)
            p = st.D[t, t]
            col = st.D[t + 1:, t]
            row = st.D[t, t + 1:]
            if np.any(col != 0) or np.any(row != 0):
                # leftover remainders are smaller than |p|; move the smallest in
                cand = [(abs(v), 0, i) for i, v in enumerate(col) if v != 0]
                cand += [(abs(v), 1, j) for j, v in enumerate(row) if v != 0]
                _, kind, idx = min(cand)
                if kind == 0:
                    st.swap_rows(t, t + 1 + idx)
                else:
                    st.swap_cols(t, t + 1 + idx)
                continue
            rest = st.D[t + 1:, t + 1:]
            if rest.size:
                bad = np.nonzero(rest % p)
                if bad[0].size:
                    st.add_row(t, t + 1 + int(bad[0][0]))
                    continue
            break
        if st.D[t, t] < 0:
            st.negate_row(t)
    return st


def smith_normal_form(A):
    """Return (D, U, V) with U @ A @ V == D, U and V unimodular.

    D is diagonal with nonnegative entries d_1 | d_2 | ... .  Arrays come
    back as int64, or as object arrays of Python ints when entries outgrew
    the int64-safe range during the reduction.
    """
    st = _reduce(A)
    return st.D, st.U, st.V


def smith_with_inverses(A):
    """Like smith_normal_form, also returning U^-1 and V^-1."""
    st = _reduce(A, track_inverses=True)
    return st.D, st.U, st.V, st.Ui, st.Vi


def invariant_factors(A) -> list[int]:
    D = smith_normal_form(A)[0]
    k = min(D.shape) if D.ndim == 2 else 0
    return [int(D[i, i]) for i in range(k) if D[i, i] != 0]
