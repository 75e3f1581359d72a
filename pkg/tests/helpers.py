"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from stabcheck.expr import BinOp, Func, Neg, Num, Pow, Var

# Expressions -------------------------------------------------------------------


def random_expression(rng: np.random.Generator, nvars: int, depth: int = 4):
    """Random expression that is total on any box (no x/0, no sqrt(<0)).

    Division only appears as e / (c + e'^2) or e / (2 + cos(e')).
    """
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.7:
            return Var("x", int(rng.integers(1, nvars + 1)))
        # the parser only produces non-negative literals
        value = float(np.round(rng.uniform(0, 3), int(rng.integers(0, 4))))
        num = Num(value, repr(value))
        return Neg(num) if rng.random() < 0.3 else num
    kind = rng.choice(["+", "-", "*", "/", "neg", "pow", "sin", "cos", "exp", "sqrt", "abs"])
    sub = lambda: random_expression(rng, nvars, depth - 1)
    if kind in ("+", "-", "*"):
        return BinOp(str(kind), sub(), sub())
    if kind == "/":
        if rng.random() < 0.5:
            denom = BinOp("+", Num(0.5, "0.5"), Pow(sub(), 2))
        else:
            denom = BinOp("+", Num(2.0, "2"), Func("cos", sub()))
        return BinOp("/", sub(), denom)
    if kind == "neg":
        return Neg(sub())
    if kind == "pow":
        return Pow(sub(), int(rng.integers(0, 5)))
    if kind == "sqrt":
        return Func("sqrt", Func("abs", sub()))
    if kind == "exp":
        # keep exp arguments bounded
        return Func("exp", Func("sin", sub()))
    return Func(str(kind), sub())


@st.composite
def expressions(draw, nvars: int = 3, max_depth: int = 4, allow_div: bool = True):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_expression(np.random.default_rng(seed), nvars, draw(st.integers(0, max_depth)))


def random_box(rng, nvars, scale=2.0):
    lo = rng.uniform(-scale, scale, nvars)
    width = rng.exponential(0.5, nvars) * (rng.random(nvars) < 0.9)
    return lo, lo + width


# Exact linear algebra ----------------------------------------------------------


def rational_rank(M) -> int:
    """Rank over Q by Fraction Gaussian elimination."""
    rows = [[Fraction(int(v)) for v in row] for row in np.asarray(M)]
    if not rows or not rows[0]:
        return 0
    ncols = len(rows[0])
    rank, col = 0, 0
    while rank < len(rows) and col < ncols:
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for i in range(rank + 1, len(rows)):
            if rows[i][col]:
                f = rows[i][col] / p
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def rational_betti(cc) -> list[int]:
    ranks = [0] + [rational_rank(cc.matrix(k).toarray()) if cc.count(k) and cc.count(k - 1) else 0
                   for k in range(1, cc.top_dim + 1)] + [0]
    return [cc.count(k) - ranks[k] - ranks[k + 1] for k in range(cc.top_dim + 1)]


def exact_det(M) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    A = [[int(v) for v in row] for row in np.asarray(M)]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def determinantal_divisors(M) -> list[int]:
    """gcd of all k x k minors, k = 1..rank (brute force; small matrices only)."""
    A = np.asarray(M)
    out = []
    for k in range(1, min(A.shape) + 1):
        g = 0
        for rows in itertools.combinations(range(A.shape[0]), k):
            for cols in itertools.combinations(range(A.shape[1]), k):
                g = math.gcd(g, exact_det(A[np.ix_(rows, cols)]))
        if g == 0:
            break
        out.append(g)
    return out


# Cubical fixtures --------------------------------------------------------------


def random_top_mask(rng, dim, size, density):
    return rng.random((size,) * dim) < density


def solid_angle_degree(f, lo, hi, subdiv=24):
    """Degree of f/|f| on the boundary of the box [lo, hi] in R^3.

    Each face is cut into a subdiv x subdiv grid, every square into two
    triangles oriented by the outward normal, and the signed solid angles
    of the image triangles (Van Oosterom-Strackee) are summed.
    """
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    total = 0.0
    for axis in range(3):
        others = [a for a in range(3) if a != axis]
        for side, outward in ((lo[axis], -1.0), (hi[axis], 1.0)):
            s = np.linspace(0.0, 1.0, subdiv + 1)
            grid = np.zeros((subdiv + 1, subdiv + 1, 3))
            grid[..., axis] = side
            grid[..., others[0]] = lo[others[0]] + (hi[others[0]] - lo[others[0]]) * s[:, None]
            grid[..., others[1]] = lo[others[1]] + (hi[others[1]] - lo[others[1]]) * s[None, :]
            vals = f(grid.reshape(-1, 3)).reshape(grid.shape)
            unit = vals / np.linalg.norm(vals, axis=-1, keepdims=True)
            for i in range(subdiv):
                for j in range(subdiv):
                    p = [grid[i, j], grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1]]
                    q = [unit[i, j], unit[i + 1, j], unit[i + 1, j + 1], unit[i, j + 1]]
                    for tri in ((0, 1, 2), (0, 2, 3)):
                        a, b, c = (p[t] for t in tri)
                        ua, ub, uc = (q[t] for t in tri)
                        normal = np.cross(b - a, c - a)
                        if normal[axis] * outward < 0:
                            ub, uc = uc, ub
                        num = np.dot(ua, np.cross(ub, uc))
                        den = 1.0 + np.dot(ua, ub) + np.dot(ub, uc) + np.dot(uc, ua)
                        total += 2.0 * math.atan2(num, den)
    return total / (4.0 * math.pi)
