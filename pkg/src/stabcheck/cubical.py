"""Cubical grids, elementary cells and free-face collapses.

Cells are addressed in doubled coordinates: on a grid with r cubes per axis a
cell is a tuple c with 0 <= c[a] <= 2r, where an odd entry is the edge
[(c[a]-1)/2, (c[a]+1)/2] and an even entry is the vertex c[a]/2.  The cell's
dimension is its number of odd entries.  A whole complex is then a boolean
array over the (2r+1)^d doubled grid, which keeps closure and collapses cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np


class CapacityError(RuntimeError):
    """Raised when a complex would exceed the configured cell budget."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid of `resolution` cubes per axis on [-epsilon, epsilon]^dim."""

    dim: int
    resolution: int
    epsilon: float

    @property
    def width(self) -> float:
        return 2.0 * self.epsilon / self.resolution

    @property
    def doubled_shape(self) -> tuple[int, ...]:
        return (2 * self.resolution + 1,) * self.dim

    def coords(self) -> np.ndarray:
        """Vertex coordinates along one axis; the middle one is exactly 0."""
        j = np.arange(self.resolution + 1, dtype=float)
        return self.epsilon * (2.0 * j - self.resolution) / self.resolution

    def cell_bounds(self, cell) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(cell)
        coords = self.coords()
        return coords[c // 2], coords[(c + 1) // 2]

    def cubes_containing(self, point, tol: float = 1e-12) -> list[tuple[int, ...]]:
        """Indices of every top cube whose closure contains `point`."""
        coords = self.coords()
        per_axis = []
        for value in np.asarray(point, dtype=float):
            if value < coords[0] - tol or value > coords[-1] + tol:
                return []
            hits = [j for j in range(self.resolution)
                    if coords[j] - tol <= value <= coords[j + 1] + tol]
            per_axis.append(hits)
        out = [()]
        for hits in per_axis:
            out = [idx + (j,) for idx in out for j in hits]
        return out


def cell_dim(cell) -> int:
    return sum(c & 1 for c in cell)


def cell_faces(cell) -> list[tuple[tuple[int, ...], int]]:
    """Boundary of an elementary cube as (face, coefficient) pairs.

    For a cell with nondegenerate axes a_1 < ... < a_k the boundary is
    sum_j (-1)^(j-1) (upper_j - lower_j); an edge has boundary
    (upper vertex) - (lower vertex).
    """
    out = []
    sign = 1
    for a, c in enumerate(cell):
        if c & 1:
            lower = cell[:a] + (c - 1,) + cell[a + 1:]
            upper = cell[:a] + (c + 1,) + cell[a + 1:]
            out.append((lower, -sign))
            out.append((upper, sign))
            sign = -sign
    return out


def close_top_cubes(mask: np.ndarray) -> np.ndarray:
    """Doubled-grid presence array for the closure of a set of top cubes."""
    d = mask.ndim
    shape = tuple(2 * s + 1 for s in mask.shape)
    present = np.zeros(shape, dtype=bool)
    present[(slice(1, None, 2),) * d] = mask
    return _dilate(present)


def close_cells(cells, grid: Grid) -> np.ndarray:
    """Doubled-grid presence array for the closure of arbitrary cells."""
    present = np.zeros(grid.doubled_shape, dtype=bool)
    cells = list(cells)
    if cells:
        idx = np.asarray(cells, dtype=np.int64).reshape(len(cells), grid.dim)
        present[tuple(idx.T)] = True
    return _dilate(present)


def _dilate(present: np.ndarray) -> np.ndarray:
    for axis in range(present.ndim):
        view = np.moveaxis(present, axis, 0)
        odd = view[1::2].copy()
        view[0:-1:2] |= odd
        view[2::2] |= odd
    return present


def cells_of(present: np.ndarray) -> list[tuple[int, ...]]:
    return [tuple(int(v) for v in row) for row in np.argwhere(present)]


@numba.njit(cache=True)
def _collapse_kernel(present, shape):
    d = shape.shape[0]
    total = present.shape[0]
    strides = np.ones(d, dtype=np.int64)
    for a in range(d - 2, -1, -1):
        strides[a] = strides[a + 1] * shape[a + 1]

    count = np.zeros(total, dtype=np.int8)
    for i in range(total):
        if present[i]:
            rest = i
            for a in range(d):
                c = rest // strides[a]
                rest -= c * strides[a]
                if c % 2 == 0:
                    if c > 0 and present[i - strides[a]]:
                        count[i] += 1
                    if c < shape[a] - 1 and present[i + strides[a]]:
                        count[i] += 1

    queue = np.empty(total, dtype=np.int64)
    queued = np.zeros(total, dtype=np.bool_)
    head = 0
    size = 0
    for i in range(total):
        if present[i] and count[i] == 1:
            queue[(head + size) % total] = i
            size += 1
            queued[i] = True

    removed = 0
    coord = np.empty(d, dtype=np.int64)
    while size > 0:
        s = queue[head]
        head = (head + 1) % total
        size -= 1
        queued[s] = False
        if not present[s] or count[s] != 1:
            continue
        rest = s
        for a in range(d):
            coord[a] = rest // strides[a]
            rest -= coord[a] * strides[a]
        tau = -1
        for a in range(d):
            if coord[a] % 2 == 0:
                if coord[a] > 0 and present[s - strides[a]]:
                    tau = s - strides[a]
                    break
                if coord[a] < shape[a] - 1 and present[s + strides[a]]:
                    tau = s + strides[a]
                    break
        if tau < 0:
            continue
        present[s] = False
        present[tau] = False
        removed += 2
        # faces of tau other than s lose a coface, as do the faces of s
        for which in range(2):
            cell = tau if which == 0 else s
            rest = cell
            for a in range(d):
                coord[a] = rest // strides[a]
                rest -= coord[a] * strides[a]
            for a in range(d):
                if coord[a] % 2 == 1:
                    for nb in (cell - strides[a], cell + strides[a]):
                        if nb == s:
                            continue
                        count[nb] -= 1
                        if present[nb] and count[nb] == 1 and not queued[nb]:
                            queue[(head + size) % total] = nb
                            size += 1
                            queued[nb] = True
    return removed


def collapse(present: np.ndarray) -> np.ndarray:
    """Greedy elementary collapses; the result is a subcomplex of equal homotopy type.

    A cell with exactly one codimension-one coface is free; it is removed
    together with that coface.  Processing order is FIFO from increasing
    flat index, so the outcome is deterministic.
    """
    flat = np.ascontiguousarray(present, dtype=np.bool_).ravel().copy()
    _collapse_kernel(flat, np.asarray(present.shape, dtype=np.int64))
    return flat.reshape(present.shape)
