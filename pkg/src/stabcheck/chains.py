"""Integer chain complexes: assembly from cubical cells and unit-pivot reduction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

import numpy as np
from scipy import sparse

from .cubical import CapacityError, Grid, cell_dim, cell_faces, cells_of, collapse

Chain = dict  # cell -> nonzero integer coefficient

DEFAULT_MAX_CELLS = 4_000_000


@dataclass
class ChainComplex:
    """Cells per degree plus sparse boundary matrices.

    ``boundaries[k]`` maps C_k to C_{k-1}: its rows follow ``cells[k-1]``
    and its columns ``cells[k]`` (``boundaries[0]`` has no rows).
    """

    cells: list[list[Hashable]]
    boundaries: list[sparse.csc_matrix]
    grid: Grid | None = None
    _index: list[dict] = field(default=None, init=False, repr=False)

    @property
    def top_dim(self) -> int:
        return len(self.cells) - 1

    def count(self, k: int) -> int:
        return len(self.cells[k]) if 0 <= k < len(self.cells) else 0

    @property
    def size(self) -> int:
        return sum(len(c) for c in self.cells)

    def index(self, k: int) -> dict:
        if self._index is None:
            self._index = [{c: i for i, c in enumerate(cs)} for cs in self.cells]
        return self._index[k]

    def matrix(self, k: int) -> sparse.csc_matrix:
        """Boundary matrix of degree k, with empty matrices outside 0..top."""
        if 0 <= k <= self.top_dim:
            return self.boundaries[k]
        return sparse.csc_matrix((self.count(k - 1), self.count(k)), dtype=np.int64)

    def boundary(self, chain: Chain, k: int) -> Chain:
        out: Chain = {}
        if k == 0:
            return out
        M = self.boundaries[k]
        idx = self.index(k)
        rows = self.cells[k - 1]
        for cell, coeff in chain.items():
            j = idx[cell]
            for p in range(M.indptr[j], M.indptr[j + 1]):
                face = rows[M.indices[p]]
                v = out.get(face, 0) + coeff * int(M.data[p])
                if v:
                    out[face] = v
                else:
                    out.pop(face, None)
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * len(c) for k, c in enumerate(self.cells))

    @classmethod
    def from_boundaries(cls, cells, boundary_dicts, grid=None) -> ChainComplex:
        """Build from per-cell boundary dicts: boundary_dicts[cell] = {face: coeff}."""
        cells = [list(cs) for cs in cells]
        mats = [sparse.csc_matrix((0, len(cells[0])), dtype=np.int64)]
        for k in range(1, len(cells)):
            row_of = {c: i for i, c in enumerate(cells[k - 1])}
            rows, cols, vals = [], [], []
            for j, cell in enumerate(cells[k]):
                for face, coeff in boundary_dicts.get(cell, {}).items():
                    if coeff:
                        rows.append(row_of[face])
                        cols.append(j)
                        vals.append(coeff)
            mats.append(sparse.csc_matrix(
                (np.asarray(vals, dtype=np.int64), (rows, cols)),
                shape=(len(cells[k - 1]), len(cells[k])), dtype=np.int64))
        return cls(cells, mats, grid)


def chain_complex_from_present(present: np.ndarray, grid: Grid) -> ChainComplex:
    """Chain complex of the cells flagged in a doubled-grid presence array."""
    cells = [[] for _ in range(grid.dim + 1)]
    for cell in cells_of(present):
        cells[cell_dim(cell)].append(cell)
    bd = {c: dict(cell_faces(c)) for cs in cells[1:] for c in cs}
    while len(cells) > 1 and not cells[-1]:
        cells.pop()
    if not cells[0] and len(cells) == 1:
        cells = [[]]
    return ChainComplex.from_boundaries(cells, bd, grid)


def chain_complex_from_cells(cells, grid: Grid) -> ChainComplex:
    """Closure of the given elementary cells as a chain complex."""
    from .cubical import close_cells

    return chain_complex_from_present(close_cells(cells, grid), grid)


def assemble_chain_complex(c, *, collapse_first: bool = False,
                           max_cells: int | None = DEFAULT_MAX_CELLS) -> ChainComplex:
    """Materialize the chain complex of a CubicalComplex.

    With ``collapse_first`` the closure is first shrunk by free-face
    collapses; the result is a subcomplex with the same homology, so
    cycles found there are cycles of the full complex too.
    """
    present = c.closure()
    total = int(present.sum())
    if max_cells is not None and total > max_cells:
        raise CapacityError(f"complex has {total} cells, limit is {max_cells}")
    if total == 0:
        raise ValueError("empty cubical complex")
    if collapse_first:
        present = collapse(present)
    return chain_complex_from_present(present, c.grid)


# Algebraic reduction ---------------------------------------------------------


@dataclass
class Reduction:
    """A smaller chain complex with a chain map back into the original.

    ``embed(k, cell)`` gives the chain in the original complex that the
    surviving cell stands for; it induces an isomorphism on homology.
    """

    complex: ChainComplex
    images: list[dict]

    def embed(self, k: int, cell) -> Chain:
        return self.images[k].get(cell, {cell: 1})

    def embed_chain(self, k: int, coeffs: Chain) -> Chain:
        out: Chain = {}
        for cell, a in coeffs.items():
            for orig, b in self.embed(k, cell).items():
                v = out.get(orig, 0) + a * b
                if v:
                    out[orig] = v
                else:
                    out.pop(orig, None)
        return out


def reduce_unit_pivots(cc: ChainComplex) -> Reduction:
    """Cancel cell pairs (s, t) with <dt, s> = +-1 until none remain.

    Cancelling s (degree k-1) against t (degree k) replaces every other
    k-cell a by a - <da,s><dt,s> t and drops t from every boundary in
    degree k+1; this is exact over Z.
    """
    top = cc.top_dim
    bd: list[dict] = [dict() for _ in range(top + 1)]
    cobd: list[dict] = [dict() for _ in range(top + 1)]
    for k in range(top + 1):
        for c in cc.cells[k]:
            bd[k][c] = {}
            cobd[k][c] = set()
    for k in range(1, top + 1):
        M = cc.boundaries[k]
        rows = cc.cells[k - 1]
        for j, cell in enumerate(cc.cells[k]):
            d = bd[k][cell]
            for p in range(M.indptr[j], M.indptr[j + 1]):
                if M.data[p]:
                    face = rows[M.indices[p]]
                    d[face] = int(M.data[p])
                    cobd[k - 1][face].add(cell)
    images: list[dict] = [dict() for _ in range(top + 1)]
    alive = [dict.fromkeys(cc.cells[k]) for k in range(top + 1)]

    for k in range(top, 0, -1):
        for tau in list(alive[k]):
            if tau not in alive[k]:
                continue
            sigma = None
            best = None
            for face, coeff in bd[k][tau].items():
                if abs(coeff) == 1:
                    load = len(cobd[k - 1][face])
                    if best is None or load < best:
                        sigma, best = face, load
            if sigma is None:
                continue
            c = bd[k][tau][sigma]
            img_tau = images[k].get(tau, {tau: 1})
            for a in list(cobd[k - 1][sigma]):
                if a == tau:
                    continue
                lam = bd[k][a][sigma] * c
                da = bd[k][a]
                for face, coeff in bd[k][tau].items():
                    v = da.get(face, 0) - lam * coeff
                    if v:
                        if face not in da:
                            cobd[k - 1][face].add(a)
                        da[face] = v
                    elif face in da:
                        del da[face]
                        cobd[k - 1][face].discard(a)
                img_a = dict(images[k].get(a, {a: 1}))
                for orig, coeff in img_tau.items():
                    v = img_a.get(orig, 0) - lam * coeff
                    if v:
                        img_a[orig] = v
                    else:
                        img_a.pop(orig, None)
                images[k][a] = img_a
            # remove tau
            for face in bd[k][tau]:
                cobd[k - 1][face].discard(tau)
            if k < top:
                for rho in cobd[k][tau]:
                    del bd[k + 1][rho][tau]
            del bd[k][tau], cobd[k][tau], alive[k][tau]
            images[k].pop(tau, None)
            # remove sigma; its cofaces are gone by now
            if k - 1 > 0:
                for face in bd[k - 1][sigma]:
                    cobd[k - 2][face].discard(sigma)
            del bd[k - 1][sigma], cobd[k - 1][sigma], alive[k - 1][sigma]
            images[k - 1].pop(sigma, None)

    cells = [list(alive[k]) for k in range(top + 1)]
    reduced = ChainComplex.from_boundaries(
        cells, {c: bd[k][c] for k in range(1, top + 1) for c in cells[k]}, cc.grid)
    return Reduction(reduced, images)


def dump_boundaries(cc: ChainComplex, stream) -> None:
    """Write every boundary matrix as "row col value" triplets, one block per degree."""
    for k in range(1, cc.top_dim + 1):
        M = cc.boundaries[k].tocoo()
        stream.write(f"# degree {k}: {M.shape[0]} x {M.shape[1]}\n")
        for i, j, v in sorted(zip(M.row.tolist(), M.col.tolist(), M.data.tolist())):
            stream.write(f"{i} {j} {v}\n")
