"""Integer homology and cohomology of chain complexes via Smith normal form."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chains import Chain, ChainComplex, Reduction, assemble_chain_complex, reduce_unit_pivots
from .snf import smith_with_inverses


@dataclass
class HomologyProfile:
    """Betti numbers, torsion coefficients and free generators per degree."""

    betti: list[int]
    torsion: list[list[int]]
    representatives: list[list[Chain]] = field(default_factory=list)

    @property
    def top_dim(self) -> int:
        return len(self.betti) - 1

    def degree(self, k: int) -> tuple[int, list[int]]:
        if 0 <= k < len(self.betti):
            return self.betti[k], self.torsion[k]
        return 0, []

    def padded(self, top: int) -> HomologyProfile:
        """Same groups listed through degree `top` (higher groups are 0)."""
        extra = max(0, top + 1 - len(self.betti))
        reps = list(self.representatives) + [[] for _ in range(top + 1 - len(self.representatives))]
        return HomologyProfile(self.betti + [0] * extra, self.torsion + [[] for _ in range(extra)], reps)

    def groups(self) -> list[tuple[int, tuple[int, ...]]]:
        return [(b, tuple(t)) for b, t in zip(self.betti, self.torsion)]

    def same_groups(self, other: HomologyProfile) -> bool:
        top = max(self.top_dim, other.top_dim)
        return self.padded(top).groups() == other.padded(top).groups()

    def label(self) -> str:
        parts = []
        for k, (b, tors) in enumerate(zip(self.betti, self.torsion)):
            terms = ([f"Z^{b}"] if b > 1 else ["Z"] if b == 1 else [])
            terms += [f"Z/{t}" for t in tors]
            parts.append(f"H{k}=" + (" + ".join(terms) if terms else "0"))
        return ", ".join(parts)


@dataclass(frozen=True)
class SphereProfile:
    """Integer (co)homology pattern of the d-sphere."""

    d: int

    def betti(self, top: int) -> list[int]:
        out = [0] * (max(top, self.d) + 1)
        if self.d == 0:
            out[0] = 2
        else:
            out[0] = 1
            out[self.d] = 1
        return out


def _dense(M) -> np.ndarray:
    return np.asarray(M.toarray(), dtype=np.int64)


def _groups(mats: list[np.ndarray], sizes: list[int], want_reps: bool):
    """Groups ker(mats[k]) / im(mats[k+1]) for a complex given by dense matrices.

    mats[k] maps degree k to degree k-1 (mats[0] has zero rows).
    """
    top = len(sizes) - 1
    ranks = []
    kernels = []
    for k in range(top + 1):
        B = mats[k]
        if B.shape[0] == 0 or B.shape[1] == 0 or not np.any(B):
            ranks.append(0)
            kernels.append((np.eye(sizes[k], dtype=np.int64), np.eye(sizes[k], dtype=np.int64)))
            continue
        D, _, V, _, Vi = smith_with_inverses(B)
        r = int(sum(1 for i in range(min(D.shape)) if D[i, i] != 0))
        ranks.append(r)
        kernels.append((V[:, r:], Vi[r:, :]))

    betti, torsion, reps = [], [], []
    for k in range(top + 1):
        Z, Zrows = kernels[k]
        z = Z.shape[1]
        nxt = mats[k + 1] if k + 1 <= top else np.zeros((sizes[k], 0), dtype=np.int64)
        if z == 0:
            betti.append(0)
            torsion.append([])
            reps.append([])
            continue
        W = Zrows.dot(nxt) if nxt.shape[1] else np.zeros((z, 0), dtype=np.int64)
        if W.size and np.any(W):
            E, _, _, Pi, _ = smith_with_inverses(W)
            diag = [int(E[i, i]) for i in range(min(E.shape)) if E[i, i] != 0]
            basis = Z.dot(Pi)
        else:
            diag = []
            basis = Z
        s = len(diag)
        betti.append(z - s)
        torsion.append([d for d in diag if d > 1])
        if want_reps:
            gens = []
            for col in range(s, z):
                vec = [int(v) for v in basis[:, col]]
                first = next(v for v in vec if v != 0)
                sign = 1 if first > 0 else -1
                gens.append({i: sign * v for i, v in enumerate(vec) if v})
            reps.append(gens)
        else:
            reps.append([])
    return betti, torsion, reps


def homology(cc: ChainComplex, *, reduce: bool = True, representatives: bool = True) -> HomologyProfile:
    """H_k(cc; Z) for k = 0..top, with generators of the free parts.

    With ``reduce`` the complex is first shrunk by unit-pivot
    cancellations, then the remainder goes through Smith normal form.
    """
    if reduce:
        red = reduce_unit_pivots(cc)
        work = red.complex
    else:
        red = None
        work = cc
    sizes = [work.count(k) for k in range(work.top_dim + 1)]
    mats = [_dense(work.matrix(k)) for k in range(work.top_dim + 1)]
    betti, torsion, reps = _groups(mats, sizes, representatives)
    chains: list[list[Chain]] = []
    for k, gens in enumerate(reps):
        out = []
        for g in gens:
            local = {work.cells[k][i]: v for i, v in g.items()}
            out.append(red.embed_chain(k, local) if red is not None else local)
        chains.append(out)
    return HomologyProfile(betti, torsion, chains)


def cubical_homology(c, *, max_cells=None, representatives: bool = True) -> HomologyProfile:
    """Homology of a CubicalComplex, padded through degree c.grid.dim.

    The closure is collapsed first; generators are chains on cells of the
    collapsed subcomplex and hence cycles of the full complex.
    """
    kwargs = {} if max_cells is None else {"max_cells": max_cells}
    cc = assemble_chain_complex(c, collapse_first=True, **kwargs)
    return homology(cc, representatives=representatives).padded(c.grid.dim)


def cohomology(h: HomologyProfile) -> HomologyProfile:
    """Integer cohomology by universal coefficients.

    H^k is free of rank betti_k with torsion equal to that of H_{k-1}.
    """
    torsion = [[]] + [list(t) for t in h.torsion[:-1]]
    extra = list(h.torsion[-1]) if h.torsion else []
    betti = list(h.betti)
    if extra:
        betti.append(0)
        torsion.append(extra)
    return HomologyProfile(betti, torsion, [])


def cochain_cohomology(cc: ChainComplex) -> HomologyProfile:
    """H^k computed directly from coboundary matrices (transposed boundaries)."""
    top = cc.top_dim
    sizes = [cc.count(top - j) for j in range(top + 1)]
    # reindex so "degree" j of the cochain complex is k = top - j
    mats = [np.zeros((0, sizes[0]), dtype=np.int64)]
    for j in range(1, top + 1):
        k = top - j + 1
        mats.append(_dense(cc.matrix(k)).T.copy())
    betti, torsion, _ = _groups(mats, sizes, False)
    return HomologyProfile(betti[::-1], torsion[::-1], [])


def sphere_mismatch(h: HomologyProfile, d: int) -> list[int]:
    """Degrees where the cohomology of `h` differs from that of S^d."""
    co = cohomology(h)
    top = max(co.top_dim, d)
    co = co.padded(top)
    target = SphereProfile(d).betti(top)
    return [k for k in range(top + 1) if co.betti[k] != target[k] or co.torsion[k]]


def matches_sphere(h: HomologyProfile, d: int) -> bool:
    return not sphere_mismatch(h, d)
