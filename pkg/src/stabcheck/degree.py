"""Winding numbers of planar loops and degrees of f/|f| on (n-1)-cycles."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cubical import Grid, cell_dim, cell_faces
from .expr import evaluate, parse


class DegreeError(ValueError):
    pass


class TooCoarse(DegreeError):
    pass


class OriginTooClose(DegreeError):
    pass


class ZeroCrossing(DegreeError):
    pass


class DegenerateRegularValue(DegreeError):
    pass


class NotACycle(DegreeError):
    pass


def winding_number(samples, delta: float = 1e-12) -> int:
    """Winding number about 0 of a closed planar polyline.

    The loop is closed automatically when the last sample differs from
    the first.  Every step between consecutive samples must turn by less
    than pi/2 and no sample may come within `delta` of the origin.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError("need at least three planar samples")
    if not np.array_equal(pts[0], pts[-1]):
        pts = np.vstack([pts, pts[:1]])
    radius = np.hypot(pts[:, 0], pts[:, 1])
    if radius.min() < delta:
        raise OriginTooClose(f"loop passes within {radius.min():.3g} of the origin")
    a, b = pts[:-1], pts[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
    steps = np.arctan2(cross, dot)
    if np.abs(steps).max() >= math.pi / 2:
        raise TooCoarse("angular step of pi/2 or more; sample the loop more finely")
    total = steps.sum() / (2 * math.pi)
    k = int(round(total))
    if abs(total - k) > 1e-6:
        raise DegreeError(f"angle sum {total} is not close to an integer")
    return k


@dataclass
class ProbeLoop:
    """Closed loop in state-input space, given by samples and optionally a parametrization.

    ``projection`` picks the pair of coordinates (0-based) whose
    normalized values define the loop's map to the circle.
    """

    name: str
    points: np.ndarray
    projection: tuple[int, int] = (0, 1)
    param: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if len(self.points) < 64:
            raise ValueError("a probe loop needs at least 64 samples")

    @classmethod
    def from_function(cls, name, fn, samples=256, projection=(0, 1)) -> ProbeLoop:
        t = np.linspace(0.0, 2 * math.pi, samples + 1)
        pts = np.array(fn(t), dtype=float)
        pts[-1] = pts[0]
        return cls(name, pts, tuple(projection), fn)

    def refined(self, factor: int = 4) -> ProbeLoop | None:
        if self.param is None:
            return None
        return ProbeLoop.from_function(self.name, self.param, (len(self.points) - 1) * factor,
                                       self.projection)

    def projected(self) -> np.ndarray:
        i, j = self.projection
        return self.points[:, [i, j]]


def circle_probe(dim: int, i: int, j: int, radius: float, samples: int = 256) -> ProbeLoop:
    """Circle of the given radius in the (i, j) coordinate plane."""

    def fn(t):
        pts = np.zeros((len(t), dim))
        pts[:, i] = radius * np.cos(t)
        pts[:, j] = radius * np.sin(t)
        return pts

    return ProbeLoop.from_function(f"circle[{i},{j}]@{radius:g}", fn, samples, (i, j))


def expression_probe(name: str, texts, n: int, m: int, samples: int = 256,
                     projection=(0, 1)) -> ProbeLoop:
    """Loop whose coordinates are expressions of t in [0, 2*pi]."""
    if len(texts) != n + m:
        raise ValueError(f"probe {name!r} needs {n + m} coordinate expressions")
    exprs = [parse(text, n, m, allow_t=True) for text in texts]

    def fn(t):
        cols = [np.broadcast_to(np.asarray(evaluate(e, (), (), t), dtype=float), t.shape)
                for e in exprs]
        return np.stack(cols, axis=1)

    return ProbeLoop.from_function(name, fn, samples, projection)


def _refining(loop, compute, max_samples=1 << 16):
    while True:
        try:
            return compute(loop)
        except TooCoarse:
            nxt = loop.refined()
            if nxt is None or len(nxt.points) > max_samples:
                raise
            loop = nxt


def loop_projection_winding(loop: ProbeLoop, delta: float = 1e-12) -> int:
    """Winding number of the loop's own coordinate projection."""
    return _refining(loop, lambda lp: winding_number(lp.projected(), delta))


def loop_image_winding(sys, loop: ProbeLoop, target_projection=(0, 1), delta: float = 1e-12) -> int:
    """Winding number of (f_i, f_j) along the loop, for target_projection = (i, j)."""
    i, j = target_projection

    def compute(lp):
        values = sys(lp.points)
        norms = np.linalg.norm(values, axis=1)
        if norms.min() < delta:
            raise ZeroCrossing(f"|f| = {norms.min():.3g} on the loop {lp.name}")
        return winding_number(values[:, [i, j]], delta)

    return _refining(loop, compute)


# Top degree ------------------------------------------------------------------


def _kuhn_simplices(k: int):
    """Kuhn triangulation of [0,1]^k: (vertex corner offsets, orientation sign)."""
    out = []
    for perm in itertools.permutations(range(k)):
        verts = [np.zeros(k, dtype=np.int64)]
        for a in perm:
            nxt = verts[-1].copy()
            nxt[a] = 1
            verts.append(nxt)
        inversions = sum(1 for x, y in itertools.combinations(perm, 2) if x > y)
        out.append((np.array(verts), -1 if inversions % 2 else 1))
    return out


def chain_boundary(chain: dict) -> dict:
    out: dict = {}
    for cell, coeff in chain.items():
        for face, sign in cell_faces(cell):
            v = out.get(face, 0) + coeff * sign
            if v:
                out[face] = v
            else:
                out.pop(face, None)
    return out


def cycle_simplices(sys, cycle: dict, grid: Grid, *, delta: float, max_angle: float = 0.3,
                    max_subdiv: int = 64):
    """Image simplices of f/|f| over a triangulated cubical cycle.

    Returns (vertices, signs): vertices[s] holds the n unit vectors that a
    positively oriented parameter simplex maps to, and signs[s] carries the
    chain coefficient times the simplex orientation.  Each face is
    subdivided until neighbouring image vertices are less than
    `max_angle` radians apart (or max_subdiv is reached).
    """
    n = sys.n
    k = n - 1
    simplices = _kuhn_simplices(k)
    all_verts, all_signs = [], []
    for cell in sorted(cycle):
        coeff = cycle[cell]
        lo, hi = grid.cell_bounds(cell)
        axes = [a for a, c in enumerate(cell) if c & 1]
        s = 1
        while True:
            ticks = np.linspace(0.0, 1.0, s + 1)
            mesh = np.stack(np.meshgrid(*([ticks] * k), indexing="ij"), axis=-1).reshape(-1, k) \
                if k else np.zeros((1, 0))
            pts = np.tile(lo, (len(mesh), 1))
            for col, a in enumerate(axes):
                pts[:, a] = lo[a] + (hi[a] - lo[a]) * mesh[:, col]
            vals = sys(pts)
            norms = np.linalg.norm(vals, axis=1)
            if norms.min() < delta:
                raise ZeroCrossing(f"|f| = {norms.min():.3g} on cell {cell}")
            unit = (vals / norms[:, None]).reshape((s + 1,) * k + (n,))
            if k == 0 or s >= max_subdiv:
                break
            worst = 0.0
            for offset in itertools.product((0, 1), repeat=k):
                if not any(offset):
                    continue
                a = unit[tuple(slice(0, s) for _ in range(k))]
                b = unit[tuple(slice(o, s + o) for o in offset)]
                cos = np.clip(np.sum(a * b, axis=-1), -1.0, 1.0)
                worst = max(worst, float(np.arccos(cos).max()))
            if worst < max_angle:
                break
            s *= 2
        base = np.stack(np.meshgrid(*([np.arange(s)] * k), indexing="ij"), axis=-1).reshape(-1, k) \
            if k else np.zeros((1, 0), dtype=np.int64)
        for verts, orient in simplices:
            idx = base[:, None, :] + verts[None, :, :]
            if k:
                img = unit[tuple(idx[..., a] for a in range(k))]
            else:
                img = unit.reshape(1, 1, n)
            all_verts.append(img)
            all_signs.append(np.full(len(img), coeff * orient, dtype=np.int64))
    if not all_verts:
        return np.zeros((0, n, n)), np.zeros(0, dtype=np.int64)
    return np.concatenate(all_verts), np.concatenate(all_signs)


def count_preimages(verts: np.ndarray, signs: np.ndarray, v: np.ndarray, tau: float):
    """Signed count of image simplices whose cone contains v, or None if v is degenerate."""
    n = verts.shape[-1]
    if len(verts) == 0:
        return 0
    dets = np.linalg.det(verts)
    scale = np.prod(np.linalg.norm(verts, axis=2), axis=1)
    good = np.abs(dets) > 1e-13 * scale
    if not np.any(good):
        return 0
    M = np.transpose(verts[good], (0, 2, 1))
    lam = np.linalg.solve(M, np.broadcast_to(v, (len(M), n))[..., None])[..., 0]
    lam = lam / np.abs(lam).sum(axis=1, keepdims=True)
    inside = np.all(lam > tau, axis=1)
    edge = np.all(lam > -tau, axis=1) & ~inside
    if np.any(edge):
        return None
    return int(np.sum(np.sign(dets[good][inside]).astype(np.int64) * signs[good][inside]))


def top_degree_detail(sys, cycle: dict, grid: Grid, *, regular_value=None, seed: int = 0,
                      delta: float | None = None, tau: float = 1e-9, max_retries: int = 32,
                      max_angle: float = 0.3, max_subdiv: int = 64) -> tuple[int, np.ndarray]:
    """Degree of f/|f| on an (n-1)-cycle, with the regular value used."""
    k = sys.n - 1
    if any(cell_dim(c) != k for c in cycle):
        raise NotACycle(f"cycle cells must have dimension {k}")
    if k > 0 and chain_boundary(cycle):
        raise NotACycle("chain has nonzero boundary")
    if delta is None:
        delta = 1e-6 * grid.epsilon
    verts, signs = cycle_simplices(sys, cycle, grid, delta=delta, max_angle=max_angle,
                                   max_subdiv=max_subdiv)
    rng = np.random.default_rng(seed)
    if regular_value is not None:
        candidates = [np.asarray(regular_value, dtype=float)]
    else:
        candidates = (rng.normal(size=sys.n) for _ in range(max_retries))
    for v in candidates:
        v = v / np.linalg.norm(v)
        count = count_preimages(verts, signs, v, tau)
        if count is not None:
            return count, v
    raise DegenerateRegularValue("no admissible regular value found")


def top_degree(sys, cycle: dict, grid: Grid, **kwargs) -> int:
    """Mapping degree of f/|f| restricted to an oriented (n-1)-cycle.

    Counts, with orientation signs, the triangulated facets whose
    spherical image covers a regular value.
    """
    return top_degree_detail(sys, cycle, grid, **kwargs)[0]


@dataclass
class InducedMapReport:
    """Degrees witnessed on probe loops and homology generators."""

    probes: list[dict] = field(default_factory=list)
    generators: list[dict] = field(default_factory=list)

    @property
    def witnessed_generator(self) -> bool:
        records = [p for p in self.probes if p.get("certified")] + self.generators
        return any(r.get("degree") is not None and abs(r["degree"]) == 1 for r in records)

    def to_dict(self) -> dict:
        return {"probes": self.probes, "generators": self.generators,
                "witnessed_generator": self.witnessed_generator}
