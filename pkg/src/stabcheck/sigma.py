"""Certified cubical approximations of the nonvanishing set of f.

For a grid on the box [-eps, eps]^(n+m) a top cube is kept when interval
arithmetic proves that some component of f has no zero on the closed cube.
The union of kept cubes is therefore a compact subset of the set where
f != 0 (an inner approximation).  Norm balls are taken in the max norm, so
the analysis region is the box itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .cubical import Grid, close_top_cubes
from .expr import Expression, evaluate, eval_interval, parse, to_text, variables
from .interval import DomainError, Interval


class InvalidSystem(ValueError):
    pass


@dataclass(frozen=True)
class VectorFieldSystem:
    n: int
    m: int
    components: tuple[Expression, ...]
    name: str = "system"

    def __post_init__(self):
        if self.n < 1 or self.m < 0:
            raise InvalidSystem("need n >= 1 and m >= 0")
        if len(self.components) != self.n:
            raise InvalidSystem(f"expected {self.n} components, got {len(self.components)}")
        for i, comp in enumerate(self.components):
            for v in variables(comp):
                limit = {"x": self.n, "u": self.m}.get(v.kind, 0)
                if not 1 <= v.index <= limit:
                    raise InvalidSystem(f"component {i + 1} uses an undeclared variable {v}")

    @classmethod
    def from_strings(cls, components, m: int = 0, name: str = "system") -> VectorFieldSystem:
        n = len(components)
        return cls(n, m, tuple(parse(text, n, m) for text in components), name)

    @property
    def dim(self) -> int:
        return self.n + self.m

    @property
    def texts(self) -> list[str]:
        return [to_text(c) for c in self.components]

    def __call__(self, points) -> np.ndarray:
        """f at an (N, n+m) array of points; returns (N, n)."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        x = [pts[:, i] for i in range(self.n)]
        u = [pts[:, self.n + j] for j in range(self.m)]
        cols = []
        for comp in self.components:
            v = evaluate(comp, x, u)
            cols.append(np.broadcast_to(np.asarray(v, dtype=float), (pts.shape[0],)))
        out = np.stack(cols, axis=1)
        return out[0] if single else out

    def check_equilibrium(self):
        """Raise InvalidSystem unless f(0, 0) = 0."""
        value = self(np.zeros(self.dim))
        if np.any(value != 0):
            raise InvalidSystem(f"f(0,0) = {value.tolist()} is not zero")

    def scaled(self, factor: float) -> VectorFieldSystem:
        comps = tuple(parse(f"{factor!r}*({to_text(c)})", self.n, self.m) for c in self.components)
        return VectorFieldSystem(self.n, self.m, comps, self.name)


@dataclass(frozen=True)
class AnalysisParams:
    epsilon: float = 0.5
    resolutions: tuple[int, ...] = (8, 16)
    probe_radius: float | None = None
    samples_per_cube: int = 8
    image_cells: int = 8
    seed: int = 0
    max_cells: int = 4_000_000
    delta: float | None = None
    tau: float = 1e-9
    max_retries: int = 32

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "resolutions", tuple(int(r) for r in self.resolutions))
        if not self.resolutions:
            raise ValueError("at least one resolution is required")
        for r in self.resolutions:
            if r < 4 or r % 2:
                raise ValueError(f"resolution {r} must be even and at least 4")
        if list(self.resolutions) != sorted(set(self.resolutions)):
            raise ValueError("resolutions must ascend")
        if self.probe_radius is None:
            object.__setattr__(self, "probe_radius", self.epsilon / 4)
        if not 0 < self.probe_radius < self.epsilon / 2:
            raise ValueError("probe_radius must lie in (0, epsilon/2)")
        if self.samples_per_cube < 1:
            raise ValueError("samples_per_cube must be at least 1")
        if self.image_cells < 2 or self.image_cells % 2:
            raise ValueError("image_cells must be even and at least 2")
        if self.delta is None:
            object.__setattr__(self, "delta", 1e-6 * self.epsilon)


@dataclass
class CubicalComplex:
    """Kept top cubes of a grid, with the certificate for each one.

    ``certifier[idx]`` is the component index whose enclosure excludes 0
    on cube idx (-1 where the cube was dropped) and ``bound[idx]`` is a
    lower bound for |f_certifier| on that cube.
    """

    grid: Grid
    included: np.ndarray
    certifier: np.ndarray = field(repr=False, default=None)
    bound: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def resolution(self) -> int:
        return self.grid.resolution

    @property
    def top_cubes(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in np.argwhere(self.included)]

    def __len__(self):
        return int(self.included.sum())

    def closure(self) -> np.ndarray:
        return close_top_cubes(self.included)

    def cube_bounds(self, idx) -> tuple[np.ndarray, np.ndarray]:
        coords = self.grid.coords()
        idx = np.asarray(idx)
        return coords[idx], coords[idx + 1]

    def contains_point(self, point, tol: float = 1e-12) -> bool:
        return any(self.included[idx] for idx in self.grid.cubes_containing(point, tol))

    def region(self, resolution: int) -> np.ndarray:
        """Boolean mask of this complex's union resampled on a finer grid."""
        if resolution % self.resolution:
            raise ValueError("target resolution must be a multiple")
        k = resolution // self.resolution
        out = self.included
        for axis in range(self.dim):
            out = np.repeat(out, k, axis=axis)
        return out


_CHUNK = 1 << 17


def _all_indices(r: int, d: int, start: int, stop: int) -> np.ndarray:
    return np.stack(np.unravel_index(np.arange(start, stop), (r,) * d), axis=1)


def build_sigma_complex(sys: VectorFieldSystem, params: AnalysisParams, resolution: int) -> CubicalComplex:
    """Top cubes of the resolution-r grid on which f is certified nonzero."""
    if resolution not in params.resolutions:
        raise ValueError(f"resolution {resolution} is not one of {params.resolutions}")
    grid = Grid(sys.dim, resolution, params.epsilon)
    coords = grid.coords()
    total = resolution ** sys.dim
    certifier = np.full(total, -1, dtype=np.int8)
    bound = np.zeros(total)
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        idx = _all_indices(resolution, sys.dim, start, stop)
        box = [Interval(coords[idx[:, a]], coords[idx[:, a] + 1]) for a in range(sys.dim)]
        for i, comp in enumerate(sys.components):
            try:
                enc = eval_interval(comp, box, sys.n)
            except DomainError as exc:
                bad = np.flatnonzero(np.broadcast_to(exc.mask, (stop - start,)))[0]
                cube = tuple(int(v) for v in idx[bad])
                lo, hi = coords[idx[bad]], coords[idx[bad] + 1]
                raise DomainError(
                    f"component {i + 1}: {exc} on cube {cube} = "
                    f"{[(float(a), float(b)) for a, b in zip(lo, hi)]}", mask=None) from exc
            lo = np.broadcast_to(np.asarray(enc.lo, dtype=float), (stop - start,))
            hi = np.broadcast_to(np.asarray(enc.hi, dtype=float), (stop - start,))
            ok = (lo > 0) | (hi < 0)
            gap = np.where(lo > 0, lo, -hi)
            chunk_cert = certifier[start:stop]
            chunk_bound = bound[start:stop]
            fresh = ok & (chunk_cert < 0)
            better = ok & (chunk_cert >= 0) & (gap > chunk_bound)
            take = fresh | better
            chunk_cert[take] = i
            chunk_bound[take] = gap[take]
    shape = (resolution,) * sys.dim
    certifier = certifier.reshape(shape)
    return CubicalComplex(grid, certifier >= 0, certifier, bound.reshape(shape))


def neighborhood_filtration(sys: VectorFieldSystem, params: AnalysisParams) -> list[CubicalComplex]:
    """Certified complexes at every configured resolution, coarse to fine."""
    return [build_sigma_complex(sys, params, r) for r in params.resolutions]


@dataclass
class ImageSample:
    """Sampled values of f over the box, rasterized near 0 in R^n.

    The image grid has ``cells`` cells per axis on [-rho_img, rho_img]^n.
    Only cells lying entirely inside the closed ball of radius rho_img are
    tested for coverage.
    """

    values: np.ndarray
    rho_img: float
    cells: int
    covered: np.ndarray
    in_ball: np.ndarray

    @property
    def holes(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in np.argwhere(self.in_ball & ~self.covered)]

    def cell_bounds(self, cell) -> list[tuple[float, float]]:
        w = 2 * self.rho_img / self.cells
        return [(-self.rho_img + c * w, -self.rho_img + (c + 1) * w) for c in cell]

    def axis_holes(self) -> dict[int, list[tuple[int, ...]]]:
        """Uncovered cells touching a coordinate axis, away from the origin."""
        half = self.cells // 2
        near = {half - 1, half}
        out = {}
        for axis in range(self.values.shape[1]):
            hits = [c for c in self.holes
                    if all(c[a] in near for a in range(len(c)) if a != axis) and c[axis] not in near]
            if hits:
                out[axis] = hits
        return out


def default_image_radius(values: np.ndarray, quantile: float = 0.25) -> float:
    norms = np.linalg.norm(values, axis=1)
    return float(np.quantile(norms, quantile))


def sample_image(sys: VectorFieldSystem, params: AnalysisParams, resolution: int,
                 samples_per_cube: int | None = None, rho_img: float | None = None) -> ImageSample:
    """Evaluate f on a scrambled-Halton pattern repeated in every grid cube."""
    spc = params.samples_per_cube if samples_per_cube is None else samples_per_cube
    if spc < 1:
        raise ValueError("samples_per_cube must be at least 1")
    grid = Grid(sys.dim, resolution, params.epsilon)
    pattern = qmc.Halton(d=sys.dim, scramble=True, seed=params.seed).random(spc)
    coords = grid.coords()
    h = grid.width
    total = resolution ** sys.dim
    chunks = []
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        corners = coords[_all_indices(resolution, sys.dim, start, stop)]
        pts = (corners[:, None, :] + h * pattern[None, :, :]).reshape(-1, sys.dim)
        chunks.append(sys(pts))
    values = np.concatenate(chunks, axis=0)
    if rho_img is None:
        rho_img = default_image_radius(values)
    return rasterize(values, rho_img, params.image_cells)


def rasterize(values: np.ndarray, rho_img: float, cells: int) -> ImageSample:
    n = values.shape[1]
    if not rho_img > 0:
        raise ValueError("image radius must be positive")
    w = 2 * rho_img / cells
    scaled = (values + rho_img) / w
    inside = np.all((scaled >= 0) & (scaled < cells), axis=1)
    idx = np.floor(scaled[inside]).astype(np.int64)
    covered = np.zeros((cells,) * n, dtype=bool)
    covered[tuple(idx.T)] = True
    # a cell is in the ball when its farthest corner is
    centers = -rho_img + (np.arange(cells) + 0.5) * w
    far = np.abs(centers) + w / 2
    sq = np.zeros((cells,) * n)
    for a in range(n):
        shape = [1] * n
        shape[a] = cells
        sq = sq + (far ** 2).reshape(shape)
    in_ball = sq <= rho_img ** 2 * (1 + 1e-12)
    return ImageSample(values, float(rho_img), cells, covered, in_ball)
