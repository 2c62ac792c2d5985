"""Discrete measures, canonical generators, and growth-constant scans."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

MAX_CORNER_GENERATION = 8


@dataclass
class DiscreteMeasure:
    """Finite atomic measure: support points with non-negative masses.

    Instances are immutable (the arrays are marked read-only); the minimum
    pairwise separation is computed on construction and cached.  A measure
    with a single atom reports min_separation = inf.
    """

    points: np.ndarray
    masses: np.ndarray
    total_mass: float = field(init=False)
    min_separation: float = field(init=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.masses, dtype=float).ravel()
        if len(pts) != len(w):
            raise ValueError(f"{len(pts)} points but {len(w)} masses")
        if len(pts) == 0:
            raise ValueError("a measure needs at least one support point")
        if np.any(w < 0.0):
            raise ValueError("masses must be non-negative")
        pts.flags.writeable = False
        w.flags.writeable = False
        self.points = pts
        self.masses = w
        self.total_mass = float(np.sum(w))
        if len(pts) == 1:
            self.min_separation = np.inf
        else:
            d, _ = cKDTree(pts).query(pts, k=2)
            self.min_separation = float(np.min(d[:, 1]))
            if self.min_separation == 0.0:
                raise ValueError("support points must be pairwise distinct")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def diameter(self) -> float:
        pts = self.points
        if len(pts) == 1:
            return 0.0
        if len(pts) <= 4000 or pts.shape[1] > 3:
            return float(np.max(pdist(pts)))
        try:
            from scipy.spatial import ConvexHull

            hull = pts[ConvexHull(pts).vertices]
            return float(np.max(pdist(hull)))
        except Exception:
            return float(np.max(pdist(pts)))

    def bounding_box(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def scaled(self, lam: float) -> "DiscreteMeasure":
        """Spatially scaled copy (masses unchanged)."""
        return DiscreteMeasure(self.points * lam, self.masses.copy())

    def with_masses(self, masses) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points.copy(), masses)

    def to_json(self) -> str:
        doc = {
            "dim": self.dim,
            "points": [list(map(float, p)) for p in self.points],
            "masses": [float(v) for v in self.masses],
        }
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str) -> "DiscreteMeasure":
        doc = json.loads(text)
        pts = np.asarray(doc["points"], dtype=float)
        if pts.shape[1] != doc["dim"]:
            raise ValueError("dim field does not match point width")
        return DiscreteMeasure(pts, np.asarray(doc["masses"], dtype=float))


@dataclass
class ScaleRatio:
    scale: float
    max_ratio: float
    witness_corner: np.ndarray


@dataclass
class GrowthReport:
    """mu(Q)/l(Q)^alpha maxima over a half-shifted dyadic cube scan."""

    alpha: float
    per_scale: list[ScaleRatio]
    overall: float


def cantor_corner_quarter(g: int) -> DiscreteMeasure:
    """Planar corner-quarter Cantor measure at generation g.

    4^g atoms at the centers of the generation-g corner squares (side 4^-g)
    of the unit square, each of mass 4^-g; total mass 1.
    """
    if g < 0:
        raise ValueError("generation must be >= 0")
    if g > MAX_CORNER_GENERATION:
        raise ValueError(f"generation {g} exceeds the 4^{MAX_CORNER_GENERATION}-point limit")
    corners = np.zeros((1, 2))
    side = 1.0
    for _ in range(g):
        child = side / 4.0
        off = side - child
        shifts = np.array([[0.0, 0.0], [off, 0.0], [0.0, off], [off, off]])
        corners = (corners[:, None, :] + shifts[None, :, :]).reshape(-1, 2)
        side = child
    centers = corners + side / 2.0
    masses = np.full(len(centers), 4.0 ** (-g))
    return DiscreteMeasure(centers, masses)


def cantor_linear(alpha: float, g: int, dim: int = 2) -> DiscreteMeasure:
    """Two-piece Cantor measure on the x1-axis with contraction 2^(-1/alpha).

    The ratio makes the limit set alpha-dimensional.  Generation-g interval
    centers are embedded in R^dim with the remaining coordinates zero; each
    atom carries mass 2^-g.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if g < 0:
        raise ValueError("generation must be >= 0")
    r = 2.0 ** (-1.0 / alpha)
    lefts = np.zeros(1)
    length = 1.0
    for _ in range(g):
        child = length * r
        lefts = np.concatenate([lefts, lefts + (length - child)])
        lefts = np.sort(lefts)
        length = child
    pts = np.zeros((len(lefts), dim))
    pts[:, 0] = lefts + length / 2.0
    return DiscreteMeasure(pts, np.full(len(lefts), 2.0 ** (-g)))


def product_with_interval(base: DiscreteMeasure, m: int, half_len: float) -> DiscreteMeasure:
    """Lift a planar measure to R^3 by a uniform symmetric vertical stack.

    Each base atom becomes a stack of points over [-half_len, half_len] at
    roughly m points per unit length (forced even so the stack is symmetric
    about 0 with no point on the midplane); the stack carries the base mass
    times 2*half_len, split evenly.
    """
    if base.dim != 2:
        raise ValueError("base measure must be planar")
    if m < 2:
        raise ValueError("need at least 2 points per unit length")
    if half_len <= 0:
        raise ValueError("half_len must be positive")
    count = int(round(2.0 * half_len * m))
    count = max(2, count + (count % 2))
    step = 2.0 * half_len / count
    # build the top half and mirror it so the stack is exactly symmetric
    top = (np.arange(count // 2) + 0.5) * step
    heights = np.concatenate([-top[::-1], top])
    pts = np.empty((len(base) * count, 3))
    w = np.empty(len(base) * count)
    for k, (p, mass) in enumerate(zip(base.points, base.masses)):
        sl = slice(k * count, (k + 1) * count)
        pts[sl, 0] = p[0]
        pts[sl, 1] = p[1]
        pts[sl, 2] = heights
        w[sl] = mass * 2.0 * half_len / count
    return DiscreteMeasure(pts, w)


def _validate_spacing(h: float, size: float):
    if h <= 0:
        raise ValueError("spacing must be positive")
    if h >= size * 1.0000001 and size > 0:
        raise ValueError(f"spacing {h} too coarse for size {size}")


def grid_on_disk(radius: float, h: float, density=None) -> DiscreteMeasure:
    """Axis lattice of spacing h clipped to the closed disk; masses default 0."""
    _validate_spacing(h, 2 * radius)
    k = int(np.floor(radius / h))
    ax = np.arange(-k, k + 1) * h
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= radius + 1e-12 * radius]
    if len(pts) == 0:
        raise ValueError("empty grid: spacing too coarse")
    return DiscreteMeasure(pts, _grid_masses(pts, density))


def grid_on_segment(length: float, h: float, density=None) -> DiscreteMeasure:
    """Nodes 0, h, 2h, ... along the x1-axis segment [0, length] in R^2."""
    _validate_spacing(h, length)
    t = np.arange(int(np.floor(length / h + 1e-9)) + 1) * h
    pts = np.column_stack([t, np.zeros_like(t)])
    return DiscreteMeasure(pts, _grid_masses(pts, density))


def grid_on_square_boundary(side: float, h: float, density=None) -> DiscreteMeasure:
    """Equally spaced nodes around the boundary of [0, side]^2, corners once."""
    _validate_spacing(h, side)
    ne = max(1, int(round(side / h)))
    t = np.arange(ne) * (side / ne)
    zero = np.zeros_like(t)
    full = np.full_like(t, side)
    pts = np.concatenate([
        np.column_stack([t, zero]),
        np.column_stack([full, t]),
        np.column_stack([side - t, full]),
        np.column_stack([zero, side - t]),
    ])
    return DiscreteMeasure(pts, _grid_masses(pts, density))


def _grid_masses(pts, density):
    if density is None:
        return np.zeros(len(pts))
    if callable(density):
        return np.array([float(density(p)) for p in pts])
    return np.full(len(pts), float(density))


def growth_constant(mu: DiscreteMeasure, alpha: float, s_min: float) -> GrowthReport:
    """Scan max mu(Q)/l(Q)^alpha over axis cubes on a half-shifted lattice.

    Scales descend dyadically from the diameter down to s_min; per scale the
    cube lattice is tried at offsets {0, s/2} along every axis.  The result
    lower-bounds the true supremum over all cubes and is within a bounded
    factor of it for features at scale >= s_min.
    """
    if s_min <= 0:
        raise ValueError("s_min must be positive")
    diam = mu.diameter()
    scales = []
    s = diam
    while s >= s_min * (1.0 - 1e-12):
        scales.append(s)
        s /= 2.0
    if not scales:
        scales = [s_min]
    lo, _ = mu.bounding_box()
    n = mu.dim
    per_scale = []
    overall = -np.inf
    best = None
    for s in scales:
        best_mass = -np.inf
        best_corner = None
        for off in itertools.product((0.0, 0.5), repeat=n):
            anchor = lo - np.asarray(off) * s
            idx = np.floor((mu.points - anchor) / s).astype(np.int64)
            _, inv = np.unique(idx, axis=0, return_inverse=True)
            sums = np.bincount(inv, weights=mu.masses)
            k = int(np.argmax(sums))
            if sums[k] > best_mass:
                best_mass = float(sums[k])
                which = np.flatnonzero(inv == k)[0]
                best_corner = anchor + idx[which] * s
        ratio = best_mass / s**alpha
        per_scale.append(ScaleRatio(scale=s, max_ratio=ratio, witness_corner=best_corner))
        overall = max(overall, ratio)
    return GrowthReport(alpha=alpha, per_scale=per_scale, overall=float(overall))
