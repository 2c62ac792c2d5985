"""Truncated Riesz transforms of discrete measures and their L2 energies.

The headline identity: for an atomic measure and a truncation radius below
the minimum atom separation, the component energy decomposes exactly as

    sum_x m(x) |R^i_eps(mu)(x)|^2  =  (1/3) * (permutation energy) + diagonal,

where the permutation energy is six times the sum of p_{alpha,i} over
unordered atom triples and the diagonal collects the y = z terms of the
expanded square.  Everything here is pure; the O(N^3) triple sum is
materialized in lexicographic order and reduced deterministically, so
results are bit-stable across thread counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from .kernels import KernelSpec, kernel_factor, scalar_values, stable_norm, vector_values
from .measures import DiscreteMeasure, growth_constant
from .symmetrization import perm_sum_alpha

_MAX_TRIPLES = 40_000_000


def truncated_transform(mu: DiscreteMeasure, spec: KernelSpec, eps: float, x):
    """Sum of k(x - y) * mass(y) over support points with |y - x| > eps.

    x may be a single point or an (M, n) batch.  eps = 0 is allowed and
    excludes only exact atom hits.  An empty sum is 0 (scalar) or the zero
    vector.
    """
    if eps < 0:
        raise ValueError("truncation radius must be non-negative")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    diffs = pts[:, None, :] - mu.points[None, :, :]
    dist = stable_norm(diffs)
    keep = dist > eps
    if spec.is_vector:
        vals = np.where(keep[..., None], vector_values(diffs, spec.alpha), 0.0)
        out = np.einsum("xyn,y->xn", vals, mu.masses)
        return out[0] if single else out
    vals = np.where(keep, scalar_values(diffs, spec.alpha, spec.component), 0.0)
    out = vals @ mu.masses
    return float(out[0]) if single else out


@dataclass
class EnergyReport:
    """L2 transform energy and its exact triple-sum decomposition."""

    l2_energy: float
    perm_energy: float
    diagonal: float
    residual: float
    eps: float
    component: int
    alpha: float

    def to_json_dict(self):
        return asdict(self)


def _triple_slab(out, offset, c, pts, masses, dist, eps, alpha, i):
    """Contributions of all unordered triples with smallest index c, written
    into out[offset:] in lexicographic (j, k) order."""
    n_rest = len(pts) - c - 1
    if n_rest < 2:
        return
    jj, kk = np.triu_indices(n_rest, k=1)
    jj = jj + c + 1
    kk = kk + c + 1
    p = perm_sum_alpha(alpha, i, pts[c], pts[jj], pts[kk], validate=False)
    sep = (dist[c, jj] > eps) & (dist[c, kk] > eps) & (dist[jj, kk] > eps)
    contrib = (6.0 * p) * ((masses[c] * masses[jj]) * masses[kk])
    out[offset:offset + len(jj)] = np.where(sep, contrib, 0.0)


def energy_identity(mu: DiscreteMeasure, i: int, alpha: float, eps: float,
                    threads: int = 1) -> EnergyReport:
    """Component-i transform energy, permutation energy, and diagonal term.

    perm_energy is 6x the sum over unordered triples whose three pairwise
    distances all exceed eps; when eps < min_separation nothing is excluded
    beyond coincident indices and l2 = perm/3 + diagonal holds exactly.
    """
    if eps <= 0:
        raise ValueError("truncation radius must be positive")
    N = len(mu)
    pts = mu.points
    masses = mu.masses
    diffs = pts[:, None, :] - pts[None, :, :]
    dist = stable_norm(diffs)
    keep = dist > eps

    kvals = np.where(keep, scalar_values(diffs, alpha, i), 0.0)
    rvals = kvals @ masses
    l2 = float(masses @ (rvals * rvals))
    diagonal = float(masses @ (kvals * kvals) @ (masses * masses))

    n_triples = N * (N - 1) * (N - 2) // 6
    if n_triples > _MAX_TRIPLES:
        raise ValueError(f"{N} atoms need {n_triples} triples; above the desk-scale limit")
    contrib = np.zeros(n_triples)
    offsets = []
    off = 0
    for c in range(N - 2):
        offsets.append(off)
        off += (N - c - 1) * (N - c - 2) // 2
    if threads > 1 and N > 16:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_triple_slab, contrib, offsets[c], c, pts, masses, dist, eps, alpha, i)
                for c in range(N - 2)
            ]
            for f in futures:
                f.result()
    else:
        for c in range(N - 2):
            _triple_slab(contrib, offsets[c], c, pts, masses, dist, eps, alpha, i)
    perm = float(np.sum(contrib))

    residual = l2 - perm / 3.0 - diagonal
    return EnergyReport(l2_energy=l2, perm_energy=perm, diagonal=diagonal,
                        residual=residual, eps=eps, component=i, alpha=alpha)


def vector_energy(mu: DiscreteMeasure, alpha: float, eps: float) -> float:
    """sum_x m(x) |R_eps(mu)(x)|^2 for the full vector kernel."""
    if eps <= 0:
        raise ValueError("truncation radius must be positive")
    diffs = mu.points[:, None, :] - mu.points[None, :, :]
    dist = stable_norm(diffs)
    keep = dist > eps
    vals = np.where(keep[..., None], vector_values(diffs, alpha), 0.0)
    r = np.einsum("xyn,y->xn", vals, mu.masses)
    sq = r[:, 0] * r[:, 0]
    for d in range(1, r.shape[1]):
        sq = sq + r[:, d] * r[:, d]
    return float(mu.masses @ sq)


# quintic smoothstep profile: C^2, value 1 at t=0 falling to 0 at t=1
def _smoothstep(t):
    return 1.0 - t * t * t * (6.0 * t * t - 15.0 * t + 10.0)


def _smoothstep_d1(t):
    return -30.0 * t * t * (t - 1.0) * (t - 1.0)


def _smoothstep_d2(t):
    return -60.0 * t * (2.0 * t - 1.0) * (t - 1.0)


class PlateauBump:
    """Tensor-product C^2 bump: 1 on the concentric half cube, 0 outside.

    Per axis the profile is 1 for |u - c| <= w/2, the quintic smoothstep on
    w/2 <= |u - c| <= w, and 0 beyond, where w = halfwidth.  Derivative
    bounds: |q'| <= 3.75/w and |q''| <= 23.1/w^2 per axis.
    """

    def __init__(self, center, halfwidth: float):
        self.center = np.asarray(center, dtype=float)
        if halfwidth <= 0:
            raise ValueError("halfwidth must be positive")
        self.halfwidth = float(halfwidth)

    @property
    def dim(self) -> int:
        return len(self.center)

    def _profile(self, u, axis, order):
        w = self.halfwidth
        s = np.abs(np.asarray(u, dtype=float) - self.center[axis])
        t = np.clip((s - w / 2.0) / (w / 2.0), 0.0, 1.0)
        if order == 0:
            return _smoothstep(t)
        inside = (s > w / 2.0) & (s < w)
        sign = np.sign(np.asarray(u) - self.center[axis])
        if order == 1:
            return np.where(inside, _smoothstep_d1(t) * sign * (2.0 / w), 0.0)
        return np.where(inside, _smoothstep_d2(t) * (2.0 / w) ** 2, 0.0)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = self._profile(x[..., 0], 0, 0)
        for d in range(1, self.dim):
            out = out * self._profile(x[..., d], d, 0)
        return out

    def d1(self, x):
        """First partial in coordinate 1."""
        x = np.asarray(x, dtype=float)
        out = self._profile(x[..., 0], 0, 1)
        for d in range(1, self.dim):
            out = out * self._profile(x[..., d], d, 0)
        return out

    def laplacian(self, x):
        x = np.asarray(x, dtype=float)
        profiles = [self._profile(x[..., d], d, 0) for d in range(self.dim)]
        second = [self._profile(x[..., d], d, 2) for d in range(self.dim)]
        out = None
        for d in range(self.dim):
            term = second[d]
            for e in range(self.dim):
                if e != d:
                    term = term * profiles[e]
            out = term if out is None else out + term
        return out


def recover_pairing(potential, phi: PlateauBump, support_radius: float,
                    step: float | None = None, t_step: float | None = None,
                    T: float | None = None) -> float:
    """Recover <mu, phi> from the first-component potential f = k^1 * mu.

    Uses (1/2pi) * integral over the half line {(t, 0): t <= 0} of the
    Laplacian of (phi-bar convolved with f), with the 2-D convolution done
    by separable midpoint quadrature (k^1 = 2pi * d/dx1 of the logarithmic
    fundamental solution fixes the constant).  `potential` must map an
    (M, 2) array of points to M values; phi is a plane PlateauBump;
    support_radius bounds the measure's support around the origin.
    """
    if phi.dim != 2:
        raise ValueError("recovery is implemented in the plane")
    if support_radius <= 0:
        raise ValueError("support_radius must be positive")
    if T is None:
        T = 10.0 * (2.0 * support_radius) + 2.0 * phi.halfwidth
    reach = support_radius + float(np.max(np.abs(phi.center))) + phi.halfwidth
    if T <= reach:
        raise ValueError(f"half-line cutoff T={T} does not clear the support (needs > {reach})")
    if step is None:
        step = phi.halfwidth / 160.0
    if t_step is None:
        t_step = phi.halfwidth / 80.0
    if step <= 0 or t_step <= 0:
        raise ValueError("quadrature steps must be positive")

    c1, c2 = phi.center
    w = phi.halfwidth
    # u-grid covering every shifted copy of the bump along the half line
    u1_lo, u1_hi = -T + c1 - w, c1 + w
    n1 = int(math.ceil((u1_hi - u1_lo) / step))
    u1 = u1_lo + (np.arange(n1) + 0.5) * step
    n2 = int(math.ceil(2.0 * w / step))
    u2 = (c2 - w) + (np.arange(n2) + 0.5) * step

    U1, U2 = np.meshgrid(u1, u2, indexing="ij")
    f = np.asarray(potential(np.column_stack([U1.ravel(), U2.ravel()]))).reshape(n1, n2)
    q2 = phi._profile(u2, 1, 0)
    q2dd = phi._profile(u2, 1, 2)
    F1 = (f @ q2) * step          # integral over u2 of q2(u2) f(u1, u2)
    F2 = (f @ q2dd) * step

    nt = int(math.ceil(T / t_step))
    t = -T + (np.arange(nt) + 0.5) * (T / nt)
    # g(t) = integral over u1 of q1''(u1 - t) F1 + q1(u1 - t) F2
    shift = u1[None, :] - t[:, None]
    g = (phi._profile(shift, 0, 2) @ F1 + phi._profile(shift, 0, 0) @ F2) * step
    integral = float(np.sum(g) * (T / nt))
    return integral / (2.0 * math.pi)


@dataclass
class LocalizationProbe:
    lhs: float
    potential_sup: float
    growth: float
    ratio: float

    def to_json_dict(self):
        return asdict(self)


def localization_probe(mu: DiscreteMeasure, i: int, cube_center, cube_side: float,
                       grid_step: float | None = None) -> LocalizationProbe:
    """Numerical probe of the cut-off inequality for scalar potentials.

    Builds the C^2 plateau bump on the cube (1 on the concentric half cube),
    reweights mu by it, and compares sup |k^i * (phi_Q mu)| on an evaluation
    grid against sup |k^i * mu| plus the linear-growth constant of mu.  The
    grid excludes a ball of radius min_separation/4 around every atom;
    atomic potentials are unbounded at the atoms themselves, so the sup is
    read off the grid as the discretization convention.
    """
    if cube_side <= 0:
        raise ValueError("degenerate cube")
    if mu.dim != 2:
        raise ValueError("localization probe is implemented in the plane")
    center = np.asarray(cube_center, dtype=float)
    bump = PlateauBump(center, cube_side / 2.0)
    cut = mu.with_masses(mu.masses * bump.value(mu.points))

    if grid_step is None:
        grid_step = cube_side / 32.0
    lo, hi = mu.bounding_box()
    lo = np.minimum(lo, center - cube_side)
    hi = np.maximum(hi, center + cube_side)
    pad = 0.25 * max(float(np.max(hi - lo)), cube_side)
    ax = [np.arange(lo[d] - pad, hi[d] + pad + grid_step, grid_step) for d in range(2)]
    X, Y = np.meshgrid(ax[0], ax[1], indexing="ij")
    grid = np.column_stack([X.ravel(), Y.ravel()])
    delta = mu.min_separation / 4.0
    if not np.isfinite(delta):
        delta = cube_side / 8.0
    from scipy.spatial import cKDTree

    d, _ = cKDTree(mu.points).query(grid)
    grid = grid[d > delta]

    spec = KernelSpec(dim=2, alpha=1.0, component=i)
    if cut.total_mass > 0:
        lhs = float(np.max(np.abs(truncated_transform(cut, spec, 0.0, grid))))
    else:
        lhs = 0.0
    potential_sup = float(np.max(np.abs(truncated_transform(mu, spec, 0.0, grid))))
    s_min = mu.min_separation if np.isfinite(mu.min_separation) else cube_side
    growth = growth_constant(mu, 1.0, s_min).overall
    return LocalizationProbe(lhs=lhs, potential_sup=potential_sup, growth=growth,
                             ratio=lhs / (potential_sup + growth))


def r3_flatness(nu: DiscreteMeasure, eps: float, samples=None) -> float:
    """Max |third-component transform| of a vertically symmetric 3-D measure.

    Truncation is per coordinate: a support atom contributes only when its
    planar distance from the sample exceeds eps and |y3 - x3| exceeds eps,
    mirroring the iterated evaluation that makes the flatness exact for
    infinite stacks.  Samples default to the support points nearest the
    midplane (the "interior" heights); for a single symmetric stack sampled
    at its midpoint the cancellation is exact.
    """
    if nu.dim != 3:
        raise ValueError("flatness check needs a 3-D measure")
    _require_vertical_symmetry(nu)
    if samples is None:
        h = np.abs(nu.points[:, 2])
        samples = nu.points[h <= h.min() * (1 + 1e-12)]
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    worst = 0.0
    for x in samples:
        dp = nu.points[:, :2] - x[:2]
        rho = stable_norm(dp)
        dz = x[2] - nu.points[:, 2]
        keep = (rho > eps) & (np.abs(dz) > eps)
        full = stable_norm(nu.points - x)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = (dz / full) * kernel_factor(full, 2.0)
        total = float(np.sum(np.where(keep, vals * nu.masses, 0.0)))
        worst = max(worst, abs(total))
    return worst


def _require_vertical_symmetry(nu: DiscreteMeasure):
    order = np.lexsort((nu.points[:, 2], nu.points[:, 1], nu.points[:, 0]))
    pts = nu.points[order]
    w = nu.masses[order]
    mirrored = pts.copy()
    mirrored[:, 2] = -mirrored[:, 2]
    order2 = np.lexsort((mirrored[:, 2], mirrored[:, 1], mirrored[:, 0]))
    if not (np.array_equal(mirrored[order2], pts) and np.allclose(w[order2], w)):
        raise ValueError("measure is not symmetric in x3 about 0")
