"""LP estimators for positive capacities under sup-norm potential bounds.

The estimator puts non-negative masses on a fixed support geometry and
maximizes total mass subject to |scalar potential| <= bound at every
constraint point (for each requested kernel component) and, optionally,
growth caps mass(Q) <= l(Q)^alpha over a half-shifted dyadic cube family.

Problems are solved by HiGHS through scipy with an outer
constraint-generation loop: solve on a working subset of potential rows,
re-evaluate the potential at every constraint point from scratch, add the
worst violated points, repeat until the full row set is satisfied.  The
final solution is therefore feasible for the whole problem and its
feasibility certificate is an independent kernel evaluation, not a solver
residual.

Only positive-measure capacities are discretized here; the distributional
suprema they stand in for are comparable to these for the kernels at hand,
which is exactly what the experiment commands probe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from .kernels import kernel_factor, stable_norm
from .measures import (
    DiscreteMeasure,
    cantor_corner_quarter,
    cantor_linear,
    grid_on_disk,
    grid_on_segment,
    grid_on_square_boundary,
)

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass
class GrowthCube:
    corner: np.ndarray
    side: float
    cap: float


@dataclass
class CapacityProblem:
    """Support nodes (masses are the LP variables), constraint cloud, and rows."""

    support_points: np.ndarray
    constraint_points: np.ndarray
    components: tuple[int, ...]
    alpha: float
    bound: float = 1.0
    delta: float = 0.0
    growth_cubes: list[GrowthCube] | None = None

    def __post_init__(self):
        self.support_points = np.atleast_2d(np.asarray(self.support_points, dtype=float))
        self.constraint_points = np.atleast_2d(np.asarray(self.constraint_points, dtype=float))
        if len(self.constraint_points) == 0:
            raise ValueError("empty constraint set")
        if not self.components:
            raise ValueError("need at least one kernel component")
        n = self.support_points.shape[1]
        for j in self.components:
            if not 1 <= j <= n:
                raise ValueError(f"component {j} outside 1..{n}")

    @property
    def dim(self) -> int:
        return self.support_points.shape[1]

    def scaled(self, lam: float) -> "CapacityProblem":
        """Same problem with all geometry scaled by lam (growth caps rescale)."""
        cubes = None
        if self.growth_cubes is not None:
            cubes = [GrowthCube(corner=c.corner * lam, side=c.side * lam,
                                cap=(c.side * lam) ** self.alpha)
                     for c in self.growth_cubes]
        return CapacityProblem(
            support_points=self.support_points * lam,
            constraint_points=self.constraint_points * lam,
            components=self.components,
            alpha=self.alpha,
            bound=self.bound,
            delta=self.delta * lam,
            growth_cubes=cubes,
        )

    def to_json_dict(self) -> dict:
        return {
            "support_points": self.support_points.tolist(),
            "constraint_points": self.constraint_points.tolist(),
            "components": list(self.components),
            "alpha": self.alpha,
            "bound": self.bound,
            "delta": self.delta,
            "growth_cubes": None if self.growth_cubes is None else [
                {"corner": c.corner.tolist(), "side": c.side, "cap": c.cap}
                for c in self.growth_cubes],
        }


@dataclass
class CapacitySolution:
    value: float
    masses: np.ndarray
    active_constraints: list
    solver_status: str
    duality_gap: float
    max_violation: float = field(default=np.nan)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "masses": self.masses.tolist(),
            "active_constraints": self.active_constraints,
            "solver_status": self.solver_status,
            "duality_gap": self.duality_gap,
            "max_violation": self.max_violation,
        }


def _growth_cube_family(points, alpha):
    """Half-shifted dyadic cubes covering the points, from the diameter down
    to the minimum separation, with caps l(Q)^alpha (growth constant 1)."""
    mu = DiscreteMeasure(points, np.ones(len(points)))
    diam = mu.diameter()
    msep = mu.min_separation
    if not np.isfinite(msep):
        msep = diam if diam > 0 else 1.0
    scales = []
    s = diam if diam > 0 else msep
    while s >= msep * (1.0 - 1e-12):
        scales.append(s)
        s /= 2.0
    if not scales:
        scales = [msep]
    lo = points.min(axis=0)
    n = points.shape[1]
    cubes = []
    seen = set()
    for s in scales:
        for off in itertools.product((0.0, 0.5), repeat=n):
            anchor = lo - np.asarray(off) * s
            idx = np.floor((points - anchor) / s).astype(np.int64)
            for row in np.unique(idx, axis=0):
                corner = anchor + row * s
                key = (round(s, 15),) + tuple(np.round(corner, 12))
                if key in seen:
                    continue
                seen.add(key)
                cubes.append(GrowthCube(corner=corner, side=s, cap=s**alpha))
    return cubes


def _cube_mask(points, cube: GrowthCube):
    inside = np.ones(len(points), dtype=bool)
    for d in range(points.shape[1]):
        inside &= (points[:, d] >= cube.corner[d]) & (points[:, d] < cube.corner[d] + cube.side)
    return inside


def build_problem(support, components, alpha=1.0, box_inflate=0.25,
                  constraint_h=0.05, delta=None, with_growth=False,
                  bound=1.0) -> CapacityProblem:
    """Assemble the LP data for a support geometry.

    The constraint cloud is an axis lattice of spacing constraint_h over the
    support bounding box inflated by the margin box_inflate (snapped to a
    lattice multiple, phase-shifted by half a cell so its nodes interleave
    grid-like supports), minus the delta-neighborhood of the support.  delta
    defaults to constraint_h/2; atoms have unbounded potentials, so the
    exclusion radius is the discrete stand-in for "bounded a.e.".
    """
    pts = support.points if isinstance(support, DiscreteMeasure) \
        else np.atleast_2d(np.asarray(support, dtype=float))
    if constraint_h <= 0 or box_inflate <= 0:
        raise ValueError("constraint_h and box_inflate must be positive")
    if delta is None:
        delta = constraint_h / 2.0
    if delta <= 0:
        raise ValueError("delta must be positive")
    margin = np.ceil(box_inflate / constraint_h) * constraint_h
    lo = pts.min(axis=0) - margin + constraint_h / 2.0
    hi = pts.max(axis=0) + margin
    axes = []
    total = 1
    for d in range(pts.shape[1]):
        count = int(np.floor((hi[d] - lo[d]) / constraint_h)) + 1
        total *= count
        axes.append(lo[d] + np.arange(count) * constraint_h)
    if total > 4_000_000:
        raise ValueError(f"constraint lattice would need {total} candidate points; "
                         "coarsen constraint_h or shrink box_inflate")
    mesh = np.meshgrid(*axes, indexing="ij")
    cpts = np.column_stack([m.ravel() for m in mesh])
    dist, _ = cKDTree(pts).query(cpts)
    cpts = cpts[dist >= delta]
    if len(cpts) == 0:
        raise ValueError("no constraint points survive the delta exclusion")
    cubes = _growth_cube_family(pts, alpha) if with_growth else None
    return CapacityProblem(
        support_points=pts,
        constraint_points=cpts,
        components=tuple(components),
        alpha=alpha,
        bound=bound,
        delta=float(delta),
        growth_cubes=cubes,
    )


def _component_potentials(problem: CapacityProblem, masses, chunk=4096):
    """Potential of candidate masses at every constraint point, one row per
    component, evaluated directly from the kernel: shape (n_comp, n_points)."""
    cpts = problem.constraint_points
    spts = problem.support_points
    out = np.empty((len(problem.components), len(cpts)))
    for start in range(0, len(cpts), chunk):
        blk = cpts[start:start + chunk]
        diffs = blk[:, None, :] - spts[None, :, :]
        r = stable_norm(diffs)
        scale = kernel_factor(r, problem.alpha)
        for ci, j in enumerate(problem.components):
            out[ci, start:start + len(blk)] = ((diffs[:, :, j - 1] / r) * scale) @ masses
    return out


def _kernel_block(problem: CapacityProblem, point_idx, chunk=4096):
    """Kernel coefficient rows for the given constraint points, stacked
    component-major: for each component j (in order) one row per point."""
    cpts = problem.constraint_points[point_idx]
    spts = problem.support_points
    ncomp = len(problem.components)
    K = np.empty((ncomp * len(cpts), len(spts)))
    for start in range(0, len(cpts), chunk):
        blk = cpts[start:start + chunk]
        diffs = blk[:, None, :] - spts[None, :, :]
        r = stable_norm(diffs)
        scale = kernel_factor(r, problem.alpha)
        for ci, j in enumerate(problem.components):
            base = ci * len(cpts) + start
            K[base:base + len(blk)] = (diffs[:, :, j - 1] / r) * scale
    return K


def _growth_matrix(problem: CapacityProblem):
    if not problem.growth_cubes:
        return np.zeros((0, len(problem.support_points))), np.zeros(0)
    G = np.stack([_cube_mask(problem.support_points, c).astype(float)
                  for c in problem.growth_cubes])
    caps = np.array([c.cap for c in problem.growth_cubes])
    return G, caps


def verify_feasibility(problem: CapacityProblem, masses):
    """Worst constraint violation of the masses, recomputed from scratch.

    Returns (max potential excess over bound, max growth-row excess); both
    negative for strictly feasible solutions.
    """
    pot = _component_potentials(problem, masses)
    pv = float((np.abs(pot).max(axis=0) - problem.bound).max())
    G, caps = _growth_matrix(problem)
    gv = float((G @ masses - caps).max()) if len(caps) else -np.inf
    return pv, gv


def single_row_envelope(problem: CapacityProblem) -> float:
    """Sum over support points of the tightest one-variable row cap.

    Each mass alone must satisfy |k| m <= bound against its most restrictive
    row, so this sum is a cheap sanity ceiling for the optimum of
    well-conditioned problems.
    """
    best = np.zeros(len(problem.support_points))
    chunk = 4096
    for start in range(0, len(problem.constraint_points), chunk):
        blk = problem.constraint_points[start:start + chunk]
        diffs = blk[:, None, :] - problem.support_points[None, :, :]
        r = stable_norm(diffs)
        scale = kernel_factor(r, problem.alpha)
        for j in problem.components:
            best = np.maximum(best, np.abs((diffs[:, :, j - 1] / r) * scale).max(axis=0))
    return float(np.sum(problem.bound / best))


def solve(problem: CapacityProblem, tol: float = 1e-9, max_rounds: int = 60,
          add_per_round: int = 1200) -> CapacitySolution:
    """Maximize total mass subject to the potential and growth rows.

    The LP is feasible (zero masses) and bounded whenever the constraint
    cloud surrounds the support; an unbounded working set is densified and
    retried.  The returned masses satisfy every row of the full problem
    within tol.
    """
    C = len(problem.constraint_points)
    S = len(problem.support_points)
    G, caps = _growth_matrix(problem)
    stride = max(1, C // 800)
    active = np.zeros(C, dtype=bool)
    active[::stride] = True
    res = None
    b_ub = None
    masses = np.zeros(S)
    status = "iteration_limit"
    for _ in range(max_rounds):
        idx = np.flatnonzero(active)
        K = _kernel_block(problem, idx)
        A_ub = np.vstack([K, -K, G])
        b_ub = np.concatenate([np.full(2 * K.shape[0], problem.bound), caps])
        res = linprog(-np.ones(S), A_ub=A_ub, b_ub=b_ub, bounds=(0, None),
                      method="highs", options=_HIGHS_OPTIONS)
        if res.status == 3:
            # working set too sparse to bound the objective: densify, retry
            stride = max(1, stride // 2)
            grown = active.copy()
            grown[::stride] = True
            if grown.sum() == active.sum():
                raise RuntimeError("capacity LP unbounded even with the full row set")
            active = grown
            continue
        if res.status == 2:
            status = "infeasible"
            break
        if res.status == 1:
            status = "iteration_limit"
            masses = np.maximum(res.x, 0.0)
            break
        if res.status != 0:
            raise RuntimeError(f"LP solver failure: {res.message}")
        masses = np.maximum(res.x, 0.0)
        status = "optimal"
        pot = _component_potentials(problem, masses)
        viol = np.abs(pot).max(axis=0) - problem.bound
        if float(viol.max()) <= tol * max(1.0, problem.bound):
            break
        order = np.argsort(-viol, kind="stable")
        new = [k for k in order[:add_per_round] if viol[k] > tol and not active[k]]
        if not new:
            break
        active[new] = True
    else:
        status = "iteration_limit"

    pot = _component_potentials(problem, masses)
    max_viol = float((np.abs(pot).max(axis=0) - problem.bound).max())
    if len(caps):
        max_viol = max(max_viol, float((G @ masses - caps).max()))

    active_rows = []
    slack = np.abs(np.abs(pot) - problem.bound)
    for ci, k in np.argwhere(slack <= 1e-7 * max(1.0, problem.bound)):
        active_rows.append({"kind": "potential", "point": int(k),
                            "component": problem.components[ci]})
    if len(caps):
        tight = np.abs(G @ masses - caps) <= 1e-9 * np.maximum(caps, 1e-300)
        for q in np.flatnonzero(tight):
            active_rows.append({"kind": "growth", "cube": int(q)})

    gap = np.nan
    if res is not None and res.status == 0 and getattr(res, "ineqlin", None) is not None:
        # strong duality on the last working LP: c x = b y at the optimum
        dual_obj = float(b_ub @ np.asarray(res.ineqlin.marginals))
        gap = abs(-float(np.sum(masses)) - dual_obj)

    return CapacitySolution(
        value=float(np.sum(masses)),
        masses=masses,
        active_constraints=active_rows,
        solver_status=status,
        duality_gap=gap,
        max_violation=max_viol,
    )


def _default_resolution(support: DiscreteMeasure):
    msep = support.min_separation
    if not np.isfinite(msep):
        msep = max(support.diameter(), 1.0) / 8.0
    ch = msep / 2.0
    delta = msep / 2.0
    diam = max(support.diameter(), msep)
    inflate = max(16.0 * ch, 0.125 * diam)
    return ch, delta, inflate


def gamma_plus(support: DiscreteMeasure, alpha: float = 1.0, components=None,
               constraint_h: float | None = None, delta: float | None = None,
               box_inflate: float | None = None, bound: float = 1.0,
               tol: float = 1e-9) -> CapacitySolution:
    """Positive capacity estimate with all kernel components bounded."""
    ch0, d0, inf0 = _default_resolution(support)
    problem = build_problem(
        support,
        components=components or tuple(range(1, support.dim + 1)),
        alpha=alpha,
        box_inflate=box_inflate if box_inflate is not None else inf0,
        constraint_h=constraint_h if constraint_h is not None else ch0,
        delta=delta if delta is not None else d0,
        with_growth=False,
        bound=bound,
    )
    return solve(problem, tol=tol)


def gamma_hat_plus(support: DiscreteMeasure, k: int, alpha: float = 1.0,
                   constraint_h: float | None = None, delta: float | None = None,
                   box_inflate: float | None = None, bound: float = 1.0,
                   tol: float = 1e-9) -> CapacitySolution:
    """Positive capacity estimate with component k dropped and growth rows on.

    Bounds the n-1 components other than k and imposes mass(Q) <= l(Q)^alpha
    over the dyadic cube family (admissible growth constant 1).
    """
    if not 1 <= k <= support.dim:
        raise ValueError(f"excluded component {k} outside 1..{support.dim}")
    comps = tuple(j for j in range(1, support.dim + 1) if j != k)
    ch0, d0, inf0 = _default_resolution(support)
    problem = build_problem(
        support,
        components=comps,
        alpha=alpha,
        box_inflate=box_inflate if box_inflate is not None else inf0,
        constraint_h=constraint_h if constraint_h is not None else ch0,
        delta=delta if delta is not None else d0,
        with_growth=True,
        bound=bound,
    )
    return solve(problem, tol=tol)


def named_geometry(name: str, h: float, alpha: float = 0.5, g: int = 2) -> DiscreteMeasure:
    """Standard experiment geometries by name.

    disk: unit-radius disk grid at spacing h; segment: unit segment at h;
    square: unit square boundary at h; cantor4: corner-quarter Cantor at
    generation g; cantor-linear: axis Cantor of dimension alpha at
    generation g.  h is ignored by the Cantor geometries (their resolution
    is the generation).
    """
    if name == "disk":
        return grid_on_disk(1.0, h)
    if name == "segment":
        return grid_on_segment(1.0, h)
    if name == "square":
        return grid_on_square_boundary(1.0, h)
    if name == "cantor4":
        return cantor_corner_quarter(g)
    if name == "cantor-linear":
        return cantor_linear(alpha, g)
    raise ValueError(f"unknown geometry {name!r}")


def comparability_experiment(geometries, k: int = 1, tol: float = 1e-9):
    """gamma_hat_plus / gamma_plus ratios over a suite of geometries.

    geometries is a sequence of (name, DiscreteMeasure, resolution, delta):
    resolution drives the constraint lattice (constraint_h = resolution/2)
    while delta is the geometry's own exclusion radius -- tied to the
    support spacing for grid discretizations, but pinned to the cell scale
    for generation-type supports so that refining the lattice converges.
    Solver failures are recorded per row instead of aborting the table.
    """
    rows = []
    for name, support, res, delta in geometries:
        ch = res / 2.0
        row = {"geometry": name, "h": res, "delta": delta, "alpha": 1.0, "k": k,
               "gamma_plus": np.nan, "gamma_hat_plus": np.nan, "ratio": np.nan,
               "status": "optimal"}
        try:
            plus = gamma_plus(support, constraint_h=ch, delta=delta, tol=tol)
            hat = gamma_hat_plus(support, k=k, constraint_h=ch, delta=delta, tol=tol)
            row["gamma_plus"] = plus.value
            row["gamma_hat_plus"] = hat.value
            row["ratio"] = hat.value / plus.value if plus.value > 0 else np.inf
            if plus.solver_status != "optimal" or hat.solver_status != "optimal":
                row["status"] = f"{plus.solver_status}/{hat.solver_status}"
        except Exception as exc:  # noqa: BLE001 - failures reported per row
            row["status"] = f"failed: {exc}"
        rows.append(row)
    return rows


def comparability_suite(h: float):
    """The standard geometry suite at lattice resolution h: unit disk,
    segment, and square-boundary grids at spacing h (exclusion h/2) plus the
    corner-quarter Cantor generations 1..3 (exclusion half a cell side)."""
    geoms = [
        ("disk", grid_on_disk(1.0, h), h, h / 2.0),
        ("segment", grid_on_segment(1.0, h), h, h / 2.0),
        ("square", grid_on_square_boundary(1.0, h), h, h / 2.0),
    ]
    for g in (1, 2, 3):
        geoms.append((f"cantor4-g{g}", cantor_corner_quarter(g), h, 4.0 ** (-g) / 2.0))
    return geoms


def alpha_separation_experiment(alpha: float, g_max: int, tol: float = 1e-9):
    """All-component LP value versus excluded-first-component value (with
    growth rows) on the axis Cantor sets of dimension alpha, g = 1..g_max.

    The all-component value should decay with the generation while the
    excluded-component value stays bounded below: the support triples have
    identical second coordinates, so the second-component permutation sums
    vanish identically and that transform stays tame no matter how fine the
    set gets.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    rows = []
    for g in range(1, g_max + 1):
        support = cantor_linear(alpha, g)
        sol_all = gamma_plus(support, alpha=alpha, tol=tol)
        sol_hat = gamma_hat_plus(support, k=1, alpha=alpha, tol=tol)
        rows.append({
            "g": g,
            "atoms": len(support),
            "value_all_components": sol_all.value,
            "value_excluded_plus_growth": sol_hat.value,
            "status": f"{sol_all.solver_status}/{sol_hat.solver_status}",
        })
    return rows
