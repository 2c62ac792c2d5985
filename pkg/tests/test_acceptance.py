"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see every line.  Criterion 3
asserts the two-sided projection bound in its commonly quoted largest-side
form; that form is numerically false (see
test_symmetrization.test_largest_side_upper_bound_fails for an explicit
witness), so the criterion fails by design of the check and is expected red;
the corrected two-shortest-sides bound is verified in the module tests.
"""

import itertools
import time

import numpy as np
import pytest

from rieszlab import cli
from rieszlab.capacity import (
    alpha_separation_experiment,
    build_problem,
    comparability_experiment,
    comparability_suite,
    solve,
)
from rieszlab.counterexamples import (
    TentMeasureSpec,
    hilbert_logplus,
    log_measure_discretized,
    log_measure_growth,
    log_measure_potential_routes,
    tent_growth_ratio,
    tent_potential_k1,
)
from rieszlab.kernels import KernelSpec, eval_scalar
from rieszlab.measures import (
    DiscreteMeasure,
    cantor_corner_quarter,
    cantor_linear,
    grid_on_disk,
    growth_constant,
    product_with_interval,
)
from rieszlab.symmetrization import menger_curvature, perm_sum, perm_sum_alpha
from rieszlab.transforms import (
    energy_identity,
    r3_flatness,
    truncated_transform,
    vector_energy,
)


def _report(num: int, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {num:02d} [{'PASS' if ok else 'FAIL'}] {detail}")
    return ok


@pytest.fixture(scope="module")
def disk_run():
    """gamma_plus on the unit disk at h = 1/32, delta = h/2 (shared)."""
    h = 1.0 / 32.0
    support = grid_on_disk(1.0, h)
    problem = build_problem(support, components=(1, 2), alpha=1.0,
                            box_inflate=0.25, constraint_h=h / 2.0, delta=h / 2.0)
    t0 = time.time()
    sol = solve(problem)
    return problem, sol, time.time() - t0


def test_criterion_01_positivity():
    t0 = time.time()
    rng = np.random.default_rng(101)
    total = 0
    violations = 0
    worst = 0.0
    for dim in (2, 3, 4, 5):
        x1, x2, x3 = rng.standard_normal((3, 250_000, dim))
        for i in range(1, dim + 1):
            p = perm_sum(i, x1, x2, x3)
            violations += int(np.sum(p < -1e-15))
            worst = min(worst, float(np.min(p)))
        total += 250_000
    elapsed = time.time() - t0
    ok = violations == 0 and elapsed < 30.0
    assert _report(1, ok, f"positivity: {total} triples over n=2..5, "
                          f"{violations} below -1e-15 (min p = {worst:.1e}), "
                          f"{elapsed:.1f}s < 30s")


def test_criterion_02_curvature_identity():
    rng = np.random.default_rng(102)
    x1, x2, x3 = rng.standard_normal((3, 100_000, 2))
    p1 = perm_sum(1, x1, x2, x3)
    p2 = perm_sum(2, x1, x2, x3)
    c = menger_curvature(x1, x2, x3)
    bad_c = int(np.sum(np.abs(4.0 * p1 - c * c) > 1e-10 * c * c))
    bad_p = int(np.sum(np.abs(p1 - p2) > 1e-12 * np.maximum(p1, p2)))
    ok = bad_c == 0 and bad_p == 0
    assert _report(2, ok, f"plane identity on 1e5 triples: "
                          f"{bad_c} curvature violations, {bad_p} component violations")


def test_criterion_03_projection_sandwich_as_stated():
    rng = np.random.default_rng(103)
    degenerate_exact = True
    for _ in range(200):
        y = rng.standard_normal(3)
        z = rng.standard_normal(3)
        tri = (np.array([0.3, y[0], z[0]]), np.array([0.3, y[1], z[1]]),
               np.array([0.3, y[2], z[2]]))
        if perm_sum_alpha(0.5, 1, *tri) != 0.0:
            degenerate_exact = False
    violations = {}
    for alpha in (0.25, 0.5, 0.75):
        x1, x2, x3 = rng.standard_normal((3, 100_000, 3))
        a, b, ab = x2 - x1, x3 - x2, x3 - x1
        L = np.maximum(np.maximum(np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1)),
                       np.linalg.norm(ab, axis=1))
        count = 0
        for i in (1, 2, 3):
            p = perm_sum_alpha(alpha, i, x1, x2, x3)
            m = np.maximum(np.maximum(np.abs(a[:, i - 1]), np.abs(b[:, i - 1])),
                           np.abs(ab[:, i - 1]))
            lo = (2.0 - 2.0**alpha) * m * m / L ** (2.0 + 2.0 * alpha)
            hi = 3.0 * m * m / L ** (2.0 + 2.0 * alpha)
            count += int(np.sum(p > hi * (1.0 + 1e-12)))
            count += int(np.sum(p < lo * (1.0 - 1e-12)))
        violations[alpha] = count
    ok = degenerate_exact and all(v == 0 for v in violations.values())
    assert _report(3, ok, f"two-sided projection bound (largest-side form), "
                          f"1e5 triples per alpha: violations {violations}, "
                          f"degenerate direction exact: {degenerate_exact}")


def _energy_case(mu):
    eps = mu.min_separation / 2.0
    rep = energy_identity(mu, 1, 1.0, eps)
    return abs(rep.residual) <= 1e-9 * (1.0 + rep.l2_energy)


def test_criterion_04_exact_energy_identity():
    rng = np.random.default_rng(104)
    ok = True
    for _ in range(50):
        n = int(rng.integers(3, 61))
        mu = DiscreteMeasure(rng.uniform(0.0, 1.0, (n, 2)), rng.uniform(0.1, 1.0, n))
        ok &= _energy_case(mu)
    for g in range(4):
        ok &= _energy_case(cantor_corner_quarter(g if g else 1))
    for g in (1, 2, 3):
        ok &= _energy_case(cantor_linear(0.5, g))

    # six-atom brute-force expansion, same lexicographic order and the public
    # scalar operations: must agree to the bit
    mu6 = DiscreteMeasure(rng.uniform(0.0, 1.0, (6, 2)), rng.uniform(0.1, 1.0, 6))
    eps = mu6.min_separation / 2.0
    rep = energy_identity(mu6, 1, 1.0, eps)
    pts, w = mu6.points, mu6.masses
    contribs = []
    for c, j, k in itertools.combinations(range(6), 3):
        p = perm_sum_alpha(1.0, 1, pts[c], pts[j], pts[k], validate=False)
        contribs.append((6.0 * p) * ((w[c] * w[j]) * w[k]))
    brute_perm = float(np.sum(np.asarray(contribs)))
    spec = KernelSpec(2, 1.0, 1)
    brute_l2 = sum(
        w[x] * sum(eval_scalar(spec, pts[x] - pts[y]) * w[y]
                   for y in range(6) if y != x) ** 2 for x in range(6))
    bitwise = rep.perm_energy == brute_perm
    close = abs(rep.l2_energy - brute_l2) <= 1e-12 * brute_l2
    ok = ok and bitwise and close
    assert _report(4, ok, f"energy identity on 50 random + 7 Cantor measures; "
                          f"6-atom oracle bitwise: {bitwise}, l2 match: {close}")


def test_criterion_05_vector_consistency():
    rng = np.random.default_rng(105)
    ok = True
    worst = 0.0
    cases = [DiscreteMeasure(rng.uniform(0, 1, (25, d)), rng.uniform(0.1, 1, 25))
             for d in (2, 3)] + [cantor_corner_quarter(2)]
    for mu in cases:
        eps = mu.min_separation / 2.0
        total = sum(energy_identity(mu, i, 1.0, eps).l2_energy
                    for i in range(1, mu.dim + 1))
        vec = vector_energy(mu, 1.0, eps)
        rel = abs(total - vec) / vec
        worst = max(worst, rel)
        ok &= rel <= 1e-12
    assert _report(5, ok, f"sum of component energies vs vector energy: "
                          f"worst relative gap {worst:.2e} <= 1e-12")


def test_criterion_06_disk_oracle(disk_run):
    problem, sol, elapsed = disk_run
    value_ok = 0.9 <= sol.value <= 1.1
    time_ok = elapsed < 300.0

    # explicit uniform unit-mass circle measure: feasible by direct evaluation
    M = 4096
    th = (np.arange(M) + 0.5) * (2.0 * np.pi / M)
    circle = DiscreteMeasure(np.column_stack([np.cos(th), np.sin(th)]),
                             np.full(M, 1.0 / M))
    from scipy.spatial import cKDTree

    d, _ = cKDTree(circle.points).query(problem.constraint_points)
    pts = problem.constraint_points[d >= problem.delta]
    pot = truncated_transform(circle, KernelSpec(2, 1.0), 0.0, pts)
    sup = float(np.max(np.hypot(pot[:, 0], pot[:, 1])))
    oracle_ok = sup <= 1.0 + 1e-6
    ok = value_ok and time_ok and oracle_ok
    assert _report(6, ok, f"disk at h=1/32: value {sol.value:.4f} in [0.9, 1.1], "
                          f"{elapsed:.0f}s < 300s, circle-measure sup "
                          f"{sup:.6f} <= 1+1e-6")


def test_criterion_07_scaling_law():
    from rieszlab.measures import grid_on_segment

    support = grid_on_segment(1.0, 0.125)
    ok = True
    worst = 0.0
    for alpha in (0.5, 1.0):
        prob = build_problem(support, components=(1, 2), alpha=alpha,
                             constraint_h=0.0625, delta=0.03125)
        base = solve(prob).value
        for lam in (2.0, 0.5):
            scaled = solve(prob.scaled(lam)).value
            rel = abs(scaled - lam**alpha * base) / (lam**alpha * base)
            worst = max(worst, rel)
            ok &= rel <= 1e-6
    assert _report(7, ok, f"LP value scales like lambda^alpha: worst relative "
                          f"deviation {worst:.2e} <= 1e-6")


def test_criterion_08_comparability_band():
    h = 1.0 / 8.0
    coarse = comparability_experiment(comparability_suite(h), k=1)
    fine = comparability_experiment(comparability_suite(h / 2.0), k=1)
    ratios = [r["ratio"] for r in coarse + fine]
    band_ok = all(np.isfinite(x) and 1.0 / 20.0 <= x <= 20.0 for x in ratios)
    band = (min(ratios), max(ratios))
    stable_ok = True
    worst = 0.0
    for a, b in zip(coarse, fine):
        for key in ("gamma_plus", "gamma_hat_plus"):
            rel = abs(b[key] - a[key]) / a[key]
            worst = max(worst, rel)
            stable_ok &= rel < 0.15
    ok = band_ok and stable_ok
    assert _report(8, ok, f"comparability over 6 geometries: ratios within "
                          f"[{band[0]:.3f}, {band[1]:.3f}], max h->h/2 drift "
                          f"{worst:.1%} < 15%")


def test_criterion_09_alpha_separation():
    rows = alpha_separation_experiment(0.5, 5)
    vals = [r["value_all_components"] for r in rows]
    hats = [r["value_excluded_plus_growth"] for r in rows]
    decreasing = all(a > b for a, b in zip(vals, vals[1:]))
    bounded = min(hats) >= 0.5 * hats[0]
    exact_zero = True
    for g in (1, 2, 3, 4):
        pts = cantor_linear(0.5, g).points
        for idx in itertools.combinations(range(len(pts)), 3):
            x1, x2, x3 = pts[list(idx)]
            if perm_sum_alpha(0.5, 2, x1, x2, x3) != 0.0:
                exact_zero = False
    ok = decreasing and bounded and exact_zero
    assert _report(9, ok, f"axis Cantor: all-component values {['%.3f' % v for v in vals]} "
                          f"strictly decreasing: {decreasing}; excluded value floor "
                          f"{min(hats):.3f} >= {0.5 * hats[0]:.3f}; orthogonal sums "
                          f"exactly zero: {exact_zero}")


def test_criterion_10_tent_counterexample():
    sup_ok = True
    for nmax in (1, 5, 12, 20):
        spec = TentMeasureSpec(nmax)
        xs = np.linspace(-1.5, 1.5, 110)
        ys = [np.linspace(-0.2, 0.7, 110)]
        for n in range(1, nmax + 1):
            a, c, b = spec.interval(n)
            ys.append(np.array([(a + c) / 2, c, (c + b) / 2]))
        X, Y = np.meshgrid(xs, np.concatenate(ys), indexing="ij")
        assert X.size >= 10_000
        sup_ok &= float(np.max(np.abs(tent_potential_k1(spec, X, Y)))) <= 1.0
    spec = TentMeasureSpec(20)
    exact_ten = tent_growth_ratio(spec, 1).ratio == 10.0
    exceeds = any(tent_growth_ratio(spec, n).ratio > 1e3 for n in range(1, 21))
    flux_ok = all(tent_growth_ratio(spec, n).mismatch < 1e-6 for n in range(1, 21))
    ok = sup_ok and exact_ten and exceeds and flux_ok
    assert _report(10, ok, f"tent measure: potential sup <= 1 on 1e4+ grids for "
                           f"nmax up to 20: {sup_ok}; ratio(1) = 10 exactly: "
                           f"{exact_ten}; ratio > 1e3 reached: {exceeds}; flux "
                           f"oracle within 1e-6: {flux_ok}")


def test_criterion_11_log_counterexample():
    zero_ok = hilbert_logplus(0.0) == 0.0
    route_worst = 0.0
    for (x, y) in ((0.2, 0.3), (-0.6, -0.8), (1.5, 0.4), (0.99, 0.05), (-2.9, 1.9)):
        d, p = log_measure_potential_routes(x, y)
        route_worst = max(route_worst, abs(d - p))
    routes_ok = route_worst < 1e-4
    md = log_measure_discretized(4096)
    scan = growth_constant(md, 1.0, md.diameter() / 2.0**8 * 0.99)
    growth_ok = True
    for j in range(1, 9):
        formula = log_measure_growth(j)
        growth_ok &= abs(scan.per_scale[j].max_ratio - formula) <= 0.1 * formula
    ok = zero_ok and routes_ok and growth_ok
    assert _report(11, ok, f"log measure: H(0) = 0: {zero_ok}; two potential routes "
                           f"agree to {route_worst:.1e} < 1e-4; growth 1 + j log 2 "
                           f"within 10% for j <= 8: {growth_ok}")


def test_criterion_12_r3_flatness():
    K2 = cantor_corner_quarter(2)
    v8 = r3_flatness(product_with_interval(K2, 8, 1.0), 0.05)
    v16 = r3_flatness(product_with_interval(K2, 16, 1.0), 0.05)
    drop_ok = v16 <= 0.6 * v8
    stack = product_with_interval(DiscreteMeasure([[0.0, 0.0]], [1.0]), 4, 1.0)
    exact = r3_flatness(stack, 0.05, samples=[[0.0, 0.0, 0.0]]) == 0.0
    ok = drop_ok and exact
    assert _report(12, ok, f"vertical-cylinder flatness: doubling the stack "
                           f"resolution drops max|R3| {v8:.2e} -> {v16:.2e} "
                           f"(>= 40%): {drop_ok}; single stack exact 0: {exact}")


def test_criterion_13_thread_determinism(tmp_path):
    def body(path):
        return "\n".join(line for line in path.read_text().splitlines()
                         if not line.startswith("#"))

    e_bodies, c_bodies = set(), set()
    for t in ("1", "2", "8"):
        e_out = tmp_path / f"e{t}.csv"
        assert cli.main(["energy", "--measure", "random", "--atoms", "45",
                         "--seed", "9", "--threads", t,
                         "--out", str(e_out), "--no-plot"]) == 0
        e_bodies.add(body(e_out))
        c_out = tmp_path / f"c{t}.csv"
        assert cli.main(["capacity", "--geometry", "segment", "--h", "0.125",
                         "--threads", t, "--out", str(c_out), "--no-plot"]) == 0
        c_bodies.add(body(c_out))
    ok = len(e_bodies) == 1 and len(c_bodies) == 1
    assert _report(13, ok, f"energy and capacity CSV bodies byte-identical over "
                           f"threads 1/2/8: energy {len(e_bodies) == 1}, "
                           f"capacity {len(c_bodies) == 1}")
