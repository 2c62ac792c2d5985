"""Command-line front end: runs the standard experiments end to end and
emits machine-readable reports (CSV or JSON) plus a rendered figure.

Exit codes: 0 success, 1 usage or parameter error, 2 property violation
beyond tolerance, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import gamma_hat_plus, gamma_plus, named_geometry, build_problem, solve
from .counterexamples import (
    TentMeasureSpec,
    hilbert_fullline_check,
    hilbert_logplus,
    hilbert_logplus_substitution,
    log_measure_discretized,
    log_measure_growth,
    log_measure_potential_routes,
    tent_growth_ratio,
    tent_potential_k1,
    tent_potential_k2,
)
from .kernels import KernelSpec
from .measures import (
    DiscreteMeasure,
    cantor_corner_quarter,
    cantor_linear,
    growth_constant,
)
from .symmetrization import menger_curvature, perm_sum, perm_sum_alpha
from .transforms import PlateauBump, energy_identity, recover_pairing, truncated_transform, vector_energy

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_SOLVER = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5,
                             cwd=Path(__file__).resolve().parent)
        if out.returncode == 0 and out.stdout.strip():
            return f"rieszlab {__version__} ({out.stdout.strip()})"
    except Exception:
        pass
    return f"rieszlab {__version__}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _csv_text(rows, meta) -> str:
    lines = [f"# config: {json.dumps(meta['config'], sort_keys=True)}",
             f"# version: {meta['version']}",
             f"# elapsed_s: {meta['elapsed_s']:.3f}"]
    for key, val in meta.items():
        if key not in ("config", "version", "elapsed_s"):
            lines.append(f"# {key}: {json.dumps(val) if not isinstance(val, str) else val}")
    if rows:
        cols = list(rows[0].keys())
        lines.append(",".join(cols))
        for r in rows:
            lines.append(",".join(_fmt(r[c]) for c in cols))
    return "\n".join(lines) + "\n"


def write_report(command: str, rows: list[dict], meta: dict, args) -> None:
    if args.format == "json":
        text = json.dumps({"meta": meta, "rows": rows}, indent=1, default=str) + "\n"
        suffix = ".json"
    else:
        text = _csv_text(rows, meta)
        suffix = ".csv"
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    if out.suffix.lower() not in (".csv", ".json"):
        out = out.with_suffix(suffix)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    print(f"wrote {out}")
    if not args.no_plot:
        from . import plotting

        fig = plotting.render(command, rows, meta, str(out.with_suffix(".png")))
        if fig:
            print(f"wrote {fig}")


def _meta(args, t0, extra=None) -> dict:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
           if k != "func"}
    meta = {"config": cfg, "version": version_string(),
            "elapsed_s": time.time() - t0}
    if extra:
        meta.update(extra)
    return meta


# ---------------------------------------------------------------- symcheck

def _sandwich_bounds(alpha, m, L):
    lo = (2.0 - 2.0**alpha) * m * m / L ** (2.0 + 2.0 * alpha)
    hi = 3.0 * m * m / L ** (2.0 + 2.0 * alpha)
    return lo, hi


def cmd_symcheck(args) -> int:
    t0 = time.time()
    rng = np.random.default_rng(args.seed)
    dims = [int(d) for d in args.dims.split(",")]
    checks = args.checks.split(",")
    rows = []
    witness = None
    n = args.samples

    if "positivity" in checks:
        worst = 0.0
        viol = 0
        for d in dims:
            x1, x2, x3 = rng.standard_normal((3, n, d))
            for i in range(1, d + 1):
                p = perm_sum(i, x1, x2, x3)
                worst = max(worst, float(np.max(-p)))
                viol += int(np.sum(p < -1e-15))
        rows.append({"check": "positivity", "alpha": 1.0, "samples": n * sum(dims),
                     "violations": viol, "max_violation": max(worst, 0.0)})

    if "identity" in checks:
        x1, x2, x3 = rng.standard_normal((3, n, 2))
        p1 = perm_sum(1, x1, x2, x3)
        p2 = perm_sum(2, x1, x2, x3)
        c = menger_curvature(x1, x2, x3)
        err_c = np.abs(4.0 * p1 - c * c) - 1e-10 * c * c
        err_p = np.abs(p1 - p2) - 1e-12 * np.maximum(p1, p2)
        viol = int(np.sum(err_c > 0) + np.sum(err_p > 0))
        rows.append({"check": "identity", "alpha": 1.0, "samples": n,
                     "violations": viol,
                     "max_violation": float(max(err_c.max(), err_p.max(), 0.0))})

    if "alignment" in checks:
        worst = 0.0
        viol = 0
        for d in dims:
            base = rng.standard_normal((n, d))
            direction = rng.standard_normal((n, d))
            t1 = rng.uniform(0.2, 1.0, n)[:, None]
            t2 = rng.uniform(1.5, 3.0, n)[:, None]
            x1, x2, x3 = base, base + t1 * direction, base + t2 * direction
            for i in range(1, d + 1):
                p = perm_sum(i, x1, x2, x3)
                worst = max(worst, float(np.max(p)))
                viol += int(np.sum(p > 1e-18))
        rows.append({"check": "alignment", "alpha": 1.0, "samples": n * sum(dims),
                     "violations": viol, "max_violation": worst})

    if "sandwich" in checks:
        for alpha in (0.25, 0.5, 0.75):
            viol = 0
            worst = 0.0
            for d in dims:
                x1, x2, x3 = rng.standard_normal((3, n, d))
                a, b, ab = x2 - x1, x3 - x2, x3 - x1
                L = np.maximum(np.maximum(np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1)),
                               np.linalg.norm(ab, axis=1))
                for i in range(1, d + 1):
                    p = perm_sum_alpha(alpha, i, x1, x2, x3)
                    m = np.maximum(np.maximum(np.abs(a[:, i - 1]), np.abs(b[:, i - 1])),
                                   np.abs(ab[:, i - 1]))
                    lo, hi = _sandwich_bounds(alpha, m, L)
                    bad_hi = p > hi * (1.0 + 1e-12)
                    bad_lo = p < lo * (1.0 - 1e-12)
                    viol += int(np.sum(bad_hi) + np.sum(bad_lo))
                    excess = np.where(hi > 0, p / np.where(hi > 0, hi, 1.0), 0.0)
                    k = int(np.argmax(excess))
                    if excess[k] > worst:
                        worst = float(excess[k])
                        witness = {"check": "sandwich", "alpha": alpha, "i": i,
                                   "x1": x1[k].tolist(), "x2": x2[k].tolist(),
                                   "x3": x3[k].tolist(),
                                   "p": float(p[k]), "upper_bound": float(hi[k]),
                                   "lower_bound": float(lo[k])}
            rows.append({"check": "sandwich", "alpha": alpha, "samples": n * sum(dims),
                         "violations": viol,
                         "max_violation": max(worst - 1.0, 0.0)})

    total = sum(r["violations"] for r in rows)
    extra = {"total_violations": total}
    if witness is not None and total:
        extra["witness"] = witness
    write_report("symcheck", rows, _meta(args, t0, extra), args)
    if total:
        print(f"symcheck: {total} violations; worst witness: {json.dumps(witness)}",
              file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# ------------------------------------------------------------------ energy

def _build_measure(args) -> tuple[str, DiscreteMeasure]:
    if args.measure == "cantor4":
        return f"cantor4(g={args.g})", cantor_corner_quarter(args.g)
    if args.measure == "cantor-linear":
        return f"cantor-linear(alpha={args.alpha},g={args.g})", cantor_linear(args.alpha, args.g)
    if args.measure == "random":
        rng = np.random.default_rng(args.seed)
        pts = rng.uniform(0.0, 1.0, (args.atoms, 2))
        w = rng.uniform(0.5, 1.5, args.atoms)
        return f"random(atoms={args.atoms},seed={args.seed})", DiscreteMeasure(pts, w)
    raise ValueError(f"unknown measure {args.measure!r}")


def cmd_energy(args) -> int:
    t0 = time.time()
    name, mu = _build_measure(args)
    eps = mu.min_separation / 2.0 if args.eps == "auto" else float(args.eps)
    rep = energy_identity(mu, args.component, args.alpha, eps, threads=args.threads)
    comp_sum = sum(
        energy_identity(mu, i, args.alpha, eps, threads=args.threads).l2_energy
        for i in range(1, mu.dim + 1))
    vec = vector_energy(mu, args.alpha, eps)
    rows = [{
        "measure": name, "atoms": len(mu), "i": args.component, "alpha": args.alpha,
        "eps": eps, "l2_energy": rep.l2_energy, "perm_energy": rep.perm_energy,
        "diagonal": rep.diagonal, "residual": rep.residual,
        "vector_energy": vec, "component_energy_sum": comp_sum,
    }]
    write_report("energy", rows, _meta(args, t0), args)
    bound = 1e-9 * (1.0 + rep.l2_energy)
    if eps < mu.min_separation and abs(rep.residual) > bound:
        print(f"energy: identity residual {rep.residual:.3e} exceeds {bound:.3e}",
              file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# ---------------------------------------------------------------- capacity

def cmd_capacity(args) -> int:
    t0 = time.time()
    support = named_geometry(args.geometry, args.h, alpha=args.alpha, g=args.g)
    gridlike = args.geometry in ("disk", "segment", "square")
    ch = args.h / 2.0 if gridlike else None
    delta = args.delta if args.delta is not None else (args.h / 2.0 if gridlike else None)
    kw = dict(alpha=args.alpha, constraint_h=ch, delta=delta)
    if args.exclude_component is not None:
        sol = gamma_hat_plus(support, k=args.exclude_component, **kw)
        J = ";".join(str(j) for j in range(1, support.dim + 1) if j != args.exclude_component)
        J += "+growth"
    elif args.component is not None:
        comps = tuple(int(c) for c in str(args.component).split(","))
        ch0 = ch if ch is not None else support.min_separation / 2.0
        problem = build_problem(support, comps, alpha=args.alpha,
                                box_inflate=max(16 * ch0, 0.125 * support.diameter()),
                                constraint_h=ch0, delta=delta)
        sol = solve(problem)
        J = ";".join(str(c) for c in comps)
    else:
        sol = gamma_plus(support, **kw)
        J = ";".join(str(j) for j in range(1, support.dim + 1))
    rows = [{
        "geometry": args.geometry, "h": args.h,
        "delta": delta if delta is not None else support.min_separation / 2.0,
        "alpha": args.alpha, "J": J, "value": sol.value, "status": sol.solver_status,
        "max_violation": sol.max_violation, "support_points": len(support),
    }]
    write_report("capacity", rows, _meta(args, t0), args)
    if sol.solver_status != "optimal":
        print(f"capacity: solver status {sol.solver_status}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


# ----------------------------------------------------------- counterexample

def _tent_grid_sup(spec: TentMeasureSpec, n_grid: int = 101):
    """Sup of |potential| over a grid that resolves every kept tent: a coarse
    uniform sweep plus the rising-edge midpoints of each tent."""
    xs = np.linspace(-1.5, 1.5, n_grid)
    ys_uniform = np.linspace(-0.25, 0.75, n_grid)
    ys_tents = []
    for n in range(1, spec.n_max + 1):
        a, c, b = spec.interval(n)
        ys_tents.extend([(a + c) / 2.0, c, (c + b) / 2.0])
    ys = np.concatenate([ys_uniform, ys_tents])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    k1 = np.abs(tent_potential_k1(spec, X, Y)).max()
    k2 = np.abs(tent_potential_k2(spec, X, Y)).max()
    return float(k1), float(k2), X.size


def cmd_counterexample(args) -> int:
    t0 = time.time()
    if args.which == "tent":
        spec = TentMeasureSpec(args.nmax)
        if args.sweep is not None:
            # grid sweep report: one (x, y, value) row per evaluation point
            fn = tent_potential_k1 if args.sweep == "k1" else tent_potential_k2
            xs = np.linspace(-1.25, 1.25, 61)
            ys = []
            for n in range(1, spec.n_max + 1):
                a, c, b = spec.interval(n)
                ys.extend([(a + c) / 2.0, c, (c + b) / 2.0])
            ys = np.unique(np.concatenate([np.linspace(0.0, 0.6, 41), ys]))
            rows = [{"x": float(x), "y": float(y), "value": float(fn(spec, x, y))}
                    for x in xs for y in ys]
            sup = max(abs(r["value"]) for r in rows)
            write_report("counterexample", rows, _meta(args, t0, {"sup": sup}), args)
            return EXIT_OK
        rows = []
        for n in range(1, spec.n_max + 1):
            chk = tent_growth_ratio(spec, n)
            rows.append({"n": n, "ratio": chk.ratio, "closed_pairing": chk.closed_pairing,
                         "flux_pairing": chk.flux_pairing, "mismatch": chk.mismatch})
        k1_sup, k2_sup, npts = _tent_grid_sup(spec)
        extra = {"k1_grid_sup": k1_sup, "k2_grid_sup": k2_sup, "grid_points": npts}
        write_report("counterexample", rows, _meta(args, t0, extra), args)
        if k1_sup > 1.0 + 1e-12:
            print(f"counterexample: bounded potential exceeded 1: {k1_sup}", file=sys.stderr)
            return EXIT_VIOLATION
        return EXIT_OK
    if args.which == "log":
        jmax = args.nmax
        md = log_measure_discretized(4096)
        scan = growth_constant(md, 1.0, md.diameter() / 2.0**jmax * 0.99)
        rows = []
        for j in range(1, jmax + 1):
            entry = scan.per_scale[j] if j < len(scan.per_scale) else scan.per_scale[-1]
            rows.append({"j": j, "scale": entry.scale,
                         "ratio_formula": log_measure_growth(j),
                         "ratio_discretized": entry.max_ratio})
        try:
            diffs = [abs(log_measure_potential_routes(x, y)[0]
                         - log_measure_potential_routes(x, y)[1])
                     for (x, y) in ((0.2, 0.3), (-0.6, 0.8), (1.5, 0.4))]
            extra = {"hilbert_at_0": hilbert_logplus(0.0),
                     "route_max_diff": max(diffs),
                     "fullline_identity_err": abs(hilbert_fullline_check(0.5) - math.pi / 2.0)}
        except Exception:
            write_report("counterexample", rows, _meta(args, t0, {"partial": True}), args)
            raise
        write_report("counterexample", rows, _meta(args, t0, extra), args)
        return EXIT_OK
    raise ValueError(f"unknown counterexample {args.which!r}")


# ------------------------------------------------------------------ cantor

def cmd_cantor(args) -> int:
    t0 = time.time()
    if args.kind == "corner":
        mu = cantor_corner_quarter(args.g)
    else:
        mu = cantor_linear(args.alpha, args.g)
    s_min = args.s_min if args.s_min is not None else mu.min_separation
    if not np.isfinite(s_min):
        s_min = 1.0
    galpha = 1.0 if args.kind == "corner" else args.alpha
    rep = growth_constant(mu, galpha, s_min)
    rows = [{"scale": e.scale, "max_ratio": e.max_ratio,
             **{f"witness_{d}": float(e.witness_corner[d]) for d in range(mu.dim)}}
            for e in rep.per_scale]
    extra = {"atoms": len(mu), "total_mass": mu.total_mass,
             "min_separation": mu.min_separation, "overall": rep.overall}
    write_report("cantor", rows, _meta(args, t0, extra), args)
    if args.dump_measure:
        path = Path(args.dump_measure)
        path.write_text(mu.to_json(), encoding="utf-8")
        print(f"wrote {path}")
    return EXIT_OK


# ----------------------------------------------------------------- hilbert

def cmd_hilbert(args) -> int:
    t0 = time.time()
    lo, hi, count = args.grid.split(":")
    xs = np.linspace(float(lo), float(hi), int(count))
    rows = []
    try:
        for x in xs:
            rows.append({"x": float(x), "value": hilbert_logplus(float(x))})
    except Exception:
        # flush whatever the sweep produced before propagating
        write_report("hilbert", rows, _meta(args, t0, {"partial": True}), args)
        raise
    sub_err = abs(hilbert_logplus(2.0) - hilbert_logplus_substitution(2.0))
    extra = {
        "fullline_identity_max_err": max(
            abs(hilbert_fullline_check(x) - math.pi / 2.0) for x in (0.25, 0.5, 0.75)),
        "substitution_check_err_at_2": sub_err,
    }
    write_report("hilbert", rows, _meta(args, t0, extra), args)
    return EXIT_OK


# ----------------------------------------------------------------- recover

def cmd_recover(args) -> int:
    t0 = time.time()
    rng = np.random.default_rng(args.seed)
    pts = rng.uniform(-0.3, 0.3, (args.atoms, 2))
    w = rng.uniform(0.5, 1.5, args.atoms)
    mu = DiscreteMeasure(pts, w)
    spec = KernelSpec(2, 1.0, 1)

    def potential(q):
        return truncated_transform(mu, spec, 0.0, q)

    phi = PlateauBump([0.0, 0.0], 1.0)
    radius = 0.5
    T = 10.0 * (2.0 * radius) + 2.0 * phi.halfwidth
    value = recover_pairing(potential, phi, support_radius=radius, T=T)
    value2 = recover_pairing(potential, phi, support_radius=radius, T=2.0 * T)
    exact = mu.total_mass  # phi is 1 on the support hull
    rows = [{"recovered": value, "exact": exact, "abs_error": abs(value - exact),
             "rel_error": abs(value - exact) / exact, "T": T,
             "tail_check_diff": abs(value2 - value)}]
    write_report("recover", rows, _meta(args, t0), args)
    return EXIT_OK


# -------------------------------------------------------------------- main

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="RNG seed, echoed in every report")
    p.add_argument("--threads", type=int, default=1, help="worker cap for the energy sums")
    p.add_argument("--out", type=str, default=None, help="report path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-plot", action="store_true", help="skip the figure next to the report")


def build_parser() -> _Parser:
    parser = _Parser(prog="rieszlab", description=__doc__)
    parser.add_argument("--version", action="version", version=version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("symcheck", help="randomized triple-sum property sweeps")
    p.add_argument("--samples", type=int, default=200_000, help="triples per dimension")
    p.add_argument("--dims", type=str, default="2,3,4,5")
    p.add_argument("--checks", type=str,
                   default="positivity,identity,alignment,sandwich",
                   help="comma list: positivity,identity,alignment,sandwich")
    _add_common(p)
    p.set_defaults(func=cmd_symcheck)

    p = sub.add_parser("energy", help="transform energy and the triple-sum identity")
    p.add_argument("--measure", choices=("cantor4", "cantor-linear", "random"),
                   default="cantor4")
    p.add_argument("--g", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--atoms", type=int, default=30)
    p.add_argument("--component", "--i", dest="component", type=int, default=1)
    p.add_argument("--eps", type=str, default="auto",
                   help="'auto' sets min_separation/2, the exact-identity regime")
    _add_common(p)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("capacity", help="LP capacity estimate for a named geometry")
    p.add_argument("--geometry", choices=("disk", "segment", "square", "cantor4",
                                          "cantor-linear"), default="disk")
    p.add_argument("--h", type=float, default=1.0 / 16.0)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--g", type=int, default=2)
    p.add_argument("--component", type=str, default=None,
                   help="comma list of bounded components (no growth rows)")
    p.add_argument("--exclude-component", type=int, default=None,
                   help="bound all components but this one, with growth rows")
    _add_common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("counterexample", help="bounded-potential measures without linear growth")
    p.add_argument("--which", choices=("tent", "log"), default="tent")
    p.add_argument("--nmax", type=int, default=12,
                   help="tent truncation, or the deepest dyadic index for --which log")
    p.add_argument("--sweep", choices=("k1", "k2"), default=None,
                   help="emit the (x, y, value) potential grid sweep instead of ratios")
    _add_common(p)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("cantor", help="Cantor measure generator and growth scan")
    p.add_argument("--kind", choices=("corner", "linear"), default="corner")
    p.add_argument("--g", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--s-min", type=float, default=None)
    p.add_argument("--dump-measure", type=str, default=None,
                   help="also write the measure as JSON to this path")
    _add_common(p)
    p.set_defaults(func=cmd_cantor)

    p = sub.add_parser("hilbert", help="Hilbert transform of the log density")
    p.add_argument("--grid", type=str, default="-3:3:121", help="lo:hi:count")
    _add_common(p)
    p.set_defaults(func=cmd_hilbert)

    p = sub.add_parser("recover", help="recover a measure pairing from its potential")
    p.add_argument("--atoms", type=int, default=5)
    _add_common(p)
    p.set_defaults(func=cmd_recover)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"rieszlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"rieszlab {args.command}: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
