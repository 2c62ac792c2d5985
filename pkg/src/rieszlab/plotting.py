"""Figure rendering for the CLI report path.

Each report command gets one figure next to its delimited output; rendering
is best-effort and never fails the run.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render(command: str, rows: list[dict], meta: dict, path: str) -> str | None:
    """Write the figure for a command's report rows; returns the path.

    Best-effort: any rendering problem is swallowed so the delimited report
    still lands.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        fn = _RENDERERS.get(command)
        if fn is None or not rows:
            return None
        fn(ax, rows, meta)
        ax.set_title(command)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        return path
    except Exception:
        return None
    finally:
        plt.close(fig)


def _render_symcheck(ax, rows, meta):
    names = [r["check"] for r in rows]
    vals = [max(r["max_violation"], 1e-18) for r in rows]
    ax.bar(range(len(names)), vals, color=["tab:red" if r["violations"] else "tab:blue" for r in rows])
    ax.set_xticks(range(len(names)), names, rotation=20, ha="right")
    ax.set_yscale("log")
    ax.set_ylabel("max violation")
    ax.axhline(1e-12, color="gray", lw=0.8, ls="--")


def _render_energy(ax, rows, meta):
    r = rows[0]
    parts = ["l2_energy", "perm_energy/3", "diagonal"]
    vals = [r["l2_energy"], r["perm_energy"] / 3.0, r["diagonal"]]
    ax.bar(parts, vals, color=["tab:blue", "tab:orange", "tab:green"])
    ax.set_ylabel("energy")
    ax.text(0.02, 0.95, f"residual = {r['residual']:.3e}", transform=ax.transAxes, va="top")


def _render_capacity(ax, rows, meta):
    names = [f"{r['geometry']} J={r['J']}" for r in rows]
    ax.bar(range(len(rows)), [r["value"] for r in rows], color="tab:blue")
    ax.set_xticks(range(len(rows)), names, rotation=15, ha="right")
    ax.set_ylabel("LP capacity value")


def _render_counterexample(ax, rows, meta):
    if "ratio" in rows[0] and "n" in rows[0]:
        ax.semilogy([r["n"] for r in rows], [r["ratio"] for r in rows], "o-")
        ax.set_xlabel("tent index n")
        ax.set_ylabel("pairing ratio |<mu, Q_n>| / l(Q_n)")
    elif "value" in rows[0]:
        sc = ax.scatter([r["x"] for r in rows], [r["y"] for r in rows],
                        c=[r["value"] for r in rows], s=4, cmap="coolwarm")
        ax.figure.colorbar(sc, ax=ax, label="potential")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    else:
        js = [r["j"] for r in rows]
        ax.plot(js, [r["ratio_formula"] for r in rows], "o-", label="closed form")
        ax.plot(js, [r["ratio_discretized"] for r in rows], "s--", label="cube scan")
        ax.set_xlabel("dyadic index j")
        ax.set_ylabel("mass / length")
        ax.legend()


def _render_cantor(ax, rows, meta):
    ax.loglog([r["scale"] for r in rows], [r["max_ratio"] for r in rows], "o-")
    ax.set_xlabel("cube side")
    ax.set_ylabel("max mass(Q) / side^alpha")


def _render_hilbert(ax, rows, meta):
    ax.plot([r["x"] for r in rows], [r["value"] for r in rows], ".-", ms=3)
    ax.set_xlabel("x")
    ax.set_ylabel("Hilbert transform of log+(1/|t|)")
    ax.axhline(0, color="gray", lw=0.6)


def _render_recover(ax, rows, meta):
    r = rows[0]
    ax.bar(["recovered", "exact"], [r["recovered"], r["exact"]], color=["tab:blue", "tab:gray"])
    ax.set_ylabel("pairing <mu, phi>")
    ax.text(0.02, 0.95, f"abs error = {r['abs_error']:.2e}", transform=ax.transAxes, va="top")


_RENDERERS = {
    "symcheck": _render_symcheck,
    "energy": _render_energy,
    "capacity": _render_capacity,
    "counterexample": _render_counterexample,
    "cantor": _render_cantor,
    "hilbert": _render_hilbert,
    "recover": _render_recover,
}
