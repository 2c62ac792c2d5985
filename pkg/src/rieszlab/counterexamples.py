"""Closed-form measures with bounded first-component potential but infinite
linear growth.

Two constructions live here.  The tensor-tent measure is the Laplacian of
h(x, y) = f(x) g(y), f the unit tent and g a series of thin tents of height
1/n^2 on the dyadic intervals I_n = [2^-(n+1), 2^-n]; its first-component
potential is (up to a constant) f'(x) g(y), uniformly bounded, while the
pairing ratio against the squares I_n x I_n blows up like 2^n / n^2.  The
second is the positive measure log+(1/|t|) dt on [-1, 1], whose
first-component potential is the conjugate Poisson extension P_y(Hf) of the
(bounded) Hilbert transform of the density, while mass(interval)/length
grows like 1 + j log 2 on the dyadic intervals around the origin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicSpline

from .measures import DiscreteMeasure

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TentMeasureSpec:
    """Truncation of the tent series: tents n = 1..n_max carry height 1/n^2.

    The n = 0 interval is excluded: the series defining the measure starts
    at n = 1 (height 1/n^2 is undefined at n = 0).
    """

    n_max: int = 12

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    def interval(self, n: int):
        """(left, center, right) of I_n."""
        if not 1 <= n <= self.n_max:
            raise ValueError(f"tent index {n} outside 1..{self.n_max}")
        return 2.0 ** (-n - 1), 3.0 / 2.0 ** (n + 2), 2.0 ** (-n)

    def slope(self, n: int) -> float:
        return 2.0 ** (n + 2) / n**2


def tent_f(x):
    """Unit tent on [-1, 1]."""
    x = np.asarray(x, dtype=float)
    out = np.maximum(0.0, 1.0 - np.abs(x))
    return float(out) if out.ndim == 0 else out


def tent_f_prime(x):
    """Left derivative of the unit tent (the kink set has measure zero)."""
    x = np.asarray(x, dtype=float)
    out = np.where(x <= -1.0, 0.0, np.where(x <= 0.0, 1.0, np.where(x <= 1.0, -1.0, 0.0)))
    return float(out) if out.ndim == 0 else out


def _tent_index(spec: TentMeasureSpec, y):
    """Index n with y in I_n, or 0 where y is outside every kept tent."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        n = np.where(y > 0.0, np.floor(-np.log2(np.where(y > 0.0, y, 1.0))), 0.0)
    n = n.astype(int)
    n = np.where((y <= 0.0) | (n < 1) | (n > spec.n_max), 0, n)
    return n


def tent_g(spec: TentMeasureSpec, y):
    y = np.asarray(y, dtype=float)
    n = _tent_index(spec, y)
    safe = np.maximum(n, 1)
    left = 2.0 ** (-safe.astype(float) - 1)
    right = 2.0 ** (-safe.astype(float))
    center = 3.0 / 2.0 ** (safe.astype(float) + 2)
    slope = 2.0 ** (safe.astype(float) + 2) / safe.astype(float) ** 2
    rising = slope * (y - left)
    falling = -slope * (y - right)
    out = np.where(n == 0, 0.0, np.where(y <= center, rising, falling))
    return float(out) if out.ndim == 0 else out


def tent_g_prime(spec: TentMeasureSpec, y):
    """Left derivative of g; dyadic breakpoints take the slope from below."""
    y = np.asarray(y, dtype=float)
    n = _tent_index(spec, y)
    safe = np.maximum(n, 1)
    center = 3.0 / 2.0 ** (safe.astype(float) + 2)
    slope = 2.0 ** (safe.astype(float) + 2) / safe.astype(float) ** 2
    out = np.where(n == 0, 0.0, np.where(y <= center, slope, -slope))
    return float(out) if out.ndim == 0 else out


def tent_potential_k1(spec: TentMeasureSpec, x, y, calibrated: bool = False):
    """First-component potential of the tent measure: f'(x) g(y).

    The reported value drops the kernel's multiplicative constant (only
    boundedness matters); calibrated=True restores the 2*pi that ties it to
    the actual convolution against x1/|x|^2.
    """
    out = tent_f_prime(x) * tent_g(spec, y)
    return out * TWO_PI if calibrated else out


def tent_potential_k2(spec: TentMeasureSpec, x, y, calibrated: bool = False):
    """Second-component potential: f(x) g'(y); sup grows like 2^n/n^2."""
    out = tent_f(x) * tent_g_prime(spec, y)
    return out * TWO_PI if calibrated else out


@dataclass
class TentGrowthCheck:
    n: int
    ratio: float
    closed_pairing: float
    flux_pairing: float
    mismatch: float


def _simpson(fun, a, b, panels=256):
    if b <= a:
        return 0.0
    x = np.linspace(a, b, 2 * panels + 1)
    w = np.asarray(fun(x))
    h = (b - a) / (2 * panels)
    return float(h / 3.0 * (w[0] + w[-1] + 4.0 * np.sum(w[1:-1:2]) + 2.0 * np.sum(w[2:-1:2])))


def tent_growth_ratio(spec: TentMeasureSpec, n: int) -> TentGrowthCheck:
    """Pairing ratio |<mu, Q_n>| / l(Q_n) for Q_n = I_n x I_n.

    ratio is the closed form 2 * (2^(n+2)/n^2) * (1 - mu_n).  The pairing is
    also recomputed two independent ways on the slightly shrunken square
    (inset l/8, so its boundary avoids the singular lines): once from the
    delta-line expansion in closed form, once as the flux of grad h through
    the boundary by Simpson quadrature, and the mismatch is reported.
    """
    a, center, b = spec.interval(n)
    slope = spec.slope(n)
    ratio = 2.0 * slope * (1.0 - center)

    side = b - a
    eta = side / 8.0
    lo, hi = a + eta, b - eta
    # closed form: only the -2*slope delta line at the center crosses the box
    int_f = (hi - lo) - (hi * hi - lo * lo) / 2.0
    closed = -2.0 * slope * int_f

    # flux of grad h through the boundary of [lo, hi]^2, Simpson per edge
    # with the vertical integrals split at the interior kink
    g_int = _simpson(lambda y: tent_g(spec, y), lo, center) \
        + _simpson(lambda y: tent_g(spec, y), center, hi)
    f_int = _simpson(tent_f, lo, hi)
    flux = (tent_f_prime(hi) - tent_f_prime(lo)) * g_int \
        + (tent_g_prime(spec, hi) - tent_g_prime(spec, lo)) * f_int
    return TentGrowthCheck(n=n, ratio=ratio, closed_pairing=closed,
                           flux_pairing=flux, mismatch=abs(flux - closed))


@dataclass(frozen=True)
class LogMeasureSpec:
    """Quadrature controls for the log+(1/|t|) dt measure on [-1, 1]."""

    quad_tol: float = 1e-10
    quad_limit: int = 200
    poisson_table_cutoff: float = 64.0

    def __post_init__(self):
        if self.quad_tol <= 0 or self.quad_limit < 10 or self.poisson_table_cutoff < 4:
            raise ValueError("bad quadrature controls")


_DEFAULT_LOG_SPEC = LogMeasureSpec()


def logplus_density(t):
    """log+(1/|t|): non-negative, integrable, unbounded at 0, zero off [-1, 1]."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(np.abs(t) < 1.0, -np.log(np.abs(t)), 0.0)
    return float(out) if out.ndim == 0 else out


def _hilbert_small(x: float, spec: LogMeasureSpec) -> float:
    """Small-|x| branch: symmetrize over +-t and substitute t = |x| u.

    That turns the transform into
    (2/pi) [ log(1/|x|) A(1/|x|) - B(1/|x|) ] * sgn(x), with
    A(R) = p.v. int_0^R du/(1-u^2) = (1/2) log((R+1)/(R-1)) exactly and
    B(R) = p.v. int_0^R log(u)/(1-u^2) du = -pi^2/4 + int_R^inf log(u)/(u^2-1) du.
    The transform jumps at 0: its one-sided limits are +-pi/2.
    """
    s = math.copysign(1.0, x)
    ax = abs(x)
    R = 1.0 / ax
    A = 0.5 * math.log((R + 1.0) / (R - 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        tail, _ = quad(lambda u: math.log(u) / (u * u - 1.0), R, np.inf,
                       epsabs=spec.quad_tol, epsrel=spec.quad_tol, limit=spec.quad_limit)
    B = -math.pi**2 / 4.0 + tail
    return s * (2.0 / math.pi) * (-math.log(ax) * A - B)


def hilbert_logplus(x: float, spec: LogMeasureSpec = _DEFAULT_LOG_SPEC) -> float:
    """Hilbert transform (1/pi) p.v. integral of log(1/|t|)/(x - t) over [-1, 1].

    The integration is split at t = 0 so the logarithmic singularity of the
    density sits at a panel endpoint; the panel containing x is integrated
    with the principal-value (Cauchy weight) rule.  For |x| below 0.35 the
    pole sits too close to the density's own singularity for the adaptive
    rule, so an exact symmetrized substitution takes over; note the
    transform is bounded but jumps at 0 (one-sided limits +-pi/2), and x
    exactly at 0 returns the principal value 0.  x within quadrature
    resolution of the endpoints +-1 is flagged with an accuracy warning.
    """
    x = float(x)
    if x == 0.0:
        return 0.0
    if min(abs(x - 1.0), abs(x + 1.0)) < 1e-6:
        warnings.warn("evaluation within quadrature resolution of an endpoint of [-1, 1]",
                      stacklevel=2)
    if abs(x) < 0.35:
        return _hilbert_small(x, spec)
    # the density vanishes outside [-1, 1], so the principal-value panel can
    # be extended past the endpoint: that keeps the pole well inside the
    # panel even for x near or beyond +-1, where QAWC would otherwise stall
    if x > 0.0:
        pv_panel = (0.0, max(1.0, x + 0.5))
        plain_panel = (-1.0, 0.0)
    else:
        pv_panel = (min(-1.0, x - 0.5), 0.0)
        plain_panel = (0.0, 1.0)
    with warnings.catch_warnings():
        # the density kink at 1 next to a nearby pole trips QUADPACK's
        # roundoff heuristic even when the value is converged; the
        # full-line identity check pins the actual accuracy
        warnings.simplefilter("ignore", IntegrationWarning)
        pv, _ = quad(logplus_density, *pv_panel, weight="cauchy", wvar=x,
                     epsabs=spec.quad_tol, epsrel=spec.quad_tol, limit=spec.quad_limit)
        plain, _ = quad(lambda t: logplus_density(t) / (x - t), *plain_panel,
                        epsabs=spec.quad_tol, epsrel=spec.quad_tol, limit=spec.quad_limit)
    # cauchy weight is 1/(t - x); the transform integrates against 1/(x - t)
    return (plain - pv) / math.pi


def hilbert_logplus_substitution(x: float, spec: LogMeasureSpec = _DEFAULT_LOG_SPEC) -> float:
    """Cross-check route for |x| > 1: substitute u = t/x, removing the pole."""
    if abs(x) <= 1.0:
        raise ValueError("the substitution form applies for |x| > 1 only")

    def integrand(u):
        u = np.asarray(u, dtype=float)
        small = np.abs(u) < 1e-8
        safe = np.where(small, 1.0, u)
        return np.where(small, 1.0 + u / 2.0, -np.log1p(-safe) / safe)

    val, _ = quad(integrand, -1.0 / x, 1.0 / x, points=[0.0],
                  epsabs=spec.quad_tol, epsrel=spec.quad_tol, limit=spec.quad_limit)
    return val / math.pi


def hilbert_fullline_check(x: float, spec: LogMeasureSpec = _DEFAULT_LOG_SPEC) -> float:
    """Full-line Hilbert transform of log(1/|t|) at 0 < |x| < 1.

    Computed as the [-1, 1] part plus the symmetrized tail over |t| > 1.
    Under the (1/pi) p.v. 1/x normalization and symmetric truncation this
    equals (pi/2) * sgn(x) -- the sign-constant identity that makes the
    transform of the truncated density bounded.  (The commonly quoted
    pi * sgn(x) belongs to a convention with twice this kernel constant;
    the pi/2 value here matches the classical table entry for log|t| and is
    what the quadrature reproduces.)  A strong end-to-end check of the
    principal-value machinery.
    """
    if not 0.0 < abs(x) < 1.0:
        raise ValueError("identity check needs 0 < |x| < 1")
    tail, _ = quad(lambda t: -math.log(t) * 2.0 * x / (x * x - t * t), 1.0, np.inf,
                   epsabs=spec.quad_tol, epsrel=spec.quad_tol, limit=spec.quad_limit)
    return hilbert_logplus(x, spec) + tail / math.pi


def log_measure_potential(x: float, y: float, spec: LogMeasureSpec = _DEFAULT_LOG_SPEC) -> float:
    """Conjugate Poisson transform Q_y f(x) of the log density, by quadrature.

    This is the first-component potential of the measure (normalized by pi).
    y = 0 is on the support; small |y| is flagged.
    """
    if y == 0.0:
        raise ValueError("potential evaluated on the support line y = 0")
    if abs(y) < 1e-3:
        warnings.warn("potential within quadrature resolution of the support line",
                      stacklevel=2)

    def integrand(t):
        t = np.asarray(t, dtype=float)
        return (x - t) / ((x - t) ** 2 + y * y) * logplus_density(t)

    pts = [0.0]
    if -1.0 < x < 1.0:
        pts.append(x)
    val, _ = quad(integrand, -1.0, 1.0, points=sorted(set(pts)),
                  epsabs=spec.quad_tol, epsrel=spec.quad_tol, limit=spec.quad_limit)
    return val / math.pi


class _HilbertTable:
    """Cubic-spline table of the Hilbert transform, odd-extended, with the
    2/(pi t) far-field used beyond the cutoff."""

    def __init__(self, spec: LogMeasureSpec):
        self.spec = spec
        self.cutoff = spec.poisson_table_cutoff
        self.floor = 1e-5
        near_one = np.geomspace(1e-4, 0.14, 48)
        knots = np.unique(np.concatenate([
            np.geomspace(self.floor, 0.86, 280),
            1.0 - near_one[::-1], 1.0 + near_one,  # refine toward the corner at 1
            np.geomspace(1.14, self.cutoff, 140),
        ]))
        vals = np.array([hilbert_logplus(t, spec) for t in knots])
        # no knot at 0: the transform jumps there (one-sided limits +-pi/2)
        self.spline = CubicSpline(knots, vals)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        a = np.clip(np.abs(t), self.floor, self.cutoff)
        core = self.spline(a)
        far = 2.0 / (math.pi * np.where(np.abs(t) > self.cutoff, np.abs(t), 1.0))
        return np.sign(t) * np.where(np.abs(t) > self.cutoff, far, core)


_HILBERT_TABLE: _HilbertTable | None = None


def _hilbert_table(spec: LogMeasureSpec) -> _HilbertTable:
    global _HILBERT_TABLE
    if _HILBERT_TABLE is None or _HILBERT_TABLE.spec != spec:
        _HILBERT_TABLE = _HilbertTable(spec)
    return _HILBERT_TABLE


def log_measure_potential_routes(x: float, y: float,
                                 spec: LogMeasureSpec = _DEFAULT_LOG_SPEC):
    """(direct conjugate-Poisson value, Poisson extension of the Hilbert
    transform) at (x, y): the two agree because the conjugate Poisson
    transform equals the Poisson extension of the Hilbert transform.  The
    conjugate kernel is even in y, so both routes use |y| in the Poisson
    weight."""
    direct = log_measure_potential(x, y, spec)
    table = _hilbert_table(spec)
    ay = abs(y)

    def integrand(t):
        t = np.asarray(t, dtype=float)
        return ay / ((x - t) ** 2 + y * y) * table(t)

    pts = [p for p in (0.0, x) if -table.cutoff < p < table.cutoff]
    core, _ = quad(integrand, -table.cutoff, table.cutoff, points=sorted(set(pts)),
                   epsabs=1e-9, epsrel=1e-9, limit=spec.quad_limit)
    tail_hi, _ = quad(lambda t: ay / ((x - t) ** 2 + y * y) * 2.0 / (math.pi * t),
                      table.cutoff, np.inf, epsabs=1e-11, epsrel=1e-11)
    tail_lo, _ = quad(lambda t: ay / ((x - t) ** 2 + y * y) * 2.0 / (math.pi * t),
                      -np.inf, -table.cutoff, epsabs=1e-11, epsrel=1e-11)
    poisson = (core + tail_hi + tail_lo) / math.pi
    return direct, poisson


def log_measure_growth(j: int) -> float:
    """mass([-2^-j, 2^-j]) / (2 * 2^-j) = 1 + j log 2, exactly.

    The antiderivative of log(1/t) is t (1 + log(1/t)), so the dyadic
    interval ratios grow without bound: the measure has no linear growth.
    """
    if j < 1:
        raise ValueError("dyadic index must be >= 1")
    return 1.0 + j * math.log(2.0)


def log_measure_discretized(cells: int = 4096) -> DiscreteMeasure:
    """Atomic discretization of log+(1/|t|) dt on [-1, 1] (1-D support).

    Cell masses are exact via the closed-form antiderivative; `cells` must
    be even so no cell straddles the singularity at 0.
    """
    if cells < 2 or cells % 2:
        raise ValueError("cells must be a positive even count")
    edges = np.linspace(-1.0, 1.0, cells + 1)
    centers = (edges[:-1] + edges[1:]) / 2.0

    def antideriv(t):
        # integral of log(1/s) ds from 0 to t, for t >= 0
        t = np.abs(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t > 0.0, t * (1.0 - np.log(np.where(t > 0, t, 1.0))), 0.0)

    lo = np.minimum(np.abs(edges[:-1]), np.abs(edges[1:]))
    hi = np.maximum(np.abs(edges[:-1]), np.abs(edges[1:]))
    masses = antideriv(hi) - antideriv(lo)
    return DiscreteMeasure(centers[:, None], masses)

