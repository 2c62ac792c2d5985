import math

import numpy as np
import pytest

from rieszlab.counterexamples import (
    LogMeasureSpec,
    TentMeasureSpec,
    hilbert_fullline_check,
    hilbert_logplus,
    hilbert_logplus_substitution,
    log_measure_discretized,
    log_measure_growth,
    log_measure_potential,
    log_measure_potential_routes,
    logplus_density,
    tent_f,
    tent_f_prime,
    tent_g,
    tent_g_prime,
    tent_growth_ratio,
    tent_potential_k1,
    tent_potential_k2,
)
from rieszlab.measures import growth_constant


def test_tent_spec_and_profiles():
    with pytest.raises(ValueError):
        TentMeasureSpec(0)
    spec = TentMeasureSpec(6)
    assert spec.interval(1) == (0.25, 0.375, 0.5)
    assert spec.slope(1) == 8.0
    with pytest.raises(ValueError):
        spec.interval(7)

    # unit tent and its left derivative
    assert tent_f(0.0) == 1.0
    assert tent_f(1.0) == tent_f(-1.0) == 0.0
    assert tent_f_prime(0.0) == 1.0  # left derivative at the apex
    assert tent_f_prime(0.5) == -1.0
    assert tent_f_prime(-1.0) == 0.0
    assert tent_f_prime(1.0) == -1.0

    # g peaks at 1/n^2 at the interval centers and vanishes at endpoints
    for n in (1, 2, 5):
        a, c, b = spec.interval(n)
        assert tent_g(spec, c) == pytest.approx(1.0 / n**2, rel=1e-14)
        assert tent_g(spec, a) in (0.0, pytest.approx(0.0, abs=1e-16))
        assert tent_g(spec, b) == pytest.approx(0.0, abs=1e-16)
        assert tent_g_prime(spec, (a + c) / 2.0) == spec.slope(n)
        assert tent_g_prime(spec, (c + b) / 2.0) == -spec.slope(n)
    assert tent_g(spec, 0.6) == 0.0
    assert tent_g(spec, 2.0 ** (-8)) == 0.0  # below the truncation


def test_tent_potential_bounds():
    spec = TentMeasureSpec(12)
    xs = np.linspace(-1.5, 1.5, 101)
    ys = []
    for n in range(1, 13):
        a, c, b = spec.interval(n)
        ys.extend([a + 1e-12, (a + c) / 2, c, (c + b) / 2, b])
    ys = np.array(ys + list(np.linspace(-0.2, 0.7, 101)))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    k1 = tent_potential_k1(spec, X, Y)
    assert np.max(np.abs(k1)) <= 1.0
    # the other component blows up with the truncation depth
    k2 = tent_potential_k2(spec, X, Y)
    assert np.max(np.abs(k2)) == pytest.approx(spec.slope(12), rel=1e-12)
    sups = []
    for nmax in (4, 8, 12):
        s = TentMeasureSpec(nmax)
        a, c, b = s.interval(nmax)
        sups.append(abs(tent_potential_k2(s, 0.0, (a + c) / 2.0)))
        assert sups[-1] == pytest.approx(s.slope(nmax), rel=1e-12)
    assert sups[0] < sups[1] < sups[2]
    # off the support everything dies
    assert tent_potential_k1(spec, 1.2, 0.3) == 0.0
    assert tent_potential_k1(spec, 0.3, 0.8) == 0.0
    # calibration constant for cross-checks against the convolution
    assert tent_potential_k1(spec, -0.5, 0.375, calibrated=True) == \
        pytest.approx(2.0 * math.pi * tent_potential_k1(spec, -0.5, 0.375))


def test_tent_growth_ratio():
    spec = TentMeasureSpec(20)
    chk = tent_growth_ratio(spec, 1)
    assert chk.ratio == 10.0  # 2 * 8 * (1 - 3/8), exactly
    assert chk.mismatch < 1e-6
    # eventually increasing without bound; beyond n=8 it clears ratio(4)
    r4 = tent_growth_ratio(spec, 4).ratio
    for n in range(9, 21):
        chk = tent_growth_ratio(spec, n)
        assert chk.ratio > r4
        assert chk.mismatch < 1e-6
    assert tent_growth_ratio(spec, 15).ratio > 1e3
    with pytest.raises(ValueError):
        tent_growth_ratio(spec, 0)


def test_hilbert_basics():
    assert hilbert_logplus(0.0) == 0.0
    for x in (0.15, 0.45, 0.8, 1.7):
        assert hilbert_logplus(-x) == pytest.approx(-hilbert_logplus(x), abs=1e-10)
    # outside the support the substitution route must agree
    for x in (1.5, 2.0, 4.0):
        assert hilbert_logplus(x) == pytest.approx(
            hilbert_logplus_substitution(x), abs=1e-9)
    with pytest.warns(UserWarning):
        hilbert_logplus(1.0 + 1e-9)


def test_hilbert_fullline_constant():
    # symmetric-truncation full-line transform of log(1/|t|) is
    # (pi/2) sgn(x): the constant the quadrature actually verifies
    for x in (0.1, 0.3, 0.7, 0.95):
        assert hilbert_fullline_check(x) == pytest.approx(math.pi / 2.0, abs=1e-4)
        assert hilbert_fullline_check(-x) == pytest.approx(-math.pi / 2.0, abs=1e-4)
    with pytest.raises(ValueError):
        hilbert_fullline_check(1.5)


def test_hilbert_is_bounded():
    xs = np.concatenate([np.geomspace(1e-4, 0.999, 60), np.linspace(1.001, 10.0, 40)])
    vals = [hilbert_logplus(float(x)) for x in xs]
    assert max(abs(v) for v in vals) < 2.0  # empirically ~pi/2 at the jump


def test_log_potential():
    assert log_measure_potential(0.0, 0.5) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        log_measure_potential(0.3, 0.0)
    with pytest.warns(UserWarning):
        log_measure_potential(0.3, 1e-4)


def test_log_potential_two_routes():
    worst = 0.0
    for (x, y) in ((0.2, 0.3), (-0.6, -0.8), (1.5, 0.4), (0.99, 0.05), (-2.9, 1.9)):
        direct, poisson = log_measure_potential_routes(x, y)
        worst = max(worst, abs(direct - poisson))
    assert worst < 1e-4


def test_log_potential_grid_bounded_by_hilbert_sup():
    # Poisson averaging cannot exceed the boundary sup
    hsup = max(abs(hilbert_logplus(float(t)))
               for t in np.concatenate([np.geomspace(1e-3, 0.99, 25),
                                        np.linspace(1.01, 10.0, 25)]))
    grid_sup = 0.0
    for x in np.linspace(-3.0, 3.0, 13):
        for y in (-2.0, -0.5, -0.05, 0.05, 0.5, 2.0):
            grid_sup = max(grid_sup, abs(log_measure_potential(float(x), float(y))))
    assert grid_sup <= hsup + 1e-3


def test_log_growth_formula():
    assert log_measure_growth(1) == pytest.approx(1.0 + math.log(2.0), rel=1e-15)
    vals = [log_measure_growth(j) for j in range(1, 12)]
    assert all(b - a == pytest.approx(math.log(2.0)) for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        log_measure_growth(0)


def test_log_growth_matches_discretization():
    md = log_measure_discretized(4096)
    assert md.total_mass == pytest.approx(2.0, rel=1e-12)
    scan = growth_constant(md, 1.0, md.diameter() / 2.0**8 * 0.99)
    for j in range(1, 9):
        entry = scan.per_scale[j]
        formula = log_measure_growth(j)
        assert abs(entry.max_ratio - formula) <= 0.1 * formula
    with pytest.raises(ValueError):
        log_measure_discretized(7)


def test_density_and_spec():
    assert logplus_density(0.5) == pytest.approx(math.log(2.0))
    assert logplus_density(2.0) == 0.0
    assert logplus_density(-0.25) == pytest.approx(math.log(4.0))
    with pytest.raises(ValueError):
        LogMeasureSpec(quad_tol=-1.0)
