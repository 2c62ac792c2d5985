"""Menger curvature and per-coordinate permutation sums for point triples.

All functions accept either single points (shape (n,)) or batched stacks of
triples (shape (..., n)) and broadcast; the scalar path and the batched path
run the exact same arithmetic, so their results agree bit for bit.

Coordinate indices in the public API are 1-based, matching
KernelSpec.component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import stable_norm


@dataclass
class TripleStats:
    """Per-triple summary: permutation sums, curvature, side data.

    p[i-1] is the permutation sum for coordinate i at the requested alpha
    (the alpha=1 values coincide with the curvature-style sums).  curvature
    is present only in the plane.  m[i-1] is the largest coordinate-i spread
    over the three pairs, L the longest side.
    """

    alpha: float
    p: np.ndarray
    curvature: float | None
    L: float
    m: np.ndarray
    sides: tuple[float, float, float]


def _triple_vectors(x1, x2, x3, validate=True):
    """Difference vectors and norms; single triples are lifted to one-row
    batches so the scalar and batched paths run identical array arithmetic
    (python-float pow rounds differently from the numpy ufunc)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    single = x1.ndim == 1 and x2.ndim == 1 and x3.ndim == 1
    if single:
        x1, x2, x3 = x1[None, :], x2[None, :], x3[None, :]
    a = x2 - x1
    b = x3 - x2
    ab = x3 - x1
    na = stable_norm(a)
    nb = stable_norm(b)
    nab = stable_norm(ab)
    if validate and (np.any(np.asarray(na) == 0.0) or np.any(np.asarray(nb) == 0.0)
                     or np.any(np.asarray(nab) == 0.0)):
        raise ValueError("triple has coincident points")
    return single, a, b, ab, na, nb, nab


def menger_curvature(x1, x2, x3, validate=True):
    """Inverse circumradius 4*Area/(product of side lengths), points in R^2.

    Collinear triples give 0; coincident points are a domain error.
    """
    single, a, b, _, na, nb, nab = _triple_vectors(x1, x2, x3, validate)
    if np.shape(a)[-1] != 2:
        raise ValueError("menger_curvature is defined for plane triples only")
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    c = 2.0 * np.abs(cross) / ((na * nb) * nab)
    return float(c[0]) if single else c


def perm_sum(i, x1, x2, x3, validate=True):
    """Permutation sum p_i at homogeneity -1, via the sum-of-squares form.

    With a = x2-x1 and b = x3-x2 this is
    sum_{j != i} (a_i b_j - b_i a_j)^2 / (|a|^2 |b|^2 |a+b|^2),
    which is non-negative by construction and free of the catastrophic
    cancellation the raw three-permutation sum suffers near collinearity.
    """
    single, a, b, _, na, nb, nab = _triple_vectors(x1, x2, x3, validate)
    n = np.shape(a)[-1]
    if not 1 <= i <= n:
        raise ValueError(f"coordinate {i} outside 1..{n}")
    ai = a[..., i - 1]
    bi = b[..., i - 1]
    num = None
    for j in range(n):
        if j == i - 1:
            continue
        t = ai * b[..., j] - bi * a[..., j]
        num = t * t if num is None else num + t * t
    den = ((na * na) * (nb * nb)) * (nab * nab)
    out = num / den
    return float(out[0]) if single else out


def _p_alpha_from_powers(ai, bi, sa, sb, sab):
    # shared expression tree for scalar and batched callers (bit-identical)
    num = (ai * ai) * sb + (bi * bi) * sa + (ai * bi) * ((sb + sa) - sab)
    return num / ((sa * sb) * sab)


def perm_sum_alpha(alpha, i, x1, x2, x3, validate=True):
    """Permutation sum p_{alpha,i} for homogeneity -alpha, 0 < alpha <= 1.

    Closed form with a = x2-x1, b = x3-x2:
    (a_i^2 |b|^{1+a} + b_i^2 |a|^{1+a}
       + a_i b_i (|b|^{1+a} + |a|^{1+a} - |a+b|^{1+a}))
    / (|a|^{1+a} |b|^{1+a} |a+b|^{1+a}).

    Vanishes exactly when the three i-th coordinates coincide.  Positivity
    outside that degenerate situation holds for this alpha range; it is not
    guaranteed for alpha > 1, hence the parameter error.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    single, a, b, _, na, nb, nab = _triple_vectors(x1, x2, x3, validate)
    n = np.shape(a)[-1]
    if not 1 <= i <= n:
        raise ValueError(f"coordinate {i} outside 1..{n}")
    e = 1.0 + alpha
    out = _p_alpha_from_powers(a[..., i - 1], b[..., i - 1], na**e, nb**e, nab**e)
    return float(out[0]) if single else out


def triple_stats(alpha, x1, x2, x3) -> TripleStats:
    """All per-coordinate permutation sums plus side geometry for one triple."""
    single, a, b, ab, na, nb, nab = _triple_vectors(x1, x2, x3)
    if not single:
        raise ValueError("triple_stats takes a single triple")
    a, b, ab = a[0], b[0], ab[0]
    na, nb, nab = float(na[0]), float(nb[0]), float(nab[0])
    n = a.shape[-1]
    if alpha == 1.0:
        p = np.array([perm_sum(i, x1, x2, x3) for i in range(1, n + 1)])
    else:
        p = np.array([perm_sum_alpha(alpha, i, x1, x2, x3) for i in range(1, n + 1)])
    m = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.abs(ab))
    sides = (float(na), float(nb), float(nab))
    curv = menger_curvature(x1, x2, x3) if n == 2 else None
    return TripleStats(alpha=alpha, p=p, curvature=curv, L=max(sides), m=m, sides=sides)
