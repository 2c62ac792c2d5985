"""Scalar and vector Riesz kernels x_i/|x|^(1+alpha) and x/|x|^(1+alpha)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VECTOR = "vector"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel of homogeneity -alpha in R^dim.

    component is a 1-based coordinate index for the scalar kernel
    x_i/|x|^(1+alpha), or the marker "vector" for the full field
    x/|x|^(1+alpha).
    """

    dim: int
    alpha: float
    component: int | str = VECTOR

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if not (0.0 < self.alpha < self.dim):
            raise ValueError(f"alpha must lie in (0, dim), got {self.alpha}")
        if self.component != VECTOR:
            if not isinstance(self.component, (int, np.integer)):
                raise ValueError(f"component must be 'vector' or an index, got {self.component!r}")
            if not (1 <= self.component <= self.dim):
                raise ValueError(f"component index {self.component} outside 1..{self.dim}")

    @property
    def is_vector(self) -> bool:
        return self.component == VECTOR


def stable_norm(d):
    """Euclidean norm over the last axis, scaled hypot-style so that extreme
    coordinate magnitudes neither overflow nor underflow."""
    d = np.asarray(d, dtype=float)
    m = np.max(np.abs(d), axis=-1, keepdims=True)
    safe = np.where(m > 0.0, m, 1.0)
    r = d / safe
    # explicit left fold over coordinates: deterministic summation order
    s = r[..., 0] * r[..., 0]
    for k in range(1, d.shape[-1]):
        s = s + r[..., k] * r[..., k]
    out = safe[..., 0] * np.sqrt(s)
    if out.ndim == 0:
        return float(out)
    return out


def kernel_factor(norms, alpha):
    """|x|^-alpha: kernel values are (x_i/|x|) * kernel_factor, keeping the
    unit direction separate so extreme norms neither overflow nor underflow."""
    return np.asarray(norms, dtype=float) ** (-alpha)


def eval_scalar(spec: KernelSpec, x) -> float:
    """Evaluate x_i/|x|^(1+alpha) at a nonzero point x."""
    if spec.is_vector:
        raise ValueError("eval_scalar needs a coordinate component, not 'vector'")
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise ValueError(f"point shape {x.shape} does not match dim {spec.dim}")
    r = stable_norm(x)
    if r == 0.0:
        raise ValueError("kernel singularity: cannot evaluate at the origin")
    return float((x[spec.component - 1] / r) * kernel_factor(r, spec.alpha))


def eval_vector(spec: KernelSpec, x) -> np.ndarray:
    """Evaluate the full field x/|x|^(1+alpha) at a nonzero point x.

    Slot i equals eval_scalar with component i: both scale the unit
    direction by the same factor |x|^-alpha.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise ValueError(f"point shape {x.shape} does not match dim {spec.dim}")
    r = stable_norm(x)
    if r == 0.0:
        raise ValueError("kernel singularity: cannot evaluate at the origin")
    return (x / r) * kernel_factor(r, spec.alpha)


def scalar_values(diffs, alpha, comp):
    """Vectorized x_i/|x|^(1+alpha) over an array of difference vectors.

    diffs has shape (..., n); comp is 1-based. Rows equal to zero produce
    inf/nan and are the caller's responsibility (truncation radii must
    exclude them).
    """
    diffs = np.asarray(diffs, dtype=float)
    r = stable_norm(diffs)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (diffs[..., comp - 1] / r) * kernel_factor(r, alpha)


def vector_values(diffs, alpha):
    """Vectorized x/|x|^(1+alpha) over an array of difference vectors."""
    diffs = np.asarray(diffs, dtype=float)
    r = stable_norm(diffs)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (diffs / r[..., None]) * kernel_factor(r, alpha)[..., None]
