"""Numerical laboratory for scalar and vector Riesz kernels of homogeneity -alpha.

Core pieces: kernel evaluation, Menger-curvature style permutation sums for
point triples, discrete measures with generators (Cantor sets, grids, products),
truncated transforms and their L2 energies, LP estimation of positive
capacities under sup-norm potential constraints, and closed-form
counterexample measures with bounded scalar potential but unbounded growth.
"""

from .kernels import KernelSpec, eval_scalar, eval_vector
from .symmetrization import (
    TripleStats,
    menger_curvature,
    perm_sum,
    perm_sum_alpha,
    triple_stats,
)
from .measures import (
    DiscreteMeasure,
    GrowthReport,
    cantor_corner_quarter,
    cantor_linear,
    grid_on_disk,
    grid_on_segment,
    grid_on_square_boundary,
    growth_constant,
    product_with_interval,
)
from .transforms import (
    EnergyReport,
    PlateauBump,
    energy_identity,
    localization_probe,
    r3_flatness,
    recover_pairing,
    truncated_transform,
    vector_energy,
)
from .capacity import (
    CapacityProblem,
    CapacitySolution,
    alpha_separation_experiment,
    build_problem,
    comparability_experiment,
    gamma_hat_plus,
    gamma_plus,
    named_geometry,
    solve,
)

__version__ = "0.1.0"
