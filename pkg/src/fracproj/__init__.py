"""Exact desk-scale constructions for projections of fractal sets.

Points live on fixed ``b``-adic grids as integer numerators, so covering
numbers, sumsets and measure ratios are all computed without rounding.
"""
from .covering import (
    CoverReport,
    InclusionReport,
    build_H,
    build_Hprime,
    cover_count,
    cover_report,
    covering_target,
    dyadic_cover_count,
    inclusion_distance,
    madic_cover_count,
    neighborhood_cell_count,
    product_set,
    remainder,
    sumset,
    sumset_bound,
    sumset_trend,
    union_sumset,
)
from .errors import *  # noqa: F401,F403
from .fractal import (
    DigitFractal,
    DiscreteSet,
    build_A,
    build_B,
    build_corollary_set,
    build_digit_fractal,
    build_Theta,
    dump_set,
    full_grid,
    load_set,
)
from .measure import (
    DiscreteMeasure,
    ahlfors_constant,
    build_prop23_measure,
    equal_weight_ssm,
    frostman_constant,
    rescale_nu,
)
from .params import PaperParams, ToyConfig, admissible_delta, derive_epsilon, structural_config
from .product import (
    ProductSet,
    StackReport,
    ahlfors1_check,
    build_K,
    build_mu,
    projection_sweep,
    rectangle_masses,
    rescaled_theta,
    stack_diagnostics,
)
from .radix import RadixBase, Scale, ScaledInt, Surd, make_base
from .regularity import regularity_constant, uniformity_check, verify_lemma27

__version__ = "0.1.0"
