"""mwlab: convex-body arithmetic, convex-set-valued maximal operators, and
matrix Muckenhoupt weight computations on dyadic grids."""

__version__ = "0.1.0"

from . import errors
from ._backend import backend_name
from .ap import (
    ApReport,
    a1k_constant,
    ap_constant,
    avg_norm,
    conjugate,
    duality_check,
    reducing_operator,
    scalar_oracle,
)
from .bodies import (
    ConvexBody,
    Ellipsoid,
    SupportSampled,
    SymPolygon,
    contains_scaled,
    gauge,
    hausdorff,
    hull_union,
    minkowski_sum,
    polar,
    promote,
    scale,
    segment,
    set_norm,
    support,
    unit_ball,
)
from .directions import DirectionGrid, canonical_grid
from .extrapolation import (
    ChainReport,
    ExtrapolationCase,
    build_hbar,
    extrapolation_demo,
    rescale_weight,
)
from .grid import (
    DyadicDomain,
    MatrixWeight,
    ScalarField,
    SetFunction,
    VectorField,
    constant_set_function,
    gen_power_weight,
    gen_rotating_weight,
    lift_vector_field,
    load_set_function,
    load_vector_field,
    load_weight,
    save_set_function,
    save_vector_field,
    save_weight,
    sign_flip_field,
)
from .john import JohnResult, john_ellipsoid
from .maximal import (
    MaximalOptions,
    aumann_average,
    christ_goldberg,
    combined_shifted_bound,
    dp_metric,
    dyadic_maximal,
    exhaust,
    interval_maximal_supports,
    lpk_norm,
    shifted_maximal,
    weak_level_measure,
)
from .norms import NormEvaluator, double_dual_geo, dual_norm, geo_mean_norm, matrix_norm
from .rdf import (
    FactorizationResult,
    IterationConfig,
    certify_bound,
    duo_rescale,
    factorize,
    iterate,
    iterate_scalar,
    op_T1,
    op_T2,
    reverse_factorize,
)
from .spd import geo_mean, jacobi_eigh, polar_decompose, sim_diag, spd_power, spd_sqrt
from .svg import emit_svg

__all__ = [name for name in dir() if not name.startswith("_")]
