"""freeball: fixed-point structure of contractive self-maps of the matrix ball.

The objects live at every matrix size at once: points are d-tuples of n x n
complex matrices with row norm below one, maps respect direct sums and
similarities, and the central question is where such a map fixes more than
the origin. The package computes the fixed-point subspace from first-order
data, certifies it by sampling and Newton search across levels, and exposes
the supporting machinery (Perron eigendata of the associated completely
positive map, genericity/irreducibility analysis, free polynomial varieties).
"""

from .config import DEFAULT_TOL, ToleranceConfig, child_rng
from .cpmaps import (
    PerronData,
    apply_cp,
    coisometry_normalizer,
    perron_pair,
    spectral_radius,
    superoperator_matrix,
)
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    DomainError,
    FreeballError,
    NotGenericError,
    NumericalFailureError,
    ParseError,
)
from .fixedpoints import (
    FIXED_THRESHOLD,
    NONFIXED_THRESHOLD,
    FixedSubspaceReport,
    NormalCompression,
    caratheodory_distance0,
    find_fixed_points,
    fixed_subspace_level1,
    geodesic_from_origin,
    jordan_multiplicity_check,
    lift_subspace,
    normal_compression,
    normalize_at_scalar_fixed_point,
    verify_fixed_theorem,
)
from .maps import (
    ComposedMap,
    MobiusMap,
    NcMap,
    PolynomialMap,
    ScalingMap,
    compose,
    derivative_superop,
    derivative_superop_columns,
    diff_diff,
    eval_map,
    finite_difference_derivative,
    identity_map,
    make_test_map,
    mobius,
    parse_map_spec,
)
from .points import (
    MatrixTuple,
    TangentTuple,
    conjugate,
    direct_sum,
    in_ball,
    is_coisometry_direction,
    random_ball_point,
    random_tuple,
    row_norm,
    transpose_tuple,
)
from .polynomials import (
    FreePolynomial,
    eval_poly,
    eval_word,
    format_polynomial,
    parse_polynomial,
    szego_kernel_truncated,
)
from .structure import (
    JHDecomposition,
    LinearRelations,
    MatSpanSubspace,
    in_mat_span,
    invariant_subspace_witness,
    is_generic,
    jordan_holder,
    linear_relations,
    mat_span,
    reassemble,
    subdiagonal_defect,
)
from .varieties import (
    ScalarPointSearch,
    VarietyReport,
    VarietySpec,
    builtin_fixture,
    builtin_variety,
    on_variety,
    sample_level_n,
    scalar_points,
    variety_hypothesis_report,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "FIXED_THRESHOLD",
    "NONFIXED_THRESHOLD",
    "ComposedMap",
    "ConvergenceError",
    "DimensionMismatchError",
    "DomainError",
    "FixedSubspaceReport",
    "FreePolynomial",
    "FreeballError",
    "JHDecomposition",
    "LinearRelations",
    "MatSpanSubspace",
    "MatrixTuple",
    "MobiusMap",
    "NcMap",
    "NormalCompression",
    "NotGenericError",
    "NumericalFailureError",
    "ParseError",
    "PerronData",
    "PolynomialMap",
    "ScalarPointSearch",
    "ScalingMap",
    "TangentTuple",
    "ToleranceConfig",
    "VarietyReport",
    "VarietySpec",
    "apply_cp",
    "builtin_fixture",
    "builtin_variety",
    "caratheodory_distance0",
    "child_rng",
    "coisometry_normalizer",
    "compose",
    "conjugate",
    "derivative_superop",
    "derivative_superop_columns",
    "diff_diff",
    "direct_sum",
    "eval_map",
    "eval_poly",
    "eval_word",
    "find_fixed_points",
    "finite_difference_derivative",
    "fixed_subspace_level1",
    "format_polynomial",
    "geodesic_from_origin",
    "identity_map",
    "in_ball",
    "in_mat_span",
    "invariant_subspace_witness",
    "is_coisometry_direction",
    "is_generic",
    "jordan_holder",
    "jordan_multiplicity_check",
    "lift_subspace",
    "linear_relations",
    "make_test_map",
    "mat_span",
    "mobius",
    "normal_compression",
    "normalize_at_scalar_fixed_point",
    "on_variety",
    "parse_map_spec",
    "parse_polynomial",
    "perron_pair",
    "random_ball_point",
    "random_tuple",
    "reassemble",
    "row_norm",
    "sample_level_n",
    "scalar_points",
    "spectral_radius",
    "subdiagonal_defect",
    "superoperator_matrix",
    "szego_kernel_truncated",
    "transpose_tuple",
    "variety_hypothesis_report",
    "verify_fixed_theorem",
]
