"""Maximal operators and smoothness norms on finite metric measure spaces.

The package realizes, on finite spaces, the objects that smoothing
estimates for fractional maximal operators are built from: ball queries
and geometric constants, bounded-overlap coverings with Lipschitz
partitions of unity, standard and discrete fractional maximal operators,
(fractional) gradients, Hajlasz/Besov/Triebel-Lizorkin norms computed as
convex programs, and empirical verification of the resulting

    source-norm  <=  C * target-norm

inequalities by hunting the smallest admissible constants over a
deterministic corpus.
"""

from __future__ import annotations

from .corpus import (
    BUILTIN_CORPORA,
    Corpus,
    CorpusInstance,
    build_corpus,
    builtin_corpus,
    bump_function,
    constant_function,
    generate_function,
    generate_space,
    grid_space,
    indicator_function,
    interval_space,
    linear_function,
    load_corpus,
    path_space,
    random_cloud_space,
    random_function,
    read_corpus_dir,
    read_function_csv,
    sierpinski_graph_space,
    write_corpus,
)
from .covering import (
    Cover,
    PartitionOfUnity,
    build_cover,
    build_partition_of_unity,
    overlap_count,
    partition_lipschitz_ratio,
)
from .errors import (
    AnnulusRangeError,
    EmptyBallError,
    FracmaxError,
    InputError,
    ParameterWindowError,
    SolverError,
    SpaceFormatError,
)
from .gradients import (
    CheckResult,
    GradientSequence,
    SmoothnessParams,
    annulus_index,
    annulus_index_matrix,
    canonical_fractional_gradient,
    canonical_gradient,
    default_sequence_params,
    is_fractional_gradient,
    is_hajlasz_gradient,
    mixed_norm,
    space_level_range,
)
from .maximal import (
    BallAverager,
    ComparabilityReport,
    ScaleFamily,
    build_scale_family,
    comparability_report,
    discrete_convolution,
    discrete_fractional_maximal,
    fractional_maximal,
    standard_radius_set,
)
from .norms import (
    NormResult,
    SequenceNormResult,
    besov_norm,
    feasibility_tol,
    hajlasz_norm,
    objective_rel_tol,
    optimal_gradient,
    pair_constraints,
    triebel_lizorkin_norm,
)
from .space import (
    GeometryConstants,
    MetricMeasureSpace,
    audit_metric,
    estimate_doubling_constant,
    estimate_geometry,
    estimate_lower_mass_constant,
    homogeneous_dimension,
    load_space,
    lp_norm,
    radius_scale_set,
    save_space,
    space_from_coords,
    space_from_dict,
    space_to_dict,
)
from .verify import (
    EXPERIMENTS,
    VerificationReport,
    boundedness_experiment,
    check_fractional_poincare,
    check_poincare,
    check_sobolev_poincare,
    fefferman_stein_check,
    run_boundedness_suite,
    run_fefferman_stein_suite,
    run_poincare_suite,
    run_scalar_transfer_suite,
    run_sequence_transfer_suite,
    scalar_transfer,
    sequence_transfer,
    write_boundedness_tables,
    write_reports,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
