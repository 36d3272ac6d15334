"""Polynomial reach of compact sets from uniform samples.

The volume function ``V(r)`` of the ``r``-dilation of a compact set is a
polynomial of degree at most ``d`` on ``[0, R]`` for many sets; ``R`` is the
polynomial reach.  This package estimates ``R`` and the polynomial
coefficients from a finite sample via Monte Carlo volumes of dilated samples.
"""
from .errors import (
    DegenerateRegionError,
    InvalidConfigError,
    InvalidInputError,
    NumericalFailureError,
    OutOfRangeError,
    PolyReachError,
    UnsupportedRegionError,
)
from .geometry import (
    BoundingBox,
    Box,
    Disk,
    Frame,
    NeighborIndex,
    Pacman,
    PointCloud,
    Region,
    UnionOfSquares,
    boundary_gap,
    build_index,
    contains,
    distance_to_cloud,
    load_cloud_csv,
    region_from_config,
    sample_boundary,
    sample_uniform,
    save_cloud_csv,
)
from .harness import (
    ExperimentConfig,
    ReplicationRecord,
    ReplicationReport,
    config_from_mapping,
    parse_grid,
    parse_region,
    read_report,
    run_experiment,
    run_replication,
    summarize,
    table_configs,
    true_reach,
    write_report,
)
from .polyfit import (
    PolyFit,
    coefficient_distance,
    eval_poly,
    l2_project,
    norm_equivalence_constant,
    residual_norm,
)
from .reach import (
    ConsistentEstimate,
    ReachConfig,
    ReachEstimate,
    SkippedFit,
    estimate_coefficients,
    preset_grid,
    reach_consistent,
    reach_lower_bound,
    threshold_U,
)
from .volume import (
    DistanceTransform,
    VolumeCurve,
    empirical_volume_curve,
    exact_volume,
    exact_volume_curve,
    fine_grid,
    load_curve,
    mc_distance_transform,
    probe_box,
    save_curve,
)

__version__ = "0.1.0"
