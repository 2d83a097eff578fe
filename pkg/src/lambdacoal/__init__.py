"""Multiple-merger coalescents with freezing mutations.

The package computes exact allelic sampling distributions by recursion,
simulates the same distributions three independent ways (coalescent
jump chain, composition-driven chain, stationary-population lookdown),
builds the stationary population itself from a marked subordinator
window, and cross-validates everything with a Monte Carlo harness.
"""

from .errors import (
    BeyondWindowError,
    DegenerateMeasureError,
    DustConditionError,
    InfiniteActivityError,
    LambdaCoalError,
    MeasureSpecError,
    NonIntegrableError,
    PartitionCapError,
    PopulationSupportError,
    StuckChainError,
    WindowExhaustionError,
)
from .measures import (
    AtomicMeasure,
    BetaMeasure,
    DensityTableMeasure,
    FirstPartLaw,
    RateTable,
    build_rate_table,
    choose_truncation,
    coalescence_rate,
    dust_integral,
    first_part_law,
    first_part_laws_upto,
    first_part_weight,
    litter_intensity_tail,
    measure_descriptor,
    parse_measure,
    require_dust_condition,
    require_population_support,
    sample_jump_sizes,
    single_ball_integral,
    total_mass,
)
from .sampling_formula import (
    DEFAULT_PARTITION_CAP,
    PartitionVector,
    SamplingDistribution,
    enumerate_partition_vectors,
    ewens,
    solve,
    solve_exact,
)
from .paintbox import (
    MassPartition,
    SetPartition,
    empirical_block_frequencies,
    paint_partition,
)
from .coalescent import (
    FrozenState,
    simulate_coalescent_path,
    simulate_frozen_coalescent,
    simulate_frozen_path,
)
from .subordinator import (
    Composition,
    CompositionSample,
    HitResult,
    LitterPoint,
    SubordinatorWindow,
    composition_from_window,
    default_window_horizon,
    delete_random_ball,
    sample_composition_detailed,
    sample_window,
    sequential_composition,
    window_from_points,
)
from .population import (
    LitterHistory,
    PopulationMeasure,
    cutoff_deviation,
    forward_simulate,
    litter_size_at,
    rho_state,
    sample_family_partition_chain,
    sample_family_partition_set,
)
from .validation import (
    ValidationCase,
    ValidationReport,
    chi_square_gof,
    chi_square_two_sample,
    default_plan,
    load_plan,
    reports_to_csv,
    reports_to_json,
    run_validation,
    total_variation,
)
from .streams import derive_rng

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure",
    "BetaMeasure",
    "BeyondWindowError",
    "Composition",
    "CompositionSample",
    "DEFAULT_PARTITION_CAP",
    "DegenerateMeasureError",
    "DensityTableMeasure",
    "DustConditionError",
    "FirstPartLaw",
    "FrozenState",
    "HitResult",
    "InfiniteActivityError",
    "LambdaCoalError",
    "LitterHistory",
    "LitterPoint",
    "MassPartition",
    "MeasureSpecError",
    "NonIntegrableError",
    "PartitionCapError",
    "PartitionVector",
    "PopulationMeasure",
    "PopulationSupportError",
    "RateTable",
    "SamplingDistribution",
    "SetPartition",
    "StuckChainError",
    "SubordinatorWindow",
    "ValidationCase",
    "ValidationReport",
    "WindowExhaustionError",
    "build_rate_table",
    "chi_square_gof",
    "chi_square_two_sample",
    "choose_truncation",
    "coalescence_rate",
    "composition_from_window",
    "cutoff_deviation",
    "default_plan",
    "default_window_horizon",
    "delete_random_ball",
    "derive_rng",
    "dust_integral",
    "empirical_block_frequencies",
    "enumerate_partition_vectors",
    "ewens",
    "first_part_law",
    "first_part_laws_upto",
    "first_part_weight",
    "forward_simulate",
    "litter_intensity_tail",
    "litter_size_at",
    "load_plan",
    "measure_descriptor",
    "paint_partition",
    "parse_measure",
    "reports_to_csv",
    "reports_to_json",
    "require_dust_condition",
    "require_population_support",
    "rho_state",
    "run_validation",
    "sample_composition_detailed",
    "sample_family_partition_chain",
    "sample_family_partition_set",
    "sample_jump_sizes",
    "sample_window",
    "sequential_composition",
    "simulate_coalescent_path",
    "simulate_frozen_coalescent",
    "simulate_frozen_path",
    "single_ball_integral",
    "solve",
    "solve_exact",
    "total_mass",
    "total_variation",
    "window_from_points",
]
