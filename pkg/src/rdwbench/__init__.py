"""Deterministic 2D benchmark for redirected-walking controllers.

Simulates a virtual user walking random waypoint paths while a
controller (alignment-based ARC, steer-to-center, or potential-field)
redirects the physical counterpart inside a smaller tracked space;
reports resets, alignment, curvature usage, and environment-complexity
scores with robust paired statistics.
"""

from .alignment import (
    ProximityTriple,
    SystemState,
    UserState,
    alignment_score,
    proximity_distance,
    proximity_sum,
    sample_state,
)
from .campaign import CampaignConfig, CampaignResult, path_seed, run_campaign
from .complexity import ComplexityReport, complexity_ratio, environment_complexity
from .controllers import (
    GainCommand,
    ControllerKind,
    Phase,
    ResetCommand,
    TurnDirection,
    MAX_CURVATURE,
    MAX_ROTATION_GAIN,
    MAX_TRANSLATION_GAIN,
    MIN_ROTATION_GAIN,
    MIN_TRANSLATION_GAIN,
    apf_step,
    arc_curvature,
    arc_reset,
    arc_rotation_gain,
    arc_translation_gain,
    baseline_reset,
    make_controller,
    s2c_step,
)
from .environments import (
    BUILTIN_PAIRS,
    Environment,
    EnvironmentPair,
    PairValidationError,
    builtin_pair,
    draw_physical_start,
    load_pair,
    pair_to_json,
    resolve_pair,
)
from .geometry import (
    FreeSpaceError,
    Polygon,
    Ray,
    clearance,
    nearest_obstacle_point,
    point_in_free_space,
    ray_distance,
    segment_clearance,
)
from .metrics import (
    CURVATURE_BIN_EDGES,
    HeatMap,
    TrialMetrics,
    compute_trial_metrics,
    curvature_histogram,
    physical_heatmap,
    write_curvature_histogram_csv,
    write_heatmap_csv,
    write_heatmap_pgm,
)
from .simulation import (
    PathGenerationError,
    PathSpec,
    SimConfig,
    TrialRecord,
    TrialStalledError,
    generate_path,
    read_trial_csv,
    run_trial,
    write_trial_csv,
)
from .stats import (
    ContrastResult,
    bootstrap_contrast,
    quartiles,
    replace_outliers,
    robust_contrast,
    trimmed_mean,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_PAIRS", "CURVATURE_BIN_EDGES",
    "CampaignConfig", "CampaignResult", "ComplexityReport",
    "ContrastResult", "ControllerKind", "Environment", "EnvironmentPair",
    "FreeSpaceError",
    "GainCommand", "HeatMap", "MAX_CURVATURE", "MAX_ROTATION_GAIN",
    "MAX_TRANSLATION_GAIN", "MIN_ROTATION_GAIN", "MIN_TRANSLATION_GAIN",
    "PairValidationError", "PathGenerationError", "PathSpec", "Phase",
    "Polygon", "ProximityTriple", "Ray", "ResetCommand", "SimConfig",
    "SystemState", "TrialMetrics", "TrialRecord", "TrialStalledError",
    "TurnDirection",
    "UserState", "alignment_score", "apf_step", "arc_curvature", "arc_reset",
    "arc_rotation_gain", "arc_translation_gain", "baseline_reset",
    "bootstrap_contrast", "builtin_pair", "clearance", "complexity_ratio",
    "compute_trial_metrics", "curvature_histogram", "draw_physical_start",
    "environment_complexity", "generate_path", "load_pair", "make_controller",
    "nearest_obstacle_point", "pair_to_json", "path_seed",
    "physical_heatmap", "point_in_free_space", "proximity_distance",
    "proximity_sum", "quartiles", "ray_distance", "read_trial_csv",
    "replace_outliers", "resolve_pair", "robust_contrast", "run_campaign",
    "run_trial", "sample_state", "segment_clearance", "trimmed_mean",
    "write_curvature_histogram_csv", "write_heatmap_csv", "write_heatmap_pgm",
    "write_trial_csv",
]
