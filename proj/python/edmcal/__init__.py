"""Sensor-array geometry recovery from partial pairwise distances.

Thin Python surface over the C++ core: distance-matrix construction,
noise/masking simulation, low-rank completion with distance-cone projection,
classical baselines, diffuse-field coherence fitting, and the error-bound
helpers.
"""

from ._core import (
    add_noise,
    build_observed_from_coherence,
    build_squared_distances,
    cadzow_project,
    calibration_error,
    default_frequency_grid,
    double_center,
    fit_distance,
    incoherence,
    layout_distributed_15,
    layout_distributed_18,
    layout_planar_11,
    layout_planar_12,
    mds_localize,
    mds_map,
    observe,
    position_error,
    procrustes_align,
    q_bounds,
    sample_disc_positions,
    shortest_path_complete,
    solve,
    sstress_solve,
    synthesize_coherence,
    theorem1_rhs,
)

__all__ = [
    "add_noise",
    "build_observed_from_coherence",
    "build_squared_distances",
    "cadzow_project",
    "calibration_error",
    "default_frequency_grid",
    "double_center",
    "fit_distance",
    "incoherence",
    "layout_distributed_15",
    "layout_distributed_18",
    "layout_planar_11",
    "layout_planar_12",
    "mds_localize",
    "mds_map",
    "observe",
    "position_error",
    "procrustes_align",
    "q_bounds",
    "sample_disc_positions",
    "shortest_path_complete",
    "solve",
    "sstress_solve",
    "synthesize_coherence",
    "theorem1_rhs",
]
