"""
Geometry - ABC Lab Shared
Superfícies, projeção π, métricas e amostragem de Lebesgue
"""

from .metrics import (
    ANNULUS_HEIGHT_SCALE,
    LATITUDE_SEPARATION_CONSTANT,
    LONGITUDE_HOLDER_CONSTANT,
    SURFACE_DIAMETER,
    dist,
    pairwise_distances,
    pointwise_distances,
    tolerance_scale,
    torus_distance,
)
from .projection import SINGULAR_TOLERANCE, project_pi, project_pi_inverse, singular_mask, to_chart, to_surface
from .sampling import (
    cell_radius,
    chart_cell_index,
    chart_grid,
    chart_sample,
    grid_cell_index,
    grid_radius,
    grid_shape,
    in_region_M_eta,
    lebesgue_grid,
    lebesgue_sample,
    midpoint_grid,
    mu_y_measure,
    region_mask,
    stream_rng,
)

__all__ = [
    "ANNULUS_HEIGHT_SCALE",
    "LATITUDE_SEPARATION_CONSTANT",
    "LONGITUDE_HOLDER_CONSTANT",
    "SURFACE_DIAMETER",
    "SINGULAR_TOLERANCE",
    "dist",
    "pairwise_distances",
    "pointwise_distances",
    "tolerance_scale",
    "torus_distance",
    "project_pi",
    "project_pi_inverse",
    "singular_mask",
    "to_chart",
    "to_surface",
    "cell_radius",
    "chart_cell_index",
    "chart_grid",
    "chart_sample",
    "grid_cell_index",
    "grid_radius",
    "grid_shape",
    "in_region_M_eta",
    "lebesgue_grid",
    "lebesgue_sample",
    "midpoint_grid",
    "mu_y_measure",
    "region_mask",
    "stream_rng",
]
