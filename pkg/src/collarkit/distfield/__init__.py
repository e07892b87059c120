"""Distance fields to the boundary geodesic and the level-set analysis built on them."""

from .eikonal import DistanceField, solve_eikonal
from .export import CSV_COLUMNS, check_line, curves_csv, mask_pgm, report_lines, sweep_svg
from .levels import (
    COMPACT,
    OMEGA,
    LevelCurve,
    count_components,
    infinite_component,
    level_curves,
    omega_curve,
    periodic_label,
    polyline_self_intersections,
)
from .loops import HomotopicLoopResult, shortest_homotopic_loop
from .regularity import (
    LipschitzReport,
    Quadrilateral,
    QuadrilateralReport,
    TangentReport,
    escape_height,
    lipschitz_check,
    open_quadrilateral_check,
    quadrilateral,
)
from .topology import (
    Arm,
    ArmDecomposition,
    CollarWidth,
    ThinCylinderReport,
    ThinReport,
    bottleneck,
    classify_types,
    lambda_thin,
    measured_collar_width,
    sweep_levels,
    thin_cylinder_check,
)
