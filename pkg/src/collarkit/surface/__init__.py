"""Variable-curvature half-cylinders: metrics, curvature, geodesics and boundary smoothing."""

from .geodesic import (
    Connection,
    GeodesicPath,
    MeasuredTriangle,
    connect_batch,
    descent_direction,
    descent_trace,
    direction_of,
    geodesic_shoot,
    minimal_connection,
    minimal_connections,
    normal_connections,
    sample_triangle,
    sample_triangles,
    shoot_batch,
)
from .metric import (
    Bump,
    CurvatureBound,
    FermiMetric,
    MetricJet,
    bump_metric,
    bump_suite,
    cactus_metric,
    cactus_suite,
    collar_suite,
    constant_curvature,
    curvature_lower_bound,
    flat_cylinder,
    gauss_curvature,
    gentle_suite,
    presets,
    waisted_metric,
)
from .smoothing import SmoothedMetric, SmoothingParams, SmoothingReport, chi, smoothing_transform
