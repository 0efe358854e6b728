"""Certified Kobayashi metric, distance and almost-geodesic tools."""
from .charts import Chart, model_domain, normalizing_chart
from .geodesics import (KAPPA_GRID, AlmostGeodesicReport, geodesic_path, inward_normal_point,
                        verify_almost_geodesic, visibility_probe)
from .metric import (DISTANCE_DEFAULTS, METRIC_DEFAULTS, infinitesimal_metric, kobayashi_distance,
                     line_disc_metric_upper, metric_bracket_fast, path_length, refine_path)
from .types import AnalyticDisc, MetricBracket, PathCurve

__all__ = [
    "AlmostGeodesicReport", "AnalyticDisc", "Chart", "DISTANCE_DEFAULTS", "KAPPA_GRID", "METRIC_DEFAULTS",
    "MetricBracket", "PathCurve", "geodesic_path", "infinitesimal_metric", "inward_normal_point",
    "kobayashi_distance", "line_disc_metric_upper", "metric_bracket_fast", "model_domain", "normalizing_chart",
    "path_length", "refine_path", "verify_almost_geodesic", "visibility_probe",
]
