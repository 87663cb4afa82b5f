"""Lemniscates of the Strebel differential -(sum w_i/(z - a_i))^2 dz^2 and their fingerprints."""

from .errors import ConfigError, NumericalError, StrebelError
from .qd_core import QuadDifferential, critical_set, is_critical_graph_connected, make_differential
from .tracer import ClosedCurve, classify, critical_graph, find_components, trace_level_curve
from .confmap import DiskMap, exterior_map, interior_map, map_pair
from .fingerprint import (
    BlaschkeProduct,
    Fingerprint,
    align_rotation,
    fingerprint_component,
    numeric_fingerprint,
    winding,
)

__all__ = [
    "BlaschkeProduct", "ClosedCurve", "ConfigError", "DiskMap", "Fingerprint", "NumericalError",
    "QuadDifferential", "StrebelError", "align_rotation", "classify", "critical_graph",
    "critical_set", "exterior_map", "find_components", "fingerprint_component", "interior_map",
    "is_critical_graph_connected", "make_differential", "map_pair", "numeric_fingerprint",
    "trace_level_curve", "winding",
]
