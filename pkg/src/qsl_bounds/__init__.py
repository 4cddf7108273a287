"""Analytic quantum speed-limit bounds for bilinear control systems, with GRAPE cross-checks."""

from .grape import GrapeConfig, estimate_qsl, haar_random_su, optimize
from .lie_engine import ControlSystem, GroupKind, control_algebra, dynamical_algebra, is_controllable
from .speed_limit import BoundReport, qsl_bound
from .tightness import classify_tightness

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "ControlSystem",
    "GrapeConfig",
    "GroupKind",
    "classify_tightness",
    "control_algebra",
    "dynamical_algebra",
    "estimate_qsl",
    "haar_random_su",
    "is_controllable",
    "optimize",
    "qsl_bound",
]
