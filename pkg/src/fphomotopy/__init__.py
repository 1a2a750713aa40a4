"""Fiber product homotopy solver for multiparameter eigenvalue problems."""

from .core import DiagnosticsRecord, Eigenpair, FiberPoint, MepInstance, decoupled_check, mep_residual
from .problems import load_instance, qmep_linearize, random_mep, random_qmep, save_instance
from .solver import SolveOptions, SolveReport, solve
from .tracker import PathStatus, TrackerConfig

__all__ = [
    "DiagnosticsRecord",
    "Eigenpair",
    "FiberPoint",
    "MepInstance",
    "PathStatus",
    "SolveOptions",
    "SolveReport",
    "TrackerConfig",
    "decoupled_check",
    "load_instance",
    "mep_residual",
    "qmep_linearize",
    "random_mep",
    "random_qmep",
    "save_instance",
    "solve",
]

__version__ = "0.1.0"
