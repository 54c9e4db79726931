"""Numerical diagnostics for splash formation in two-fluid vortex-sheet interfaces."""
from .dynamics import FluidParams, SheetState
from .geometry import PeriodicCurve, chord_arc_F, chord_arc_min
from .kernels import BulkVorticity, birkhoff_rott, bulk_biot_savart, interface_velocity
from .splash import SplashFrame, build_splash_frame, find_closest_pair

__version__ = "0.1.0"

__all__ = [
    "BulkVorticity", "FluidParams", "PeriodicCurve", "SheetState", "SplashFrame",
    "birkhoff_rott", "build_splash_frame", "bulk_biot_savart", "chord_arc_F", "chord_arc_min",
    "find_closest_pair", "interface_velocity",
]
