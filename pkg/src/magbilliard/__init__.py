"""Magnetic Birkhoff billiards on the sphere and the hyperbolic plane."""

from .billiard import (
    GeodesicCircleBoundary,
    MagneticBilliard,
    ParametricBoundary,
    PhasePoint,
    sampled_boundary,
)
from .ellipse_appendix import SphericalEllipse, ellipse_boundary
from .geometry import Surface
from .magnetic import MagneticParams, larmor_center, magnetic_flow

__version__ = "0.1.0"

__all__ = [
    "Surface",
    "MagneticParams",
    "larmor_center",
    "magnetic_flow",
    "GeodesicCircleBoundary",
    "ParametricBoundary",
    "sampled_boundary",
    "SphericalEllipse",
    "ellipse_boundary",
    "MagneticBilliard",
    "PhasePoint",
]
