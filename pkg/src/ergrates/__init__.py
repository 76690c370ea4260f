"""Numerical machinery for decay rates of ergodic averages over convex bodies.

The package computes the squared deviation of mean ergodic averages over
dilated convex bodies through its spectral-measure form, evaluates the
Fourier transforms and curvature asymptotics that drive it, and checks
the rate criteria (subcritical, critical-sector, supercritical) plus the
box/ball regime tables numerically.
"""

__version__ = "0.1.0"

from .geometry import Ball, Cube, ConvexBody, Ellipsoid, parse_body
from .spectral import (
    AnisotropicPowerMeasure,
    AtomicMeasure,
    RadialPowerMeasure,
    SumMeasure,
    parse_measure,
)

__all__ = [
    "__version__",
    "Ball",
    "Cube",
    "ConvexBody",
    "Ellipsoid",
    "parse_body",
    "AtomicMeasure",
    "RadialPowerMeasure",
    "AnisotropicPowerMeasure",
    "SumMeasure",
    "parse_measure",
]
