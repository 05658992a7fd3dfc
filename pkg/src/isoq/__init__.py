"""Numerics for the sharp quantitative isoperimetric inequality in the plane."""

from .errors import IsoqError
from .shapes import FourierCoeffs, Polygon, StarShape, from_fourier, from_samples, make_ellipse, \
    make_regular_polygon, normalize_volume, translate
from .metrics import asymmetry, deficit, perimeter, quotient, report, symdiff_with_ball, volume

__version__ = "0.1.0"

__all__ = [
    "IsoqError", "FourierCoeffs", "Polygon", "StarShape", "from_fourier", "from_samples",
    "make_ellipse", "make_regular_polygon", "normalize_volume", "translate", "asymmetry",
    "deficit", "perimeter", "quotient", "report", "symdiff_with_ball", "volume", "__version__",
]
