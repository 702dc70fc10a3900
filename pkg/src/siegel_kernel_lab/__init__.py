"""Numerical laboratory for the Siegel upper half space.

Geometry (points, symplectic action, cross-ratio spectra and distance),
integer symplectic arithmetic and reduction, group enumeration, Bergman
kernel majorants, polar volumes and the special functions they need.
"""

from .errors import SiegelLabError
from .siegel import SiegelPoint, SymplecticReal, act, distance, spectrum
from .arithmetic import SymplecticInt, certify_symplectic

__version__ = "0.1.0"

__all__ = [
    "SiegelLabError",
    "SiegelPoint",
    "SymplecticReal",
    "SymplecticInt",
    "act",
    "certify_symplectic",
    "distance",
    "spectrum",
]
