"""Exact tools for discrete Pompeiu problems: linear criteria, placement
constraint systems, character certificates and planar constructions."""

from .configuration import Configuration, MotionGroup, Placement, Window
from .errors import PompeiuError
from .exact import GaussRational, IntMatrix, UniPoly

__all__ = ["Configuration", "MotionGroup", "Placement", "Window", "PompeiuError",
           "GaussRational", "IntMatrix", "UniPoly"]
__version__ = "0.1.0"
