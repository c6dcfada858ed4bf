"""Bifurcation analysis of conservative cubic Hénon maps near cubic homoclinic tangencies."""

from .core_maps import CubicHenonMap, PlanePoint, reversor

__all__ = ["CubicHenonMap", "PlanePoint", "reversor"]
__version__ = "0.1.0"
