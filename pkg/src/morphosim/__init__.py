"""Growth simulator and stability toolkit for axisymmetric walled cells."""

__version__ = "0.1.0"

from .geometry import Grid, WallProfile  # noqa: F401
