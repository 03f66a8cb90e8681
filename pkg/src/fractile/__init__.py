"""Workbench for planar substitution tilings and their fractal realizations.

Exact geometry over a real quadratic field, substitution rules via digit
matrices, recurrent pairs of embedded graphs, graph-directed IFS boundary
curves with Hausdorff dimension, and Cech cohomology of the tiling space
through the cell complex of the border-forcing fractal substitution.
"""

from fractile.field import FieldScalar, Point
from fractile.geometry import Polygon, orientation

__all__ = ["FieldScalar", "Point", "Polygon", "orientation"]
__version__ = "0.1.0"
