"""Energies, effective resistances and Besov-type forms on the Sierpinski gasket."""
from sgform.besov import ALPHA, BETA_STAR, C_WEAK
from sgform.energy import CellFunction, EnergyProfile, VertexFunction
from sgform.geometry import CellGraph, DyadicPoint, build_graph
from sgform.good import GoodFunction
from sgform.kernels import BACKEND
from sgform.providers import Composed, Mapped, PiecewiseHarmonic, PointFunction, Product
from sgform.resistance import ResistorNetwork

__all__ = [
    "ALPHA", "BETA_STAR", "BACKEND", "C_WEAK", "CellFunction", "CellGraph", "DyadicPoint",
    "Composed", "EnergyProfile", "GoodFunction", "Mapped", "PiecewiseHarmonic", "PointFunction", "Product",
    "ResistorNetwork", "VertexFunction", "build_graph",
]
__version__ = "0.1.0"
