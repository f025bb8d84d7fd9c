"""Numerical laboratory for dilation-deformed Schrodinger calculus and
self-similar blowup of the mass-supercritical NLS."""

from .grids import Field, Grid1D, RadialGrid, VectorField2
from .params import ModelParams, derive_params
from .spectral import (
    HomSobolev,
    Lp,
    WeightedL2,
    cutoff,
    fractional_derivative,
    gagliardo_seminorm,
    norm,
    windowed_norm,
)

__version__ = "0.1.0"

__all__ = [
    "Field",
    "Grid1D",
    "RadialGrid",
    "VectorField2",
    "ModelParams",
    "derive_params",
    "Lp",
    "HomSobolev",
    "WeightedL2",
    "cutoff",
    "fractional_derivative",
    "gagliardo_seminorm",
    "norm",
    "windowed_norm",
    "__version__",
]
