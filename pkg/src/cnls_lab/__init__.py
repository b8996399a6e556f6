"""Numerical laboratory for two-soliton interactions in a coupled cubic
Schrodinger system: ground states and linearized operators, interaction
projections, reduced modulation ODEs, split-step simulation and tracking."""
from ._kernels import BACKEND as KERNEL_BACKEND
from .grid import Grid, GridError

__version__ = "0.1.0"

__all__ = ["Grid", "GridError", "KERNEL_BACKEND", "__version__"]
