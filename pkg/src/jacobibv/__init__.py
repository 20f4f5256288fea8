"""Exact calculus for Jacobi manifolds: the 1-jet algebroid, its BV generator,
Jacobi (co)homology, modular classes and Omega-Poisson structures."""
from .symalg import Chart, ChartMismatchError, ExpPoly
from .tensor import DegreeError, DiffForm, Multivector

__all__ = ["Chart", "ChartMismatchError", "DegreeError", "DiffForm", "ExpPoly", "Multivector"]
__version__ = "0.1.0"
