"""Numerical verification of Poisson groupoid structures on generalised
double Bruhat cells in SL(n), together with the local-groupoid twist
machinery that produces them."""

from .linalg import KERNEL_BACKEND

__all__ = ["KERNEL_BACKEND"]
__version__ = "0.1.0"
