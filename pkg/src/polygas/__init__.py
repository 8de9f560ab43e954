"""Zeros of random Gaussian polynomials as Coulomb gases.

Sampling of Kac, elliptic and general orthonormal Gaussian polynomials and
their roots; the matching Gibbs-gas densities and MCMC samplers; transport
of measures between the plane and the radius-1/2 sphere by inverse
stereographic projection; logarithmic-energy rate functionals; and convex
recovery of equilibrium measures on grids.
"""

__version__ = "0.1.0"

from .ensembles import ComplexPolynomial, ModelSpec, find_roots, sample_coefficients
from .measures import EmpiricalMeasure, GridMeasure, bl_distance

__all__ = [
    "__version__",
    "ComplexPolynomial",
    "ModelSpec",
    "EmpiricalMeasure",
    "GridMeasure",
    "bl_distance",
    "find_roots",
    "sample_coefficients",
]
