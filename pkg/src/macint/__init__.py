"""Convex integration for the very weak Monge–Ampère equation on the 2-torus."""
from .fields import (DisplacementField, Grid, ScalarField, SymMatrixField, VectorField2,
                     curl_curl, gradient, hessian, sym_gradient, very_weak_hessian)

__version__ = "0.1.0"

__all__ = [
    "DisplacementField", "Grid", "ScalarField", "SymMatrixField", "VectorField2",
    "curl_curl", "gradient", "hessian", "sym_gradient", "very_weak_hessian",
]
