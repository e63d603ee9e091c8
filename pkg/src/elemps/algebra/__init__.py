"""Exact algebra: Gaussian-rational polynomials, rational functions, towers."""
from .expr import (
    TransGen,
    canonicalize_to_ratfunc,
    expr_derivative,
    is_zero,
    partial,
)
from .poly import BASE_VARS, GaussRat, MultiPoly, U, X, Y, gauss, poly_arith, poly_derivative
from .ratfunc import RatFunc

__all__ = [
    "BASE_VARS", "GaussRat", "MultiPoly", "RatFunc", "TransGen", "U", "X", "Y",
    "canonicalize_to_ratfunc", "expr_derivative", "gauss", "is_zero", "partial",
    "poly_arith", "poly_derivative",
]
