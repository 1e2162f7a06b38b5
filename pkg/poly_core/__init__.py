"""
Polynomial Core

Sparse multivariate polynomials over positional variables, polynomial vector fields,
linear and switched systems, and the calculus the certificate search is built on.
"""

from .models import (
    Monomial, Polynomial, VectorField, LinearSystem, SwitchedSystem, TimeDomain,
    SystemDescription, VariableCountError, as_polynomial, grlex_key, PRUNE_THRESHOLD,
)
from .text_format import parse_polynomial, format_polynomial, format_monomial, PolynomialParseError
from .calculus import (
    derivative, gradient, lie_derivative, squared_gradient_norm, compose_linear,
    discrete_difference, homogenize, dehomogenize, homogeneous_component,
    top_homogeneous_component, euler_residual, norm_power, count_monomials, substitute_shift,
)

__version__ = "1.0.0"
__all__ = [
    "Monomial", "Polynomial", "VectorField", "LinearSystem", "SwitchedSystem", "TimeDomain",
    "SystemDescription", "VariableCountError", "as_polynomial", "grlex_key", "PRUNE_THRESHOLD",
    "parse_polynomial", "format_polynomial", "format_monomial", "PolynomialParseError",
    "derivative", "gradient", "lie_derivative", "squared_gradient_norm", "compose_linear",
    "discrete_difference", "homogenize", "dehomogenize", "homogeneous_component",
    "top_homogeneous_component", "euler_residual", "norm_power", "count_monomials", "substitute_shift",
]
