"""
Closed-form constructions: squared Lyapunov functions and gradient systems
"""
from poly_core import Polynomial, VectorField, gradient


def square_lyapunov(V: Polynomial) -> Polynomial:
    """W = V^2, a perfect square; -Wdot = -2 V Vdot along any field."""
    return V * V


def gradient_system(V: Polynomial) -> VectorField:
    """xdot = -grad V, for which Vdot = -|grad V|^2."""
    if V.is_constant():
        raise ValueError("gradient system of a constant polynomial is identically zero")
    return VectorField(tuple(-partial for partial in gradient(V)))
