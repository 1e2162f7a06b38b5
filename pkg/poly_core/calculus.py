"""
Calculus on polynomials: derivatives, Lie derivatives, compositions and homogenization
"""
from math import comb
from typing import Dict, List, Sequence

import numpy as np

from .models import LinearSystem, Monomial, Polynomial, VariableCountError, VectorField


def derivative(p: Polynomial, index: int) -> Polynomial:
    """Partial derivative with respect to x_{index+1}."""
    if not 0 <= index < p.n_vars:
        raise ValueError(f"variable index {index} out of range")
    terms: Dict[Monomial, float] = {}
    for monomial, coefficient in p.terms.items():
        e = monomial[index]
        if e == 0:
            continue
        lowered = list(monomial)
        lowered[index] -= 1
        key = tuple(lowered)
        terms[key] = terms.get(key, 0.0) + coefficient * e
    return Polynomial(p.n_vars, terms)


def gradient(p: Polynomial) -> List[Polynomial]:
    return [derivative(p, i) for i in range(p.n_vars)]


def lie_derivative(V: Polynomial, f: VectorField) -> Polynomial:
    """<grad V, f>"""
    if V.n_vars != f.n_vars:
        raise VariableCountError(f.n_vars, V.n_vars, "V")
    result = Polynomial.zero(V.n_vars)
    for partial, component in zip(gradient(V), f.components):
        if not partial.is_zero():
            result = result + partial * component
    return result


def squared_gradient_norm(V: Polynomial) -> Polynomial:
    result = Polynomial.zero(V.n_vars)
    for partial in gradient(V):
        result = result + partial * partial
    return result


def compose_linear(V: Polynomial, A: np.ndarray) -> Polynomial:
    """V(Ax) by substituting x_i -> sum_j A_ij x_j."""
    A = np.asarray(A, dtype=float)
    n = V.n_vars
    if A.shape != (n, n):
        raise VariableCountError(n, A.shape[0], "matrix")
    forms = [Polynomial(n, {tuple(int(k == j) for k in range(n)): A[i, j] for j in range(n)}) for i in range(n)]
    power_cache: Dict[tuple, Polynomial] = {}

    def power(i: int, e: int) -> Polynomial:
        key = (i, e)
        if key not in power_cache:
            power_cache[key] = forms[i] ** e
        return power_cache[key]

    result = Polynomial.zero(n)
    for monomial, coefficient in V.terms.items():
        term = Polynomial.constant(n, coefficient)
        for i, e in enumerate(monomial):
            if e:
                term = term * power(i, e)
        result = result + term
    return result


def discrete_difference(V: Polynomial, system: LinearSystem) -> Polynomial:
    """V(x) - V(Ax)"""
    if V.n_vars != system.n_vars:
        raise VariableCountError(system.n_vars, V.n_vars, "V")
    return V - compose_linear(V, system.A)


def homogenize(p: Polynomial, target_degree: int) -> Polynomial:
    """y^target_degree * p(x/y) with y appended as the last variable."""
    if target_degree < p.degree:
        raise ValueError(f"target degree {target_degree} is below the polynomial degree {p.degree}")
    terms = {monomial + (target_degree - sum(monomial),): c for monomial, c in p.terms.items()}
    return Polynomial(p.n_vars + 1, terms)


def dehomogenize(p: Polynomial) -> Polynomial:
    """Set the last variable to 1."""
    if p.n_vars < 2:
        raise ValueError("dehomogenize needs at least two variables")
    terms: Dict[Monomial, float] = {}
    for monomial, coefficient in p.terms.items():
        key = monomial[:-1]
        terms[key] = terms.get(key, 0.0) + coefficient
    return Polynomial(p.n_vars - 1, terms)


def homogeneous_component(p: Polynomial, degree: int) -> Polynomial:
    return Polynomial(p.n_vars, {m: c for m, c in p.terms.items() if sum(m) == degree})


def top_homogeneous_component(p: Polynomial) -> Polynomial:
    if p.is_zero():
        raise ValueError("the zero polynomial has no top homogeneous component")
    return homogeneous_component(p, p.degree)


def euler_residual(p: Polynomial) -> Polynomial:
    """p - (1/d) sum_i x_i dp/dx_i, identically zero for forms of degree d."""
    if p.is_zero() or not p.is_homogeneous() or p.degree < 1:
        raise ValueError("euler_residual needs a nonzero homogeneous polynomial of degree >= 1")
    d = p.degree
    weighted = Polynomial.zero(p.n_vars)
    for i, partial in enumerate(gradient(p)):
        weighted = weighted + Polynomial.variable(p.n_vars, i) * partial
    return p - weighted / d


def norm_power(n_vars: int, half_degree: int) -> Polynomial:
    """(x1^2 + ... + xn^2)^half_degree"""
    squares = Polynomial(n_vars, {tuple(2 * int(k == i) for k in range(n_vars)): 1.0 for i in range(n_vars)})
    return squares ** half_degree


def count_monomials(n_vars: int, degree: int, homogeneous: bool) -> int:
    if homogeneous:
        return comb(n_vars + degree - 1, n_vars - 1)
    return comb(n_vars + degree, n_vars)


def substitute_shift(p: Polynomial, shift: Sequence[float]) -> Polynomial:
    """p(x + shift)"""
    n = p.n_vars
    if len(shift) != n:
        raise VariableCountError(n, len(shift), "shift")
    shifted = [Polynomial.variable(n, i) + float(s) for i, s in enumerate(shift)]
    result = Polynomial.zero(n)
    for monomial, coefficient in p.terms.items():
        term = Polynomial.constant(n, coefficient)
        for i, e in enumerate(monomial):
            if e:
                term = term * shifted[i] ** e
        result = result + term
    return result
