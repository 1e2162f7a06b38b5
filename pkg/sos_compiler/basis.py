"""
Gram basis enumeration and reduction
"""
from typing import Dict, Iterable, Iterator, List, Sequence, Set, Tuple

import numpy as np
from scipy.optimize import linprog

from poly_core import Monomial
from poly_core.models import monomial_product
from .models import BasisReduction


def exponents_of_degree(n_vars: int, degree: int) -> Iterator[Monomial]:
    """All exponent tuples of exactly `degree`, x1-heavy first."""
    if n_vars == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in exponents_of_degree(n_vars - 1, degree - first):
            yield (first,) + rest


def monomial_basis(n_vars: int, half_degree: int, homogeneous: bool = False) -> List[Monomial]:
    """Monomials of degree <= half_degree (exactly half_degree when homogeneous) in graded-lex order."""
    if n_vars < 1 or half_degree < 0:
        raise ValueError(f"need n_vars >= 1 and half_degree >= 0, got ({n_vars}, {half_degree})")
    degrees = [half_degree] if homogeneous else range(half_degree + 1)
    return [m for d in degrees for m in exponents_of_degree(n_vars, d)]


def pair_products(basis: Sequence[Monomial]) -> Dict[Monomial, List[Tuple[int, int]]]:
    """Map every product z_a*z_b (a <= b) to the index pairs producing it."""
    products: Dict[Monomial, List[Tuple[int, int]]] = {}
    for a in range(len(basis)):
        for b in range(a, len(basis)):
            products.setdefault(monomial_product(basis[a], basis[b]), []).append((a, b))
    return products


def prune_diagonal(basis: Sequence[Monomial], support: Iterable[Monomial]) -> Tuple[Monomial, ...]:
    """
    Drop basis monomials z_a whose square cannot occur.

    If x^(2a) is outside the target support and no other pair of kept monomials
    produces it, Q_aa is forced to zero and so is the whole row of a PSD Q.
    Repeats until stable.
    """
    support_set: Set[Monomial] = set(support)
    kept = list(basis)
    changed = True
    while changed:
        changed = False
        products = pair_products(kept)
        for a, monomial in enumerate(kept):
            square = monomial_product(monomial, monomial)
            if square in support_set:
                continue
            if any(i != j for i, j in products.get(square, [])):
                continue
            kept.pop(a)
            changed = True
            break
    return tuple(kept)


def in_half_newton_polytope(candidate: Monomial, support_points: np.ndarray) -> bool:
    """Whether 2*candidate lies in the convex hull of the support exponents."""
    k = support_points.shape[0]
    if k == 0:
        return False
    target = 2.0 * np.asarray(candidate, dtype=float)
    a_eq = np.vstack([support_points.T, np.ones((1, k))])
    b_eq = np.concatenate([target, [1.0]])
    result = linprog(np.zeros(k), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs")
    return result.status == 0


def newton_reduce(basis: Sequence[Monomial], support: Iterable[Monomial]) -> Tuple[Monomial, ...]:
    points = np.array(sorted(set(support)), dtype=float)
    if points.size == 0:
        return ()
    return tuple(m for m in basis if in_half_newton_polytope(m, points))


def reduce_basis(basis: Sequence[Monomial], support: Iterable[Monomial],
                 reduction: BasisReduction) -> Tuple[Monomial, ...]:
    support = frozenset(support)
    if reduction == BasisReduction.NONE:
        return tuple(basis)
    if reduction == BasisReduction.NEWTON:
        basis = newton_reduce(basis, support)
    return prune_diagonal(basis, support)


def default_half_degree(support: Iterable[Monomial]) -> int:
    return max((sum(m) for m in support), default=0) // 2
