"""
Size accounting: how much smaller "t.h.c.(V) sos" is than "V sos"
"""
from fractions import Fraction
from math import comb, factorial
from typing import Tuple

import pandas as pd


def direct_savings(n_vars: int, half_degree: int) -> Tuple[int, int]:
    """Gram entries and coefficient equations saved, counted from the bases."""
    n, d = n_vars, half_degree
    full = comb(n + d, n)
    homogeneous = comb(n + d - 1, n - 1)
    vars_saved = full * (full + 1) // 2 - homogeneous * (homogeneous + 1) // 2
    eqs_saved = comb(n + 2 * d, n) - comb(n + 2 * d - 1, n - 1)
    return vars_saved, eqs_saved


def closed_form_savings(n_vars: int, half_degree: int) -> Tuple[int, int]:
    """Factorial closed forms, evaluated exactly; the equality denominator is (2d)!*n!."""
    n, d = n_vars, half_degree
    vars_saved = Fraction(
        d * factorial(n + d - 1) * ((2 * n + d) * factorial(n + d - 1) + factorial(d) * factorial(n)),
        2 * (factorial(d) * factorial(n)) ** 2,
    )
    eqs_saved = Fraction(2 * d * factorial(n + 2 * d - 1), factorial(2 * d) * factorial(n))
    if vars_saved.denominator != 1 or eqs_saved.denominator != 1:
        raise ArithmeticError(f"closed forms are not integral at n={n}, d={d}")
    return int(vars_saved), int(eqs_saved)


def count_savings(n_vars: int, half_degree: int) -> Tuple[int, int]:
    """
    Savings of compiling "t.h.c.(V) sos" instead of "V sos" for V of degree 2*half_degree.

    Returns:
        (vars_saved, eqs_saved), checked against both counting methods
    """
    if n_vars < 1 or half_degree < 1:
        raise ValueError(f"need n_vars >= 1 and half_degree >= 1, got ({n_vars}, {half_degree})")
    direct = direct_savings(n_vars, half_degree)
    closed = closed_form_savings(n_vars, half_degree)
    if direct != closed:
        raise ArithmeticError(f"savings disagree at n={n_vars}, d={half_degree}: {direct} vs {closed}")
    return direct


def savings_table(n_max: int = 4, d_max: int = 5) -> pd.DataFrame:
    rows = []
    for n in range(1, n_max + 1):
        for d in range(1, d_max + 1):
            direct = direct_savings(n, d)
            closed = closed_form_savings(n, d)
            rows.append({
                "n": n, "d": d,
                "vars_saved": direct[0], "eqs_saved": direct[1],
                "closed_vars": closed[0], "closed_eqs": closed[1],
                "match": direct == closed,
            })
    return pd.DataFrame(rows)
