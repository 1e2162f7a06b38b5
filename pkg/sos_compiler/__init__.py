"""
SOS Compiler

Translates sum-of-squares programs over fixed or template polynomials into
block-diagonal SDP feasibility problems via Gram matrices, with SDPA export
and the size accounting of the top-homogeneous-component relaxation.
"""

from .models import (
    AffinePolynomial, PolynomialTemplate, SosConstraint, NormalizationRule, NormalizationKind,
    BasisReduction, SdpProblem, EqualityConstraint, GramEntry, FreeEntry, LinearFunctional,
    SosCompilationError,
)
from .basis import monomial_basis, prune_diagonal, newton_reduce, reduce_basis, pair_products
from .compiler import build_sos_constraint, compile_program, prepare_constraints, reconstruct, SosProgram
from .savings import count_savings, direct_savings, closed_form_savings, savings_table
from .sdpa import to_sdpa, from_sdpa, SdpaParseError

__version__ = "1.0.0"
__all__ = [
    "AffinePolynomial", "PolynomialTemplate", "SosConstraint", "NormalizationRule", "NormalizationKind",
    "BasisReduction", "SdpProblem", "EqualityConstraint", "GramEntry", "FreeEntry", "LinearFunctional",
    "SosCompilationError", "monomial_basis", "prune_diagonal", "newton_reduce", "reduce_basis",
    "pair_products", "build_sos_constraint", "compile_program", "prepare_constraints", "reconstruct",
    "SosProgram", "count_savings", "direct_savings", "closed_form_savings", "savings_table",
    "to_sdpa", "from_sdpa", "SdpaParseError",
]
