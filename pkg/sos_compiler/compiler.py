"""
Gram-matrix compilation of SOS programs into block SDP feasibility problems
"""
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from poly_core import Monomial, Polynomial, format_monomial, grlex_key
from poly_core.calculus import norm_power
from .basis import default_half_degree, monomial_basis, pair_products, reduce_basis
from .models import (
    AffinePolynomial, BasisReduction, EqualityConstraint, FreeEntry, GramEntry,
    NormalizationKind, NormalizationRule, PolynomialTemplate, SdpProblem,
    SosCompilationError, SosConstraint,
)


def _as_affine(target: Union[AffinePolynomial, Polynomial]) -> AffinePolynomial:
    return target if isinstance(target, AffinePolynomial) else AffinePolynomial.fixed(target)


def build_sos_constraint(label: str, target: Union[AffinePolynomial, Polynomial],
                         homogeneous: Optional[bool] = None,
                         reduction: Union[BasisReduction, str] = BasisReduction.NONE,
                         strict: bool = False, epsilon: Optional[float] = None,
                         gram_basis: Optional[Sequence[Monomial]] = None) -> SosConstraint:
    """
    Build a constraint with a deterministic Gram basis.

    The basis is every monomial of degree <= half the largest possible target
    degree (exactly half when homogeneous), then reduced per `reduction`.
    With `epsilon`, the target is shifted by epsilon*(sum x_i^2)^h, h the top basis degree.
    """
    target = _as_affine(target)
    reduction = BasisReduction(reduction)
    support = target.support()
    if homogeneous is None:
        homogeneous = len({sum(m) for m in support}) <= 1
    half = default_half_degree(support)

    if gram_basis is not None and len(gram_basis):
        half = max(sum(m) for m in gram_basis)
    shift = None
    if epsilon is not None and support:
        shift = norm_power(target.n_vars, half) * epsilon
        support = support | shift.support()

    if gram_basis is not None:
        basis = tuple(tuple(m) for m in gram_basis)
    elif not support:
        basis = ()
    else:
        basis = reduce_basis(monomial_basis(target.n_vars, half, homogeneous), support, reduction)
    return SosConstraint(label, target, basis, homogeneous, strict or epsilon is not None, shift, reduction)


def prepare_constraints(constraints: Sequence[SosConstraint],
                        normalization: Optional[NormalizationRule]) -> List[SosConstraint]:
    """Apply the EpsilonPD shift to strict constraints that do not carry one yet."""
    prepared = []
    for constraint in constraints:
        if (normalization is not None and normalization.kind == NormalizationKind.EPSILON_PD
                and constraint.strict and constraint.shift is None):
            default = build_sos_constraint(constraint.label, constraint.target, constraint.homogeneous,
                                           constraint.reduction).gram_basis
            # a caller-chosen basis survives the rebuild
            supplied = constraint.gram_basis if constraint.gram_basis != default else None
            constraint = build_sos_constraint(
                constraint.label, constraint.target, constraint.homogeneous,
                constraint.reduction, epsilon=normalization.epsilon, gram_basis=supplied,
            )
        prepared.append(constraint)
    return prepared


def _normalization_row(rule: NormalizationRule, templates: Sequence[PolynomialTemplate],
                       constraints: Sequence[SosConstraint]) -> Optional[EqualityConstraint]:
    if rule.kind == NormalizationKind.UNIT_LEADING:
        for template in templates:
            if template.name == rule.template:
                if rule.monomial not in template.basis:
                    raise SosCompilationError("normalized monomial is not a free template coefficient",
                                              rule.monomial, template.name)
                index = template.offset + template.basis.index(rule.monomial)
                return EqualityConstraint(label=f"normalize:{template.free_label(index - template.offset)}",
                                          free=[FreeEntry(index=index, value=1.0)], rhs=1.0)
        raise SosCompilationError(f"unknown template '{rule.template}' in normalization")
    if rule.kind == NormalizationKind.TRACE_ONE:
        size = len(constraints[0].gram_basis)
        return EqualityConstraint(
            label="normalize:trace",
            gram=[GramEntry(block=0, row=i, col=i, value=1.0) for i in range(size)],
            rhs=1.0,
        )
    return None


def compile_program(constraints: Sequence[SosConstraint], templates: Sequence[PolynomialTemplate] = (),
                    normalization: Optional[NormalizationRule] = None) -> SdpProblem:
    """
    Compile SOS constraints into an SdpProblem.

    One PSD block per constraint and one equality per monomial of z z^T or of the
    target: sum of matching Gram entries minus the target coefficient equals zero.
    """
    if not constraints:
        raise SosCompilationError("empty program")
    constraints = prepare_constraints(constraints, normalization)

    n_free = 0
    free_labels: List[str] = []
    for template in sorted(templates, key=lambda t: t.offset):
        if template.offset != n_free:
            raise SosCompilationError(f"template '{template.name}' offset {template.offset} is not contiguous")
        free_labels.extend(template.free_label(i) for i in range(template.size))
        n_free += template.size

    n_vars = constraints[0].n_vars
    rows: List[EqualityConstraint] = []
    for block, constraint in enumerate(constraints):
        if constraint.n_vars != n_vars:
            raise SosCompilationError("constraints live in different variable counts", label=constraint.label)
        target = constraint.shifted_target
        for k in target.linear:
            if k >= n_free:
                raise SosCompilationError(f"target references undeclared scalar {k}", label=constraint.label)
        products = pair_products(constraint.gram_basis)
        monomials = sorted(set(products) | target.support(), key=grlex_key)
        for monomial in monomials:
            constant, weights = target.coefficient_row(monomial)
            pairs = products.get(monomial, [])
            if not pairs and not weights:
                if constant != 0.0:
                    raise SosCompilationError("target monomial outside the span of z z^T",
                                              monomial, constraint.label)
                continue
            rows.append(EqualityConstraint(
                label=f"{constraint.label}:{format_monomial(monomial)}",
                gram=[GramEntry(block=block, row=a, col=b, value=1.0) for a, b in pairs],
                free=[FreeEntry(index=k, value=-w) for k, w in sorted(weights.items())],
                rhs=constant,
            ))

    if normalization is not None:
        extra = _normalization_row(normalization, templates, constraints)
        if extra is not None:
            rows.append(extra)

    return SdpProblem(
        blocks=[len(c.gram_basis) for c in constraints],
        block_labels=[c.label for c in constraints],
        n_free=n_free,
        free_labels=free_labels,
        constraints=rows,
    )


def reconstruct(basis: Sequence[Monomial], gram: np.ndarray, n_vars: int) -> Polynomial:
    """z^T Q z"""
    terms: Dict[Monomial, float] = {}
    for a in range(len(basis)):
        for b in range(len(basis)):
            monomial = tuple(x + y for x, y in zip(basis[a], basis[b]))
            terms[monomial] = terms.get(monomial, 0.0) + float(gram[a, b])
    return Polynomial(n_vars, terms)


class SosProgram:
    """Builder for template programs: declare templates, add sos constraints, compile"""

    def __init__(self, n_vars: int, normalization: Optional[NormalizationRule] = None,
                 reduction: Union[BasisReduction, str] = BasisReduction.NONE):
        self.n_vars = n_vars
        self.normalization = normalization
        self.reduction = BasisReduction(reduction)
        self.templates: List[PolynomialTemplate] = []
        self.constraints: List[SosConstraint] = []
        self.compiled_constraints: List[SosConstraint] = []

    @property
    def n_free(self) -> int:
        return sum(t.size for t in self.templates)

    def new_template(self, name: str, degree: int, homogeneous: bool = False,
                     include_constant: bool = True, pinned: Optional[Dict[Monomial, float]] = None) -> PolynomialTemplate:
        template = PolynomialTemplate.create(name, self.n_vars, degree, homogeneous,
                                             include_constant, pinned, offset=self.n_free)
        self.templates.append(template)
        return template

    def add_sos_constraint(self, label: str, target: Union[AffinePolynomial, Polynomial],
                           homogeneous: Optional[bool] = None, strict: bool = False,
                           gram_basis: Optional[Sequence[Monomial]] = None) -> SosConstraint:
        constraint = build_sos_constraint(label, target, homogeneous, self.reduction,
                                          strict=strict, gram_basis=gram_basis)
        self.constraints.append(constraint)
        return constraint

    def compile(self) -> SdpProblem:
        self.compiled_constraints = prepare_constraints(self.constraints, self.normalization)
        return compile_program(self.compiled_constraints, self.templates, self.normalization)
