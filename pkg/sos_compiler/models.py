"""
Data models for the SOS compiler: templates, affine targets, constraints and the SDP problem schema
"""
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from poly_core import Monomial, Polynomial, VariableCountError, format_monomial
from poly_core.calculus import homogeneous_component


class SosCompilationError(ValueError):
    """Raised when a program cannot be compiled; `monomial` names the offending term"""

    def __init__(self, message: str, monomial: Optional[Monomial] = None, label: str = ""):
        detail = f" (monomial {format_monomial(monomial)})" if monomial is not None else ""
        where = f" in constraint '{label}'" if label else ""
        super().__init__(f"{message}{where}{detail}")
        self.monomial = monomial
        self.label = label


class BasisReduction(str, Enum):
    NONE = "none"
    DIAGONAL = "diagonal"
    NEWTON = "newton"


@dataclass(frozen=True)
class AffinePolynomial:
    """A fixed polynomial plus a linear combination of free scalars with polynomial weights"""
    constant: Polynomial
    linear: Mapping[int, Polynomial] = field(default_factory=dict)

    def __post_init__(self):
        weights = {}
        for index, weight in sorted(self.linear.items()):
            if weight.n_vars != self.constant.n_vars:
                raise VariableCountError(self.constant.n_vars, weight.n_vars, f"weight of scalar {index}")
            if not weight.is_zero():
                weights[int(index)] = weight
        object.__setattr__(self, "linear", MappingProxyType(weights))

    @classmethod
    def fixed(cls, p: Polynomial) -> "AffinePolynomial":
        return cls(p)

    @property
    def n_vars(self) -> int:
        return self.constant.n_vars

    @property
    def is_fixed(self) -> bool:
        return not self.linear

    def support(self) -> frozenset:
        """Monomials that can carry a nonzero coefficient."""
        monomials = set(self.constant.terms)
        for weight in self.linear.values():
            monomials.update(weight.terms)
        return frozenset(monomials)

    def max_degree(self) -> int:
        return max((sum(m) for m in self.support()), default=0)

    def coefficient_row(self, monomial: Monomial) -> Tuple[float, Dict[int, float]]:
        weights = {k: w.coefficient(monomial) for k, w in self.linear.items()}
        return self.constant.coefficient(monomial), {k: v for k, v in weights.items() if v != 0.0}

    def map(self, fn: Callable[[Polynomial], Polynomial]) -> "AffinePolynomial":
        """Apply a linear polynomial map term by term."""
        return AffinePolynomial(fn(self.constant), {k: fn(w) for k, w in self.linear.items()})

    def __add__(self, other: Union["AffinePolynomial", Polynomial]) -> "AffinePolynomial":
        if isinstance(other, Polynomial):
            return AffinePolynomial(self.constant + other, self.linear)
        weights = dict(self.linear)
        for k, w in other.linear.items():
            weights[k] = weights[k] + w if k in weights else w
        return AffinePolynomial(self.constant + other.constant, weights)

    def __neg__(self) -> "AffinePolynomial":
        return self.map(lambda p: -p)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: float) -> "AffinePolynomial":
        return self.map(lambda p: p * factor)

    def multiply(self, p: Polynomial) -> "AffinePolynomial":
        return self.map(lambda q: q * p)

    def evaluate(self, values: Sequence[float]) -> Polynomial:
        result = self.constant
        for k, weight in self.linear.items():
            result = result + weight * float(values[k])
        return result


@dataclass(frozen=True)
class PolynomialTemplate:
    """Polynomial whose basis coefficients are decision variables"""
    name: str
    n_vars: int
    degree: int
    basis: Tuple[Monomial, ...]
    offset: int = 0
    pinned: Mapping[Monomial, float] = field(default_factory=dict)
    homogeneous: bool = False

    def __post_init__(self):
        basis = tuple(tuple(m) for m in self.basis)
        if len(set(basis)) != len(basis):
            raise ValueError(f"template '{self.name}' has repeated basis monomials")
        pinned = {tuple(m): float(v) for m, v in self.pinned.items()}
        overlap = set(pinned) & set(basis)
        if overlap:
            raise ValueError(f"template '{self.name}' pins free monomials {sorted(overlap)}")
        for m in list(basis) + list(pinned):
            if len(m) != self.n_vars:
                raise VariableCountError(self.n_vars, len(m), "template monomial")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "pinned", MappingProxyType(pinned))

    @classmethod
    def create(cls, name: str, n_vars: int, degree: int, homogeneous: bool = False,
               include_constant: bool = True, pinned: Optional[Mapping[Monomial, float]] = None,
               offset: int = 0) -> "PolynomialTemplate":
        from .basis import monomial_basis
        pinned = dict(pinned or {})
        if homogeneous:
            candidates = monomial_basis(n_vars, degree, homogeneous=True)
        else:
            candidates = monomial_basis(n_vars, degree, homogeneous=False)
        basis = [m for m in candidates
                 if m not in pinned and (include_constant or sum(m) > 0)]
        return cls(name, n_vars, degree, tuple(basis), offset, pinned, homogeneous)

    @property
    def size(self) -> int:
        return len(self.basis)

    def free_label(self, position: int) -> str:
        return f"{self.name}[{format_monomial(self.basis[position])}]"

    def as_affine(self) -> AffinePolynomial:
        constant = Polynomial(self.n_vars, dict(self.pinned))
        linear = {self.offset + i: Polynomial(self.n_vars, {m: 1.0}) for i, m in enumerate(self.basis)}
        return AffinePolynomial(constant, linear)

    def top_component(self) -> AffinePolynomial:
        return self.as_affine().map(lambda p: homogeneous_component(p, self.degree))

    def evaluate(self, values: Sequence[float]) -> Polynomial:
        terms = dict(self.pinned)
        for i, m in enumerate(self.basis):
            terms[m] = terms.get(m, 0.0) + float(values[self.offset + i])
        return Polynomial(self.n_vars, terms)


@dataclass(frozen=True)
class SosConstraint:
    """Requirement that `target - shift` equals z^T Q z with Q PSD over `gram_basis`"""
    label: str
    target: AffinePolynomial
    gram_basis: Tuple[Monomial, ...]
    homogeneous: bool = False
    strict: bool = False
    shift: Optional[Polynomial] = None
    reduction: BasisReduction = BasisReduction.NONE

    @property
    def n_vars(self) -> int:
        return self.target.n_vars

    @property
    def shifted_target(self) -> AffinePolynomial:
        return self.target if self.shift is None else self.target - self.shift


class NormalizationKind(str, Enum):
    UNIT_LEADING = "unit-leading"
    EPSILON_PD = "epsilon-pd"
    TRACE_ONE = "trace-one"


@dataclass(frozen=True)
class NormalizationRule:
    """How the trivial solution is excluded from a template program"""
    kind: NormalizationKind
    epsilon: float = 1e-4
    template: Optional[str] = None
    monomial: Optional[Monomial] = None

    @classmethod
    def unit_leading(cls, template: str, monomial: Monomial) -> "NormalizationRule":
        return cls(NormalizationKind.UNIT_LEADING, template=template, monomial=tuple(monomial))

    @classmethod
    def epsilon_pd(cls, epsilon: float = 1e-4) -> "NormalizationRule":
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        return cls(NormalizationKind.EPSILON_PD, epsilon=epsilon)

    @classmethod
    def trace_one(cls) -> "NormalizationRule":
        return cls(NormalizationKind.TRACE_ONE)


# ---- SDP problem schema ----------------------------------------------------


class GramEntry(BaseModel):
    """Coefficient of a symmetric Gram entry; an off-diagonal value v contributes 2*v*Q[row, col]"""
    block: int = Field(..., ge=0)
    row: int = Field(..., ge=0)
    col: int = Field(..., ge=0)
    value: float


class FreeEntry(BaseModel):
    index: int = Field(..., ge=0)
    value: float


class EqualityConstraint(BaseModel):
    label: str = ""
    gram: List[GramEntry] = Field(default_factory=list)
    free: List[FreeEntry] = Field(default_factory=list)
    rhs: float = 0.0


class LinearFunctional(BaseModel):
    gram: List[GramEntry] = Field(default_factory=list)
    free: List[FreeEntry] = Field(default_factory=list)


class SdpProblem(BaseModel):
    """Block-diagonal PSD feasibility problem with linear equalities over Gram entries and free scalars"""
    blocks: List[int] = Field(default_factory=list, description="Gram block dimensions")
    block_labels: List[str] = Field(default_factory=list)
    n_free: int = Field(0, ge=0, description="Number of free scalar variables")
    free_labels: List[str] = Field(default_factory=list)
    constraints: List[EqualityConstraint] = Field(default_factory=list)
    objective: Optional[LinearFunctional] = None

    @model_validator(mode="after")
    def _check_references(self):
        if len(self.block_labels) != len(self.blocks):
            raise ValueError("one label per block is required")
        if len(self.free_labels) != self.n_free:
            raise ValueError("one label per free scalar is required")
        if any(b < 0 for b in self.blocks):
            raise ValueError("block dimensions must be non-negative")
        rows = list(self.constraints)
        if self.objective is not None:
            rows.append(EqualityConstraint(gram=self.objective.gram, free=self.objective.free))
        for row in rows:
            for entry in row.gram:
                if entry.block >= len(self.blocks):
                    raise ValueError(f"constraint '{row.label}' references undeclared block {entry.block}")
                size = self.blocks[entry.block]
                if not entry.row <= entry.col < size:
                    raise ValueError(f"constraint '{row.label}' has entry ({entry.row}, {entry.col}) outside block {entry.block}")
            for entry in row.free:
                if entry.index >= self.n_free:
                    raise ValueError(f"constraint '{row.label}' references undeclared scalar {entry.index}")
        return self

    @property
    def total_dimension(self) -> int:
        return sum(self.blocks)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def gram_variable_count(self) -> int:
        return sum(n * (n + 1) // 2 for n in self.blocks)

    def evaluate_residuals(self, grams: Sequence[np.ndarray], free: Sequence[float]) -> np.ndarray:
        """Left-hand side minus rhs for every equality."""
        residuals = np.zeros(len(self.constraints))
        for k, row in enumerate(self.constraints):
            total = 0.0
            for e in row.gram:
                factor = 1.0 if e.row == e.col else 2.0
                total += factor * e.value * grams[e.block][e.row, e.col]
            for e in row.free:
                total += e.value * free[e.index]
            residuals[k] = total - row.rhs
        return residuals

    def evaluate_objective(self, grams: Sequence[np.ndarray], free: Sequence[float]) -> Optional[float]:
        if self.objective is None:
            return None
        total = 0.0
        for e in self.objective.gram:
            factor = 1.0 if e.row == e.col else 2.0
            total += factor * e.value * grams[e.block][e.row, e.col]
        for e in self.objective.free:
            total += e.value * free[e.index]
        return total
