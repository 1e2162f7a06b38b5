"""
Data models for the polynomial core: sparse polynomials, vector fields and linear systems
"""
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator

Monomial = Tuple[int, ...]

# Coefficients at or below this magnitude are dropped after every operation
PRUNE_THRESHOLD = 1e-12


class VariableCountError(ValueError):
    """Raised when two objects live in different numbers of variables"""

    def __init__(self, expected: int, got: int, what: str = "polynomial"):
        super().__init__(f"{what} has {got} variables, expected {expected}")
        self.expected = expected
        self.got = got


def grlex_key(monomial: Monomial) -> Tuple[int, Tuple[int, ...]]:
    """Graded-lex sort key: lower degree first, then x1-heavy monomials first."""
    return (sum(monomial), tuple(-e for e in monomial))


def monomial_product(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


class Polynomial:
    """Immutable sparse multivariate polynomial over positional variables x1..xn"""

    __slots__ = ("_n_vars", "_terms", "_hash")

    def __init__(self, n_vars: int, terms: Optional[Mapping[Sequence[int], float]] = None):
        if int(n_vars) < 1:
            raise ValueError(f"n_vars must be positive, got {n_vars}")
        n_vars = int(n_vars)
        cleaned: Dict[Monomial, float] = {}
        for monomial, coefficient in (terms or {}).items():
            key = tuple(int(e) for e in monomial)
            if len(key) != n_vars:
                raise VariableCountError(n_vars, len(key), "monomial")
            if any(e < 0 for e in key):
                raise ValueError(f"negative exponent in monomial {key}")
            value = float(coefficient)
            if abs(value) > PRUNE_THRESHOLD:
                cleaned[key] = value
        object.__setattr__(self, "_n_vars", n_vars)
        object.__setattr__(self, "_terms", cleaned)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n_vars: int) -> "Polynomial":
        return cls(n_vars)

    @classmethod
    def constant(cls, n_vars: int, value: float) -> "Polynomial":
        return cls(n_vars, {(0,) * n_vars: value})

    @classmethod
    def variable(cls, n_vars: int, index: int) -> "Polynomial":
        """The variable x_{index+1} (0-based index)."""
        if not 0 <= index < n_vars:
            raise ValueError(f"variable index {index} out of range for {n_vars} variables")
        exponents = [0] * n_vars
        exponents[index] = 1
        return cls(n_vars, {tuple(exponents): 1.0})

    @classmethod
    def monomial(cls, exponents: Sequence[int], coefficient: float = 1.0) -> "Polynomial":
        return cls(len(exponents), {tuple(exponents): coefficient})

    # ---- accessors ----------------------------------------------------

    @property
    def n_vars(self) -> int:
        return self._n_vars

    @property
    def terms(self) -> Mapping[Monomial, float]:
        return MappingProxyType(self._terms)

    def coefficient(self, monomial: Sequence[int]) -> float:
        return self._terms.get(tuple(monomial), 0.0)

    def monomials(self) -> List[Monomial]:
        """Support in graded-lex order."""
        return sorted(self._terms, key=grlex_key)

    def support(self) -> frozenset:
        return frozenset(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=0)

    @property
    def min_degree(self) -> int:
        return min((sum(m) for m in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self._terms)

    def is_homogeneous(self) -> bool:
        return len({sum(m) for m in self._terms}) <= 1

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def constant_term(self) -> float:
        return self._terms.get((0,) * self._n_vars, 0.0)

    # ---- arithmetic ---------------------------------------------------

    def _check(self, other: "Polynomial"):
        if other.n_vars != self.n_vars:
            raise VariableCountError(self.n_vars, other.n_vars)

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(self.n_vars, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        result = dict(self._terms)
        for m, c in other._terms.items():
            result[m] = result.get(m, 0.0) + c
        return Polynomial(self.n_vars, result)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n_vars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial(self.n_vars, {m: c * float(other) for m, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        result: Dict[Monomial, float] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = monomial_product(m1, m2)
                result[m] = result.get(m, 0.0) + c1 * c2
        return Polynomial(self.n_vars, result)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not isinstance(scalar, (int, float, np.floating, np.integer)):
            return NotImplemented
        return self * (1.0 / float(scalar))

    def __pow__(self, exponent: int):
        if not isinstance(exponent, (int, np.integer)) or exponent < 0:
            raise ValueError(f"power must be a non-negative integer, got {exponent}")
        result = Polynomial.constant(self.n_vars, 1.0)
        base = self
        e = int(exponent)
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n_vars == other.n_vars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.n_vars, frozenset(self._terms.items()))))
        return self._hash

    def max_abs_difference(self, other: "Polynomial") -> float:
        """Largest coefficient deviation between two polynomials."""
        self._check(other)
        keys = set(self._terms) | set(other._terms)
        return max((abs(self.coefficient(m) - other.coefficient(m)) for m in keys), default=0.0)

    def almost_equal(self, other: "Polynomial", rel_tol: float = 1e-10) -> bool:
        scale = max(1.0, self.max_abs_coefficient(), other.max_abs_coefficient())
        return self.max_abs_difference(other) <= rel_tol * scale

    # ---- evaluation ---------------------------------------------------

    def exponent_matrix(self) -> Tuple[np.ndarray, np.ndarray]:
        monomials = self.monomials()
        if not monomials:
            return np.zeros((0, self.n_vars), dtype=int), np.zeros(0)
        exponents = np.array(monomials, dtype=int)
        coefficients = np.array([self._terms[m] for m in monomials])
        return exponents, coefficients

    def evaluate(self, points: Union[Sequence[float], np.ndarray]) -> Union[float, np.ndarray]:
        """Evaluate at one point (shape (n,)) or a batch (shape (N, n))."""
        array = np.asarray(points, dtype=float)
        single = array.ndim == 1
        if single:
            array = array[None, :]
        if array.shape[1] != self.n_vars:
            raise VariableCountError(self.n_vars, array.shape[1], "point")
        exponents, coefficients = self.exponent_matrix()
        if not len(coefficients):
            values = np.zeros(array.shape[0])
        else:
            powers = np.prod(array[:, None, :] ** exponents[None, :, :], axis=2)
            values = powers @ coefficients
        return float(values[0]) if single else values

    # ---- text ---------------------------------------------------------

    def to_text(self) -> str:
        from .text_format import format_polynomial
        return format_polynomial(self)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Polynomial({self.n_vars}, '{self.to_text()}')"


PolynomialLike = Union[Polynomial, str]


def as_polynomial(value: PolynomialLike, n_vars: Optional[int] = None) -> Polynomial:
    if isinstance(value, Polynomial):
        if n_vars is not None and value.n_vars != n_vars:
            raise VariableCountError(n_vars, value.n_vars)
        return value
    from .text_format import parse_polynomial
    return parse_polynomial(value, n_vars=n_vars)


class TimeDomain(str, Enum):
    CT = "ct"
    DT = "dt"


@dataclass(frozen=True)
class VectorField:
    """Polynomial vector field xdot = f(x), one component per state"""
    components: Tuple[Polynomial, ...]

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise ValueError("vector field needs at least one component")
        n = len(components)
        for i, component in enumerate(components):
            if component.n_vars != n:
                raise VariableCountError(n, component.n_vars, f"component {i + 1}")
        object.__setattr__(self, "components", components)

    @classmethod
    def from_strings(cls, texts: Sequence[str]) -> "VectorField":
        n = len(texts)
        return cls(tuple(as_polynomial(t, n_vars=n) for t in texts))

    @property
    def n_vars(self) -> int:
        return len(self.components)

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    @property
    def is_homogeneous(self) -> bool:
        degrees = {sum(m) for c in self.components for m in c.terms}
        return len(degrees) <= 1

    def vanishes_at_origin(self) -> bool:
        return all(c.constant_term() == 0.0 for c in self.components)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        array = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([c.evaluate(array) for c in self.components], axis=1)

    def damped(self, eps: float) -> "VectorField":
        """f(x) - eps*x"""
        n = self.n_vars
        return VectorField(tuple(c - eps * Polynomial.variable(n, i) for i, c in enumerate(self.components)))

    def to_strings(self) -> List[str]:
        return [c.to_text() for c in self.components]


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Linear mode xdot = A x (continuous time) or x+ = A x (discrete time)"""
    A: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.A, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise ValueError(f"A must be a non-empty square matrix, got shape {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "A", matrix)

    @property
    def n_vars(self) -> int:
        return self.A.shape[0]

    def to_vector_field(self) -> VectorField:
        n = self.n_vars
        components = []
        for i in range(n):
            terms = {}
            for j in range(n):
                exponents = [0] * n
                exponents[j] = 1
                terms[tuple(exponents)] = self.A[i, j]
            components.append(Polynomial(n, terms))
        return VectorField(tuple(components))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.A)

    def spectral_abscissa(self) -> float:
        return float(np.max(self.eigenvalues().real))

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues())))

    def is_hurwitz(self) -> bool:
        return self.spectral_abscissa() < 0.0

    def is_schur(self) -> bool:
        return self.spectral_radius() < 1.0

    def __eq__(self, other):
        return isinstance(other, LinearSystem) and np.array_equal(self.A, other.A)

    def __hash__(self):
        return hash(self.A.tobytes())


@dataclass(frozen=True)
class SwitchedSystem:
    """Family of modes under arbitrary switching"""
    modes: Tuple[Union[VectorField, LinearSystem], ...]
    time: TimeDomain = TimeDomain.CT

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ValueError("switched system needs at least one mode")
        n = modes[0].n_vars
        for i, mode in enumerate(modes):
            if mode.n_vars != n:
                raise VariableCountError(n, mode.n_vars, f"mode {i + 1}")
        if self.time == TimeDomain.DT and not all(isinstance(m, LinearSystem) for m in modes):
            raise ValueError("discrete-time modes must be linear systems")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "time", TimeDomain(self.time))

    @property
    def n_vars(self) -> int:
        return self.modes[0].n_vars

    def vector_fields(self) -> List[VectorField]:
        return [m.to_vector_field() if isinstance(m, LinearSystem) else m for m in self.modes]


class SystemDescription(BaseModel):
    """JSON description of a system: polynomial fields or switched-linear matrices"""
    variables: int = Field(..., ge=1, description="Number of state variables x1..xn")
    vector_fields: List[List[str]] = Field(default_factory=list, description="One list of component strings per mode")
    matrices: List[List[List[float]]] = Field(default_factory=list, description="Square matrices for switched-linear modes")
    time: TimeDomain = Field(TimeDomain.CT, description="ct or dt")

    @field_validator("vector_fields")
    @classmethod
    def _check_fields(cls, value, info):
        n = info.data.get("variables")
        for mode in value:
            if n is not None and len(mode) != n:
                raise ValueError(f"vector field has {len(mode)} components, expected {n}")
        return value

    @field_validator("matrices")
    @classmethod
    def _check_matrices(cls, value, info):
        n = info.data.get("variables")
        for matrix in value:
            if len(matrix) != n or any(len(row) != n for row in matrix):
                raise ValueError(f"matrix is not {n}x{n}")
        return value

    def to_system(self) -> SwitchedSystem:
        modes: List[Union[VectorField, LinearSystem]] = []
        modes.extend(LinearSystem(np.array(m)) for m in self.matrices)
        modes.extend(VectorField.from_strings(f) for f in self.vector_fields)
        if not modes:
            raise ValueError("system description has no modes")
        return SwitchedSystem(tuple(modes), self.time)

    @classmethod
    def from_system(cls, system: Union[VectorField, LinearSystem, SwitchedSystem]) -> "SystemDescription":
        if not isinstance(system, SwitchedSystem):
            system = SwitchedSystem((system,))
        return cls(
            variables=system.n_vars,
            vector_fields=[m.to_strings() for m in system.modes if isinstance(m, VectorField)],
            matrices=[m.A.tolist() for m in system.modes if isinstance(m, LinearSystem)],
            time=system.time,
        )
