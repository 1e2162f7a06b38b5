"""
Data models for Lyapunov certificate synthesis
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator

from poly_core import (
    LinearSystem, Monomial, Polynomial, SwitchedSystem, SystemDescription, TimeDomain,
    VectorField, format_monomial, parse_polynomial,
)
from sdp_solver import SdpSolution, SolveStatus
from sos_compiler import BasisReduction, reconstruct


class SearchMode(str, Enum):
    V_SOS = "v-sos"
    THC_SOS = "thc-sos"


class ConstraintRole(str, Enum):
    SOS = "sos"                     # a plain polynomial claimed sos
    LYAPUNOV = "lyapunov"           # V sos
    TOP_COMPONENT = "top-component"  # t.h.c.(V) sos
    DECREASE = "decrease"           # -Vdot sos, or V(x) - V(Ax) sos
    POWER = "power"                 # W = (base)^(2k+2), an even power
    POWER_DECREASE = "power-decrease"  # -Wdot sos


class PreconditionError(ValueError):
    """Hypotheses of a construction are violated"""


class SearchSettings(BaseModel):
    """Defaults for degree and k sweeps"""
    epsilon: float = Field(1e-4, gt=0, description="EpsilonPD shift")
    k_max: int = Field(5, ge=0)
    degree_max: int = Field(8, ge=2)
    homogeneous_templates: bool = Field(True, description="Homogeneous templates for homogeneous systems")
    basis_reduction: BasisReduction = Field(BasisReduction.DIAGONAL)
    jobs: int = Field(1, ge=1, description="Concurrent solves in sweeps")
    verify_certificates: bool = True

    @field_validator("degree_max")
    @classmethod
    def _even(cls, value):
        if value % 2:
            raise ValueError("degree_max must be even")
        return value


@dataclass
class GramCertificate:
    """z^T Q z == target - shift with Q PSD"""
    label: str
    basis: Tuple[Monomial, ...]
    gram: np.ndarray
    target: Polynomial
    shift: Optional[Polynomial] = None
    role: ConstraintRole = ConstraintRole.SOS
    mode_index: Optional[int] = None

    @property
    def n_vars(self) -> int:
        return self.target.n_vars

    @property
    def min_eigenvalue(self) -> float:
        if self.gram.size == 0:
            return 0.0
        return float(np.linalg.eigvalsh((self.gram + self.gram.T) / 2)[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.gram)) if self.gram.size else 0.0

    def reconstruct(self) -> Polynomial:
        return reconstruct(self.basis, self.gram, self.n_vars)

    def certified_polynomial(self) -> Polynomial:
        """The polynomial the Gram data actually proves nonnegative: z^T Q z + shift."""
        p = self.reconstruct()
        return p if self.shift is None else p + self.shift

    def scaled(self, factor: float, target: Polynomial, label: Optional[str] = None,
               role: Optional[ConstraintRole] = None) -> "GramCertificate":
        shift = None if self.shift is None else self.shift * factor
        return GramCertificate(label or self.label, self.basis, self.gram * factor, target, shift,
                               role or self.role, self.mode_index)

    def to_model(self) -> "GramBlockModel":
        return GramBlockModel(
            label=self.label, role=self.role, mode_index=self.mode_index, n_vars=self.n_vars,
            basis=[format_monomial(m) for m in self.basis],
            gram=self.gram.tolist(), target=self.target.to_text(),
            shift=None if self.shift is None else self.shift.to_text(),
            min_eigenvalue=self.min_eigenvalue,
        )

    @classmethod
    def from_model(cls, model: "GramBlockModel", n_vars: int) -> "GramCertificate":
        n_vars = model.n_vars or n_vars
        basis = tuple(parse_polynomial(text, n_vars).monomials()[0] for text in model.basis)
        gram = np.array(model.gram, dtype=float).reshape(len(basis), len(basis))
        shift = None if model.shift is None else parse_polynomial(model.shift, n_vars)
        return cls(model.label, basis, gram, parse_polynomial(model.target, n_vars), shift,
                   model.role, model.mode_index)


@dataclass
class SosCheckResult:
    status: SolveStatus
    certificate: Optional[GramCertificate] = None
    solution: Optional[SdpSolution] = None
    note: str = ""

    @property
    def is_feasible(self) -> bool:
        return self.status == SolveStatus.FEASIBLE

    @property
    def margin(self) -> Optional[float]:
        return None if self.solution is None else self.solution.margin


@dataclass
class LyapunovCertificate:
    """A Lyapunov function with Gram certificates for every sos constraint"""
    V: Polynomial
    mode: SearchMode
    degree: int
    system: SwitchedSystem
    gram_certs: List[GramCertificate] = field(default_factory=list)
    decrease_only: bool = False
    processing_log: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    def add_log(self, message: str):
        self.processing_log.append(message)

    def add_error(self, error: str):
        self.errors.append(error)

    @property
    def time(self) -> TimeDomain:
        return self.system.time

    @property
    def margins(self) -> Dict[str, float]:
        return {c.label: c.min_eigenvalue for c in self.gram_certs}

    def certificate(self, role: ConstraintRole, mode_index: Optional[int] = None) -> Optional[GramCertificate]:
        for cert in self.gram_certs:
            if cert.role == role and cert.mode_index == mode_index:
                return cert
        return None


@dataclass
class KOutcome:
    k: int
    status: SolveStatus
    mode_index: int = 0
    margin: Optional[float] = None
    note: str = ""


@dataclass
class PowerCertificate:
    """W = (V + offset)^(2k+2) with an sos certificate for -Wdot along every mode"""
    k: int
    W: Polynomial
    V: Polynomial
    system: SwitchedSystem
    offset: float = 0.0
    gram_certs: List[GramCertificate] = field(default_factory=list)
    mode_orders: List[int] = field(default_factory=list)
    k_outcomes: List[KOutcome] = field(default_factory=list)
    processing_log: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    def add_log(self, message: str):
        self.processing_log.append(message)

    def add_error(self, error: str):
        self.errors.append(error)

    @property
    def base(self) -> Polynomial:
        return self.V + self.offset if self.offset else self.V

    @property
    def planar(self) -> bool:
        return self.offset != 0.0

    @property
    def margins(self) -> Dict[str, float]:
        return {c.label: c.min_eigenvalue for c in self.gram_certs}


@dataclass
class DegreeOutcome:
    degree: int
    status: SolveStatus
    certificate: Optional[LyapunovCertificate] = None
    margin: Optional[float] = None
    seconds: float = 0.0
    note: str = ""


@dataclass
class SweepResult:
    mode: SearchMode
    outcomes: List[DegreeOutcome] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    def add_error(self, error: str):
        self.errors.append(error)

    @property
    def minimal_degree(self) -> Optional[int]:
        feasible = [o.degree for o in self.outcomes if o.status == SolveStatus.FEASIBLE and o.certificate]
        return min(feasible) if feasible else None

    @property
    def certificate(self) -> Optional[LyapunovCertificate]:
        degree = self.minimal_degree
        return next((o.certificate for o in self.outcomes if o.degree == degree), None)

    def status_by_degree(self) -> Dict[int, SolveStatus]:
        return {o.degree: o.status for o in self.outcomes}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{
            "degree": o.degree, "status": o.status.value.upper(),
            "margin": o.margin, "seconds": round(o.seconds, 2), "note": o.note,
        } for o in self.outcomes])


# ---- JSON schemas ------------------------------------------------------------


class GramBlockModel(BaseModel):
    label: str
    role: ConstraintRole = ConstraintRole.SOS
    mode_index: Optional[int] = None
    n_vars: Optional[int] = Field(None, ge=1, description="Variables of the block polynomials")
    basis: List[str] = Field(default_factory=list, description="Basis monomials in the polynomial text format")
    gram: List[List[float]] = Field(default_factory=list, description="Row-major Gram matrix")
    target: str = Field(..., description="Polynomial the block certifies")
    shift: Optional[str] = Field(None, description="EpsilonPD shift subtracted before the Gram identity")
    min_eigenvalue: float = 0.0


class CertificateModel(BaseModel):
    """Certificate JSON: Lyapunov certificates and power certificates share one schema"""
    kind: str = Field(..., description="'lyapunov' or 'power'")
    V: str
    mode: Optional[SearchMode] = None
    degree: Optional[int] = None
    decrease_only: bool = False
    k: Optional[int] = None
    W: Optional[str] = None
    offset: float = 0.0
    mode_orders: List[int] = Field(default_factory=list)
    gram_blocks: List[GramBlockModel] = Field(default_factory=list)
    margins: Dict[str, float] = Field(default_factory=dict)
    system: SystemDescription

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, value):
        if value not in ("lyapunov", "power"):
            raise ValueError(f"unknown certificate kind '{value}'")
        return value


def certificate_to_model(cert: Union[LyapunovCertificate, PowerCertificate]) -> CertificateModel:
    blocks = [c.to_model() for c in cert.gram_certs]
    system = SystemDescription.from_system(cert.system)
    if isinstance(cert, PowerCertificate):
        return CertificateModel(kind="power", V=cert.V.to_text(), k=cert.k, W=cert.W.to_text(),
                                offset=cert.offset, mode_orders=cert.mode_orders, gram_blocks=blocks,
                                margins=cert.margins, system=system)
    return CertificateModel(kind="lyapunov", V=cert.V.to_text(), mode=cert.mode, degree=cert.degree,
                            decrease_only=cert.decrease_only, gram_blocks=blocks,
                            margins=cert.margins, system=system)


def certificate_from_model(model: CertificateModel) -> Union[LyapunovCertificate, PowerCertificate]:
    system = model.system.to_system()
    n = system.n_vars
    certs = [GramCertificate.from_model(block, n) for block in model.gram_blocks]
    V = parse_polynomial(model.V, n)
    if model.kind == "power":
        return PowerCertificate(k=model.k or 0, W=parse_polynomial(model.W or "0", n), V=V, system=system,
                                offset=model.offset, gram_certs=certs, mode_orders=list(model.mode_orders))
    return LyapunovCertificate(V=V, mode=model.mode or SearchMode.V_SOS, degree=model.degree or V.degree,
                               system=system, gram_certs=certs, decrease_only=model.decrease_only)


def as_switched(system: Union[VectorField, LinearSystem, SwitchedSystem],
                time: TimeDomain = TimeDomain.CT) -> SwitchedSystem:
    if isinstance(system, SwitchedSystem):
        return system
    return SwitchedSystem((system,), time)
