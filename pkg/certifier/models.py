"""
Data models for certificate verification
"""
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from lyapunov_synth.models import ConstraintRole


class CertificateStructureError(ValueError):
    """A constraint the certificate declares has no Gram block"""

    def __init__(self, label: str):
        super().__init__(f"certificate has no Gram block for constraint '{label}'")
        self.label = label


class Verdict(str, Enum):
    VERIFIED = "verified"
    REJECTED = "rejected"


class CertifierSettings(BaseModel):
    """Tolerances of the independent re-check, one order tighter than the solver where possible"""
    reconstruction_tol: float = Field(1e-6, gt=0, description="Max abs coefficient deviation of z^T Q z + shift")
    eig_rel_tol: float = Field(1e-8, gt=0, description="Allowed negative Gram eigenvalue relative to the trace")
    sample_tol: float = Field(1e-9, ge=0, description="Allowed negative value at a sample point")
    identity_rel_tol: float = Field(1e-10, gt=0, description="Relative tolerance of the power-certificate identities")
    n_samples: int = Field(1000, ge=0)
    box_radius: float = Field(3.0, gt=0)
    seed: int = 7


class BlockCheck(BaseModel):
    label: str
    role: ConstraintRole
    mode_index: Optional[int] = None
    size: int = 0
    reconstruction_error: float = 0.0
    min_eigenvalue: float = 0.0
    trace: float = 0.0
    passed: bool = True


class VerificationReport(BaseModel):
    """Outcome of re-checking one certificate without the SDP solver"""
    kind: str = Field(..., description="'lyapunov' or 'power'")
    verdict: Verdict = Verdict.VERIFIED
    reasons: List[str] = Field(default_factory=list)
    blocks: List[BlockCheck] = Field(default_factory=list)
    identities: Dict[str, bool] = Field(default_factory=dict)
    sample_minimums: Dict[str, float] = Field(default_factory=dict, description="Smallest sampled value per checked polynomial")
    n_samples: int = 0
    tolerances: Dict[str, float] = Field(default_factory=dict)
    processing_log: List[str] = Field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.verdict == Verdict.VERIFIED

    def reject(self, reason: str):
        self.verdict = Verdict.REJECTED
        self.reasons.append(reason)

    def add_log(self, message: str):
        self.processing_log.append(message)
