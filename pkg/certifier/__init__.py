"""
Certifier

Independent re-verification of certificates: Gram reconstruction, eigenvalue margins,
power-certificate identities and deterministic sampling, plus the SDPA round-trip check.
"""

from .models import CertifierSettings, VerificationReport, BlockCheck, Verdict, CertificateStructureError
from .sampling import sample_points, sphere_points, box_points
from .verifier import CertificateVerifier, verify_sdpa_roundtrip

__version__ = "1.0.0"
__all__ = [
    "CertifierSettings", "VerificationReport", "BlockCheck", "Verdict", "CertificateStructureError",
    "sample_points", "sphere_points", "box_points", "CertificateVerifier", "verify_sdpa_roundtrip",
]
