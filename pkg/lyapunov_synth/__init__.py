"""
Lyapunov Synthesis

Degree-swept SOS Lyapunov search (V sos or top homogeneous component sos), common
Lyapunov functions for switched systems, power certificates W = V^(2k+2) found by
k-sweeps, and the closed-form square and gradient-system constructions.
"""

from .models import (
    SearchMode, ConstraintRole, PreconditionError, SearchSettings, GramCertificate, SosCheckResult,
    LyapunovCertificate, PowerCertificate, KOutcome, DegreeOutcome, SweepResult,
    GramBlockModel, CertificateModel, certificate_to_model, certificate_from_model, as_switched,
)
from .synthesizer import LyapunovSynthesizer, as_system, run_sweep
from .power_certificates import PowerCertificateSearch, lift_gram
from .constructions import square_lyapunov, gradient_system

__version__ = "1.0.0"
__all__ = [
    "SearchMode", "ConstraintRole", "PreconditionError", "SearchSettings", "GramCertificate",
    "SosCheckResult", "LyapunovCertificate", "PowerCertificate", "KOutcome", "DegreeOutcome",
    "SweepResult", "GramBlockModel", "CertificateModel", "certificate_to_model",
    "certificate_from_model", "as_switched", "LyapunovSynthesizer", "as_system", "run_sweep",
    "PowerCertificateSearch", "lift_gram", "square_lyapunov", "gradient_system",
]
