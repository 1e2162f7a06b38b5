"""
Solver-independent re-verification of Lyapunov and power certificates
"""
from typing import Dict, Optional, Tuple, Union

import numpy as np

from poly_core import (
    LinearSystem, Polynomial, SwitchedSystem, TimeDomain, VariableCountError, VectorField,
    discrete_difference, homogenize, lie_derivative, norm_power, top_homogeneous_component,
)
from lyapunov_synth.models import (
    ConstraintRole, GramCertificate, LyapunovCertificate, PowerCertificate, SearchMode, as_switched,
)
from sos_compiler import SdpProblem, from_sdpa, to_sdpa
from toolkit_config import load_config_section
from .models import BlockCheck, CertificateStructureError, CertifierSettings, VerificationReport
from .sampling import sample_points

Certificate = Union[LyapunovCertificate, PowerCertificate]


def _decrease(V: Polynomial, mode: Union[VectorField, LinearSystem], time_domain: TimeDomain) -> Polynomial:
    if time_domain == TimeDomain.DT:
        return discrete_difference(V, mode)
    field = mode.to_vector_field() if isinstance(mode, LinearSystem) else mode
    return -lie_derivative(V, field)


def _shift_is_norm_power(shift: Optional[Polynomial]) -> bool:
    """A legitimate shift is eps*(x1^2+...+xn^2)^h with eps >= 0."""
    if shift is None or shift.is_zero():
        return True
    h = shift.degree // 2
    reference = norm_power(shift.n_vars, h)
    eps = shift.coefficient(reference.monomials()[-1])
    return eps >= 0.0 and shift.almost_equal(reference * eps)


class CertificateVerifier:
    """Re-derives every certified polynomial from V and the system and checks the Gram data against it"""

    def __init__(self, config_file: Optional[str] = None):
        self.settings = CertifierSettings(**load_config_section("certifier", config_file))
        self.log_callback = None
        self.run_id = None

    def _log(self, details: dict):
        if self.log_callback and self.run_id:
            self.log_callback(self.run_id, "certifier", details)

    # ---- expected polynomials ------------------------------------------

    @staticmethod
    def _lyapunov_targets(cert: LyapunovCertificate, system: SwitchedSystem
                          ) -> Dict[Tuple[ConstraintRole, Optional[int]], Tuple[str, Polynomial]]:
        targets = {}
        if not cert.decrease_only:
            if cert.mode == SearchMode.THC_SOS:
                targets[(ConstraintRole.TOP_COMPONENT, None)] = ("thc(V)", top_homogeneous_component(cert.V))
            else:
                targets[(ConstraintRole.LYAPUNOV, None)] = ("V", cert.V)
        for i, mode in enumerate(system.modes):
            targets[(ConstraintRole.DECREASE, i)] = (f"decrease[{i + 1}]", _decrease(cert.V, mode, system.time))
        return targets

    @staticmethod
    def _power_targets(cert: PowerCertificate, system: SwitchedSystem
                       ) -> Dict[Tuple[ConstraintRole, Optional[int]], Tuple[str, Polynomial]]:
        targets = {(ConstraintRole.POWER, None): ("W", cert.W)}
        for i, field in enumerate(system.vector_fields()):
            targets[(ConstraintRole.POWER_DECREASE, i)] = (f"-Wdot[{i + 1}]", -lie_derivative(cert.W, field))
        return targets

    # ---- checks ---------------------------------------------------------

    def _check_block(self, block: GramCertificate, expected: Polynomial, report: VerificationReport):
        s = self.settings
        gram = np.asarray(block.gram, dtype=float)
        size = len(block.basis)
        check = BlockCheck(label=block.label, role=block.role, mode_index=block.mode_index, size=size)
        if gram.shape != (size, size):
            check.passed = False
            report.blocks.append(check)
            report.reject(f"{block.label}: Gram matrix shape {gram.shape} does not match basis size {size}")
            return

        if block.n_vars == expected.n_vars + 1:
            # trivariate homogenization of a planar target
            degree = 2 * max((sum(m) for m in block.basis), default=0)
            if degree < expected.degree:
                check.passed = False
                report.blocks.append(check)
                report.reject(f"{block.label}: basis too small for the homogenized target")
                return
            expected = homogenize(expected, degree)
        elif block.n_vars != expected.n_vars:
            raise VariableCountError(expected.n_vars, block.n_vars, f"Gram block '{block.label}'")

        if not _shift_is_norm_power(block.shift):
            check.passed = False
            report.reject(f"{block.label}: shift is not a nonnegative multiple of a norm power")

        check.reconstruction_error = block.certified_polynomial().max_abs_difference(expected)
        check.min_eigenvalue = block.min_eigenvalue
        check.trace = block.trace
        if check.reconstruction_error > s.reconstruction_tol:
            check.passed = False
            report.reject(f"{block.label}: reconstruction error {check.reconstruction_error:.3g} "
                          f"exceeds {s.reconstruction_tol:g}")
        floor = -s.eig_rel_tol * max(1.0, abs(check.trace))
        if check.min_eigenvalue < floor:
            check.passed = False
            report.reject(f"{block.label}: Gram min eigenvalue {check.min_eigenvalue:.3g} below {floor:.3g}")
        report.blocks.append(check)

    def _check_samples(self, polynomials: Dict[str, Polynomial], n_vars: int, report: VerificationReport):
        s = self.settings
        points = sample_points(n_vars, s.n_samples, s.box_radius, s.seed)
        report.n_samples = int(points.shape[0])
        if not report.n_samples:
            return
        for name, p in polynomials.items():
            values = np.atleast_1d(p.evaluate(points))
            worst = float(np.min(values))
            report.sample_minimums[name] = worst
            if worst < -s.sample_tol:
                at = points[int(np.argmin(values))]
                report.reject(f"{name} is {worst:.3g} at sample x = {np.round(at, 4).tolist()}")

    def _check_power_identities(self, cert: PowerCertificate, system: SwitchedSystem, report: VerificationReport):
        tol = self.settings.identity_rel_tol
        shifted = cert.base
        k = cert.k
        report.identities["W == base^(2k+2)"] = cert.W.almost_equal(shifted ** (2 * k + 2), tol)
        power = shifted ** (2 * k + 1) * float(2 * k + 2)
        for i, field in enumerate(system.vector_fields()):
            lhs = -lie_derivative(cert.W, field)
            rhs = power * (-lie_derivative(cert.V, field))
            report.identities[f"-Wdot == (2k+2) base^(2k+1) (-Vdot) [{i + 1}]"] = lhs.almost_equal(rhs, tol)
        for name, holds in report.identities.items():
            if not holds:
                report.reject(f"identity {name} fails")
        if cert.mode_orders and max(cert.mode_orders) != k:
            report.reject(f"k = {k} is not the largest per-mode order {cert.mode_orders}")

    def verify_certificate(self, cert: Certificate,
                           system: Optional[Union[VectorField, LinearSystem, SwitchedSystem]] = None
                           ) -> VerificationReport:
        """
        Check a certificate without consulting the SDP solver.

        Every constraint polynomial is recomputed from V (or W) and the system, then
        compared with z^T Q z + shift of its Gram block; Gram blocks must be PSD within
        eig_rel_tol * trace; V and the decrease polynomials are sampled away from the origin.

        Raises:
            VariableCountError: certificate and system disagree on the variable count
            CertificateStructureError: a declared constraint has no Gram block
        """
        s = self.settings
        system = cert.system if system is None else as_switched(system, cert.system.time)
        if system.n_vars != cert.V.n_vars:
            raise VariableCountError(system.n_vars, cert.V.n_vars, "certificate V")

        power = isinstance(cert, PowerCertificate)
        report = VerificationReport(kind="power" if power else "lyapunov", tolerances={
            "reconstruction_tol": s.reconstruction_tol, "eig_rel_tol": s.eig_rel_tol,
            "sample_tol": s.sample_tol, "identity_rel_tol": s.identity_rel_tol,
        })

        if power:
            targets = self._power_targets(cert, system)
            self._check_power_identities(cert, system, report)
        else:
            targets = self._lyapunov_targets(cert, system)
            if cert.mode == SearchMode.THC_SOS and cert.V.constant_term() != 0.0:
                report.reject("V has a constant term in top-component mode")

        blocks = {(c.role, c.mode_index): c for c in cert.gram_certs}
        for key, (name, expected) in targets.items():
            if key not in blocks:
                raise CertificateStructureError(name)
            self._check_block(blocks[key], expected, report)

        sampled: Dict[str, Polynomial] = {"V": cert.V}
        for key, (name, expected) in targets.items():
            if key[0] in (ConstraintRole.DECREASE, ConstraintRole.POWER, ConstraintRole.POWER_DECREASE):
                sampled[name] = expected
        if power:
            for i, field in enumerate(system.vector_fields()):
                sampled[f"-Vdot[{i + 1}]"] = -lie_derivative(cert.V, field)
        self._check_samples(sampled, system.n_vars, report)

        report.add_log(f"{len(report.blocks)} Gram blocks, {report.n_samples} samples")
        self._log({"stage": "verify", "kind": report.kind, "verdict": report.verdict.value,
                   "reasons": report.reasons})
        return report


def verify_sdpa_roundtrip(problem: SdpProblem) -> bool:
    """Export to SDPA text, parse it back and compare field by field."""
    return from_sdpa(to_sdpa(problem)) == problem
