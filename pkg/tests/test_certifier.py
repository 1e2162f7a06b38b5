import numpy as np
import pytest

from certifier import (
    CertificateStructureError, CertificateVerifier, Verdict, box_points, sample_points, sphere_points,
    verify_sdpa_roundtrip,
)
from lyapunov_synth import (
    ConstraintRole, LyapunovSynthesizer, PowerCertificateSearch, certificate_from_model, certificate_to_model,
)
from poly_core import LinearSystem, VariableCountError, VectorField, parse_polynomial
from sos_compiler import build_sos_constraint, compile_program

STABLE = np.array([[-1.0, 1.0], [-1.0, -1.0]])


@pytest.fixture(scope="module")
def lyapunov_certificate():
    certificate = LyapunovSynthesizer().find_lyapunov(LinearSystem(STABLE), 2)
    assert certificate is not None
    return certificate


@pytest.fixture(scope="module")
def power_certificate():
    certificate = PowerCertificateSearch().power_certificate("x1^2 + x2^2", VectorField.from_strings(["-x1", "-x2"]), 3)
    assert certificate is not None
    return certificate


@pytest.fixture
def verifier():
    return CertificateVerifier()


class TestSampling:
    def test_deterministic(self):
        np.testing.assert_array_equal(sample_points(3, 50), sample_points(3, 50))
        assert not np.array_equal(sample_points(3, 50, seed=1), sample_points(3, 50, seed=2))

    def test_origin_excluded(self):
        points = sample_points(2, 200, radius=2.0)
        assert points.shape == (200, 2)
        assert np.min(np.linalg.norm(points, axis=1)) > 0.0
        assert np.max(np.abs(points)) <= 2.0

    def test_sphere_points_have_unit_norm(self):
        np.testing.assert_allclose(np.linalg.norm(sphere_points(4, 30), axis=1), 1.0)

    def test_empty_sample(self):
        assert box_points(2, 0).shape == (0, 2)


class TestLyapunovVerification:
    def test_found_certificate_verifies(self, verifier, lyapunov_certificate):
        report = verifier.verify_certificate(lyapunov_certificate)
        assert report.verified
        assert report.kind == "lyapunov"
        assert {b.label for b in report.blocks} == {"V", "-Vdot"}
        assert all(b.passed for b in report.blocks)
        assert report.sample_minimums["V"] > 0.0

    def test_tampered_gram_is_rejected(self, verifier, lyapunov_certificate):
        certificate = certificate_from_model(certificate_to_model(lyapunov_certificate))
        block = certificate.certificate(ConstraintRole.DECREASE, 0)
        block.gram = block.gram + np.eye(len(block.basis))
        report = verifier.verify_certificate(certificate)
        assert report.verdict == Verdict.REJECTED
        assert any("reconstruction error" in reason for reason in report.reasons)

    def test_negated_gram_is_rejected(self, verifier, lyapunov_certificate):
        certificate = certificate_from_model(certificate_to_model(lyapunov_certificate))
        block = certificate.certificate(ConstraintRole.LYAPUNOV)
        block.gram = -block.gram
        report = verifier.verify_certificate(certificate)
        assert not report.verified
        assert any("min eigenvalue" in reason for reason in report.reasons)

    def test_shift_must_be_a_norm_power(self, verifier, lyapunov_certificate):
        certificate = certificate_from_model(certificate_to_model(lyapunov_certificate))
        block = certificate.certificate(ConstraintRole.LYAPUNOV)
        block.shift = parse_polynomial("0.1*x1^2 - 0.1*x2^2")
        assert not verifier.verify_certificate(certificate).verified

    def test_missing_block(self, verifier, lyapunov_certificate):
        certificate = certificate_from_model(certificate_to_model(lyapunov_certificate))
        certificate.gram_certs = [c for c in certificate.gram_certs if c.role != ConstraintRole.DECREASE]
        with pytest.raises(CertificateStructureError) as info:
            verifier.verify_certificate(certificate)
        assert info.value.label == "decrease[1]"

    def test_variable_count_mismatch(self, verifier, lyapunov_certificate):
        with pytest.raises(VariableCountError):
            verifier.verify_certificate(lyapunov_certificate, LinearSystem(-np.eye(3)))

    def test_other_system_is_rejected(self, verifier, lyapunov_certificate):
        # the decrease block was proved for STABLE, not for its reverse
        assert not verifier.verify_certificate(lyapunov_certificate, LinearSystem(-STABLE)).verified

    def test_model_roundtrip(self, lyapunov_certificate):
        model = certificate_to_model(lyapunov_certificate)
        restored = certificate_from_model(type(model).model_validate_json(model.model_dump_json()))
        assert restored.V.almost_equal(lyapunov_certificate.V)
        assert [c.label for c in restored.gram_certs] == [c.label for c in lyapunov_certificate.gram_certs]

    def test_unknown_certificate_kind(self, lyapunov_certificate):
        data = certificate_to_model(lyapunov_certificate).model_dump()
        data["kind"] = "barrier"
        with pytest.raises(ValueError):
            type(certificate_to_model(lyapunov_certificate)).model_validate(data)


class TestPowerVerification:
    def test_identities(self, verifier, power_certificate):
        report = verifier.verify_certificate(power_certificate)
        assert report.verified, report.reasons
        assert report.kind == "power"
        assert report.identities and all(report.identities.values())

    def test_wrong_power_is_rejected(self, verifier, power_certificate):
        certificate = certificate_from_model(certificate_to_model(power_certificate))
        certificate.W = certificate.V ** 3
        report = verifier.verify_certificate(certificate)
        assert not report.verified
        assert any(reason.startswith("identity") for reason in report.reasons)


    def test_planar_certificate_survives_json(self, verifier):
        certificate = PowerCertificateSearch().planar_power_certificate(
            "x1^2 + x2^2", VectorField.from_strings(["-x1", "-x2"]), 3)
        assert certificate is not None
        model = certificate_to_model(certificate)
        assert [b.n_vars for b in model.gram_blocks] == [2, 3]
        restored = certificate_from_model(type(model).model_validate_json(model.model_dump_json()))
        assert [c.n_vars for c in restored.gram_certs] == [2, 3]
        report = verifier.verify_certificate(restored)
        assert report.verified, report.reasons

    def test_block_without_variable_count_uses_the_system(self, power_certificate):
        data = certificate_to_model(power_certificate).model_dump()
        for block in data["gram_blocks"]:
            block.pop("n_vars")
        restored = certificate_from_model(type(certificate_to_model(power_certificate)).model_validate(data))
        assert all(c.n_vars == 2 for c in restored.gram_certs)


class TestSdpaRoundtrip:
    def test_roundtrip(self, motzkin):
        assert verify_sdpa_roundtrip(compile_program([build_sos_constraint("p", motzkin)]))
