"""
Power certificates

For a positive definite form V with -Vdot positive definite, W = V^(2k+2) has
-Wdot = (k+1) * (-2 V Vdot) * V^(2k); searching k = 0, 1, ... for the smallest k that
makes (-2 V Vdot) V^(2k) sos yields a Lyapunov function W that is sos with an sos
decrease. The planar variant works with V + 1 and the trivariate homogenization.
"""
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from poly_core import (
    LinearSystem, Polynomial, SwitchedSystem, VectorField, as_polynomial, grlex_key, homogenize,
    lie_derivative, top_homogeneous_component,
)
from poly_core.models import Monomial, monomial_product
from sdp_solver import DimensionCapError, SolveStatus
from sos_compiler import SosCompilationError
from toolkit_config import load_config_section
from .models import ConstraintRole, GramCertificate, KOutcome, PowerCertificate, PreconditionError, SosCheckResult
from .synthesizer import LyapunovSynthesizer, run_sweep


def lift_gram(basis: Sequence[Monomial], gram: np.ndarray, root: Polynomial
              ) -> Tuple[Tuple[Monomial, ...], np.ndarray]:
    """Gram data of (z^T Q z) * root^2 over the products of z with the monomials of root."""
    root_monomials = root.monomials()
    c = np.array([root.coefficient(m) for m in root_monomials])
    products = sorted({monomial_product(a, m) for a in basis for m in root_monomials}, key=grlex_key)
    position = {m: i for i, m in enumerate(products)}
    r = len(root_monomials)
    P = np.zeros((len(products), len(basis) * r))
    for a, za in enumerate(basis):
        for j, m in enumerate(root_monomials):
            P[position[monomial_product(za, m)], a * r + j] = 1.0
    return tuple(products), P @ np.kron(gram, np.outer(c, c)) @ P.T


def _homogenized(p: Polynomial, planar: bool) -> Polynomial:
    return homogenize(p, p.degree) if planar else p


class PowerCertificateSearch:
    """k-sweeps for W = V^(2k+2) and the planar W = (V+1)^(2k+2)"""

    def __init__(self, config_file: Optional[str] = None, synthesizer: Optional[LyapunovSynthesizer] = None):
        self.synthesizer = synthesizer or LyapunovSynthesizer(config_file)
        self.settings = self.synthesizer.settings
        sampling = load_config_section("certifier", config_file)
        self.n_samples = int(sampling.get("n_samples", 1000))
        self.box_radius = float(sampling.get("box_radius", 3.0))
        self.seed = int(sampling.get("seed", 7))

        self.log_callback = None
        self.run_id = None

    def _log(self, details: dict):
        if self.log_callback and self.run_id:
            self.log_callback(self.run_id, "power_certificates", details)

    def _attach(self):
        self.synthesizer.log_callback = self.log_callback
        self.synthesizer.run_id = self.run_id

    def _require_positive(self, p: Polynomial, what: str):
        """Refute positive definiteness on the deterministic sample set."""
        from certifier.sampling import sample_points
        points = sample_points(p.n_vars, self.n_samples, self.box_radius, self.seed)
        values = np.atleast_1d(p.evaluate(points))
        worst = int(np.argmin(values))
        if values[worst] <= 0.0:
            raise PreconditionError(
                f"{what} is not positive definite: value {values[worst]:.3g} at x = {np.round(points[worst], 4).tolist()}")

    def _k_sweep(self, product: Callable[[int], Polynomial], k_max: int, mode_index: int
                 ) -> Tuple[List[KOutcome], Optional[Tuple[int, SosCheckResult]]]:
        def task(k: int):
            try:
                result = self.synthesizer.check_sos(product(k), homogeneous=True)
            except (DimensionCapError, SosCompilationError) as e:
                return KOutcome(k, SolveStatus.INDETERMINATE, mode_index, note=str(e)), None
            self._log({"stage": "k", "mode": mode_index + 1, "k": k, "status": result.status.value,
                       "note": result.note})
            return KOutcome(k, result.status, mode_index, result.margin, result.note), result

        pairs = run_sweep(task, range(k_max + 1), self.settings.jobs,
                          stop=lambda item: item[0].status == SolveStatus.FEASIBLE)
        outcomes = [outcome for outcome, _ in pairs]
        if pairs and pairs[-1][0].status == SolveStatus.FEASIBLE:
            return outcomes, (pairs[-1][0].k, pairs[-1][1])
        return outcomes, None

    def _search(self, V: Polynomial, fields: List[VectorField], k_max: Optional[int], offset: float,
                assume_positive_definite: bool) -> Tuple[Optional[PowerCertificate], List[KOutcome]]:
        self._attach()
        k_max = self.settings.k_max if k_max is None else int(k_max)
        if k_max < 0:
            raise ValueError(f"k_max must be non-negative, got {k_max}")
        if not assume_positive_definite:
            self._require_positive(V, "V")

        planar = offset != 0.0
        shifted = V + offset if planar else V
        squared = shifted * shifted

        per_mode = []
        all_outcomes: List[KOutcome] = []
        for i, f in enumerate(fields):
            decrease = -lie_derivative(V, f)
            if not assume_positive_definite:
                self._require_positive(decrease, "-Vdot" if len(fields) == 1 else f"-Vdot along mode {i + 1}")
            base = shifted * decrease * 2.0

            def product(k: int, base=base) -> Polynomial:
                return _homogenized(base * squared ** k, planar)

            outcomes, found = self._k_sweep(product, k_max, i)
            all_outcomes.extend(outcomes)
            if found is None:
                self._log({"stage": "power", "mode": i + 1, "status": "exhausted", "k_max": k_max})
                return None, all_outcomes
            per_mode.append((found[0], found[1].certificate, base))

        k = max(k_i for k_i, _, _ in per_mode)
        W = shifted ** (2 * k + 2)
        certificate = PowerCertificate(k=k, W=W, V=V, system=SwitchedSystem(tuple(fields)), offset=offset,
                                       mode_orders=[k_i for k_i, _, _ in per_mode], k_outcomes=all_outcomes)

        root = shifted ** (k + 1)
        coefficients = np.array([root.coefficient(m) for m in root.monomials()])
        certificate.gram_certs.append(GramCertificate(
            "W", tuple(root.monomials()), np.outer(coefficients, coefficients), W, role=ConstraintRole.POWER))

        for i, (k_i, gram_cert, base) in enumerate(per_mode):
            basis, gram = gram_cert.basis, gram_cert.gram
            if k_i < k:
                basis, gram = lift_gram(basis, gram, _homogenized(shifted ** (k - k_i), planar))
            decrease_W = -lie_derivative(W, fields[i])
            if not ((base * squared ** k) * float(k + 1)).almost_equal(decrease_W):
                certificate.add_error(f"mode {i + 1}: -Wdot differs from (k+1)(-2 V Vdot) V^(2k)")
            label = "-Wdot" if len(fields) == 1 else f"-Wdot[{i + 1}]"
            certificate.gram_certs.append(GramCertificate(
                label, basis, gram * float(k + 1), _homogenized(decrease_W, planar), None,
                ConstraintRole.POWER_DECREASE, i))
            certificate.add_log(f"mode {i + 1}: minimal k = {k_i}")

        self._log({"stage": "power", "k": k, "mode_orders": certificate.mode_orders, "planar": planar})
        return certificate, all_outcomes

    @staticmethod
    def _fields(systems: Union[VectorField, LinearSystem, SwitchedSystem, Sequence]) -> List[VectorField]:
        if isinstance(systems, SwitchedSystem):
            return systems.vector_fields()
        if isinstance(systems, (VectorField, LinearSystem)):
            systems = [systems]
        modes = [m if isinstance(m, (VectorField, LinearSystem)) else LinearSystem(np.asarray(m, dtype=float))
                 for m in systems]
        fields = [m.to_vector_field() if isinstance(m, LinearSystem) else m for m in modes]
        if not fields:
            raise ValueError("empty system list")
        return fields

    def search_power_certificate(self, V: Union[Polynomial, str], systems, k_max: Optional[int] = None,
                                 assume_positive_definite: bool = False
                                 ) -> Tuple[Optional[PowerCertificate], List[KOutcome]]:
        """
        Common power certificate for one or more homogeneous fields.

        Every mode gets its own minimal k_i; the certificate uses k = max k_i.

        Returns:
            (certificate or None when some mode exhausts k_max, per-(mode, k) outcomes)
        """
        fields = self._fields(systems)
        V = as_polynomial(V, fields[0].n_vars)
        if V.is_zero() or not V.is_homogeneous():
            raise PreconditionError("V must be a nonzero homogeneous polynomial")
        for i, f in enumerate(fields):
            if not f.is_homogeneous:
                raise PreconditionError(f"mode {i + 1} is not a homogeneous vector field")
        return self._search(V, fields, k_max, 0.0, assume_positive_definite)

    def power_certificate(self, V: Union[Polynomial, str], f: VectorField, k_max: Optional[int] = None,
                          assume_positive_definite: bool = False) -> Optional[PowerCertificate]:
        return self.search_power_certificate(V, [f], k_max, assume_positive_definite)[0]

    def common_power_certificate(self, V: Union[Polynomial, str], systems, k_max: Optional[int] = None,
                                 assume_positive_definite: bool = False) -> Optional[PowerCertificate]:
        return self.search_power_certificate(V, systems, k_max, assume_positive_definite)[0]

    def search_planar_power_certificate(self, V: Union[Polynomial, str], f: VectorField,
                                        k_max: Optional[int] = None, assume_positive_definite: bool = False
                                        ) -> Tuple[Optional[PowerCertificate], List[KOutcome]]:
        """
        W = (V+1)^(2k+2) for planar fields that need not be homogeneous.

        Each k tests the trivariate homogenization of (-2 (V+1) Vdot)(V+1)^(2k); the top
        homogeneous component of V must pass a strict homogeneous sos test first.
        """
        if f.n_vars != 2:
            raise PreconditionError(f"planar power certificates need 2 variables, got {f.n_vars}")
        V = as_polynomial(V, 2)
        if V.is_zero():
            raise PreconditionError("V must be nonzero")
        if not f.vanishes_at_origin():
            raise PreconditionError("vector field does not vanish at the origin")
        self._attach()
        top = top_homogeneous_component(V)
        check = self.synthesizer.check_sos(top, homogeneous=True, strict=True)
        if check.status != SolveStatus.FEASIBLE:
            raise PreconditionError(
                f"top homogeneous component {top.to_text()} is not certifiably positive definite "
                f"({check.status.value}); it may have zeros")
        return self._search(V, [f], k_max, 1.0, assume_positive_definite)

    def planar_power_certificate(self, V: Union[Polynomial, str], f: VectorField, k_max: Optional[int] = None,
                                 assume_positive_definite: bool = False) -> Optional[PowerCertificate]:
        return self.search_planar_power_certificate(V, f, k_max, assume_positive_definite)[0]
