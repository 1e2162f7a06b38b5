"""
SOS Lyapunov search for polynomial fields and switched systems
"""
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from poly_core import (
    LinearSystem, Polynomial, SwitchedSystem, TimeDomain, VectorField, as_polynomial,
    discrete_difference, lie_derivative,
)
from sdp_solver import DimensionCapError, SdpSolution, SdpSolver, SolverSettings, SolveStatus
from sos_compiler import (
    AffinePolynomial, BasisReduction, NormalizationRule, PolynomialTemplate, SdpProblem,
    SosCompilationError, SosProgram, build_sos_constraint, compile_program,
)
from toolkit_config import load_config_section
from .models import (
    ConstraintRole, DegreeOutcome, GramCertificate, LyapunovCertificate, SearchMode,
    SearchSettings, SosCheckResult, SweepResult, as_switched,
)

T = TypeVar("T")
SystemLike = Union[VectorField, LinearSystem, SwitchedSystem, Sequence]


def run_sweep(task: Callable[[int], T], indices: Sequence[int], jobs: int = 1,
              stop: Optional[Callable[[T], bool]] = None) -> List[T]:
    """
    Run `task` over `indices`, results in index order.

    Sequential runs end at the first result satisfying `stop`. Concurrent runs solve
    every index and then cut after the first stopping result, so both return the same list.
    """
    indices = list(indices)
    if jobs <= 1 or len(indices) <= 1:
        results = []
        for index in indices:
            results.append(task(index))
            if stop is not None and stop(results[-1]):
                break
        return results

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(task, indices))
    if stop is not None:
        for position, result in enumerate(results):
            if stop(result):
                return results[:position + 1]
    return results


def as_system(system: SystemLike, time_domain: Union[TimeDomain, str] = TimeDomain.CT) -> SwitchedSystem:
    """Wrap a field, a matrix, a list of modes or a SwitchedSystem as a SwitchedSystem."""
    time_domain = TimeDomain(time_domain)
    if isinstance(system, (VectorField, LinearSystem, SwitchedSystem)):
        return as_switched(system, time_domain)
    if isinstance(system, np.ndarray) and system.ndim == 2:
        return SwitchedSystem((LinearSystem(system),), time_domain)
    modes = [m if isinstance(m, (VectorField, LinearSystem)) else LinearSystem(np.asarray(m, dtype=float))
             for m in system]
    if not modes:
        raise ValueError("empty system list")
    return SwitchedSystem(tuple(modes), time_domain)


class LyapunovSynthesizer:
    """Template Lyapunov search: one SDP per (system, degree, mode)"""

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file
        self.settings = SearchSettings(**load_config_section("search", config_file))
        self.solver_settings = SolverSettings(**load_config_section("solver", config_file))

        # Logging callback for detailed logs
        self.log_callback = None
        self.run_id = None
        self._verifier = None

    def _log(self, details: dict):
        if self.log_callback and self.run_id:
            self.log_callback(self.run_id, "lyapunov_synth", details)

    def _solver(self) -> SdpSolver:
        solver = SdpSolver(self.solver_settings)
        solver.log_callback = self.log_callback
        solver.run_id = self.run_id
        return solver

    def _verify(self, certificate):
        if self._verifier is None:
            from certifier import CertificateVerifier
            self._verifier = CertificateVerifier(self.config_file)
            self._verifier.log_callback = self.log_callback
            self._verifier.run_id = self.run_id
        return self._verifier.verify_certificate(certificate)

    # ---- plain sos checks ---------------------------------------------

    def check_sos(self, p: Union[Polynomial, str], homogeneous: Optional[bool] = None, strict: bool = False,
                  reduction: Optional[Union[BasisReduction, str]] = None) -> SosCheckResult:
        """
        Decide whether p is a sum of squares.

        Args:
            p: polynomial or polynomial text
            homogeneous: restrict the Gram basis to one degree (inferred from p when None)
            strict: require p - eps*(x1^2+...+xn^2)^h sos instead, certifying positive definiteness

        Returns:
            SosCheckResult carrying the Gram certificate when Feasible. Odd-degree input
            is Infeasible without a solve.
        """
        p = as_polynomial(p)
        if p.degree % 2:
            note = f"odd degree {p.degree}: not a sum of squares"
            self._log({"stage": "check_sos", "status": SolveStatus.INFEASIBLE.value, "note": note})
            return SosCheckResult(SolveStatus.INFEASIBLE, note=note)

        reduction = BasisReduction(reduction or self.settings.basis_reduction)
        constraint = build_sos_constraint("p", p, homogeneous, reduction,
                                          epsilon=self.settings.epsilon if strict else None)
        problem = compile_program([constraint])
        self._log({"stage": "compile", "blocks": problem.blocks, "constraints": problem.n_constraints})
        solution = self._solver().solve(problem)

        certificate = None
        if solution.status == SolveStatus.FEASIBLE:
            certificate = GramCertificate("p", constraint.gram_basis, solution.gram(0), p, constraint.shift)
        return SosCheckResult(solution.status, certificate, solution, solution.note)

    # ---- Lyapunov programs --------------------------------------------

    @staticmethod
    def _validate(system: SwitchedSystem, degree: int):
        if degree < 2 or degree % 2:
            raise ValueError(f"Lyapunov degree must be even and at least 2, got {degree}")
        for i, field in enumerate(system.vector_fields()):
            if not field.vanishes_at_origin():
                raise ValueError(f"mode {i + 1} does not vanish at the origin")

    def _homogeneous_template(self, system: SwitchedSystem) -> bool:
        return self.settings.homogeneous_templates and all(f.is_homogeneous for f in system.vector_fields())

    @staticmethod
    def decrease_target(V: AffinePolynomial, mode: Union[VectorField, LinearSystem],
                        time_domain: TimeDomain) -> AffinePolynomial:
        """-<grad V, f> in continuous time, V(x) - V(Ax) in discrete time."""
        if time_domain == TimeDomain.DT:
            return V.map(lambda p: discrete_difference(p, mode))
        field = mode.to_vector_field() if isinstance(mode, LinearSystem) else mode
        return -V.map(lambda p: lie_derivative(p, field))

    def compile_search(self, system: SystemLike, degree: int, mode: Union[SearchMode, str] = SearchMode.V_SOS,
                       require_sos: bool = True
                       ) -> Tuple[SosProgram, PolynomialTemplate, List[Tuple[ConstraintRole, Optional[int]]], SdpProblem]:
        """
        Build the template program without solving it.

        Returns:
            (program, template, (role, mode index) per block, compiled problem)
        """
        system = as_system(system)
        mode = SearchMode(mode)
        self._validate(system, degree)

        homogeneous = self._homogeneous_template(system)
        program = SosProgram(system.n_vars, NormalizationRule.epsilon_pd(self.settings.epsilon),
                             self.settings.basis_reduction)
        template = program.new_template("V", degree, homogeneous=homogeneous, include_constant=False)
        V = template.as_affine()

        roles: List[Tuple[ConstraintRole, Optional[int]]] = []
        if require_sos:
            if mode == SearchMode.THC_SOS:
                program.add_sos_constraint("thc(V)", template.top_component(), homogeneous=True, strict=True)
                roles.append((ConstraintRole.TOP_COMPONENT, None))
            else:
                program.add_sos_constraint("V", V, strict=True)
                roles.append((ConstraintRole.LYAPUNOV, None))

        # with V shifted, a plain sos decrease already rules out V = 0
        base = "-Vdot" if system.time == TimeDomain.CT else "V-V(Ax)"
        for i, m in enumerate(system.modes):
            label = base if len(system.modes) == 1 else f"{base}[{i + 1}]"
            program.add_sos_constraint(label, self.decrease_target(V, m, system.time), strict=not require_sos)
            roles.append((ConstraintRole.DECREASE, i))

        problem = program.compile()
        self._log({
            "stage": "compile", "degree": degree, "mode": mode.value, "blocks": problem.blocks,
            "constraints": problem.n_constraints, "free": problem.n_free,
        })
        return program, template, roles, problem

    def _certificate(self, system: SwitchedSystem, program: SosProgram, template: PolynomialTemplate,
                     roles, solution: SdpSolution, mode: SearchMode, degree: int,
                     decrease_only: bool) -> LyapunovCertificate:
        values = solution.free_values
        certs = [
            GramCertificate(c.label, c.gram_basis, solution.gram(b), c.target.evaluate(values), c.shift, role, index)
            for b, (c, (role, index)) in enumerate(zip(program.compiled_constraints, roles))
        ]
        certificate = LyapunovCertificate(V=template.evaluate(values), mode=mode, degree=degree,
                                          system=system, gram_certs=certs, decrease_only=decrease_only)
        certificate.add_log(f"solver: {solution.iterations} iterations, margin {solution.margin}")
        return certificate

    def search_lyapunov(self, system: SystemLike, degree: int, mode: Union[SearchMode, str] = SearchMode.V_SOS,
                        require_sos: bool = True) -> DegreeOutcome:
        """One degree of the search, keeping Indeterminate distinct from Infeasible."""
        started = time.perf_counter()
        system = as_system(system)
        mode = SearchMode(mode)
        program, template, roles, problem = self.compile_search(system, degree, mode, require_sos)
        solution = self._solver().solve(problem)
        outcome = DegreeOutcome(degree, solution.status, margin=solution.margin, note=solution.note)

        if solution.status == SolveStatus.FEASIBLE:
            certificate = self._certificate(system, program, template, roles, solution, mode, degree,
                                            decrease_only=not require_sos)
            if self.settings.verify_certificates:
                report = self._verify(certificate)
                if not report.verified:
                    outcome.status = SolveStatus.INDETERMINATE
                    outcome.note = "certificate rejected: " + "; ".join(report.reasons)
                    certificate = None
                else:
                    certificate.add_log("verified")
            outcome.certificate = certificate

        outcome.seconds = time.perf_counter() - started
        self._log({"stage": "degree", "degree": degree, "mode": mode.value,
                   "status": outcome.status.value, "seconds": round(outcome.seconds, 3), "note": outcome.note})
        return outcome

    def find_lyapunov(self, f: Union[VectorField, LinearSystem], degree: int,
                      mode: Union[SearchMode, str] = SearchMode.V_SOS) -> Optional[LyapunovCertificate]:
        """V of the given degree with {V or thc(V)} sos under the EpsilonPD shift and -Vdot sos."""
        return self.search_lyapunov(f, degree, mode).certificate

    def find_common_lyapunov(self, systems: SystemLike, degree: int,
                             time_domain: Union[TimeDomain, str] = TimeDomain.CT) -> Optional[LyapunovCertificate]:
        """One V whose decrease condition is sos along every mode."""
        return self.search_lyapunov(as_system(systems, time_domain), degree, SearchMode.V_SOS).certificate

    def find_decrease_only(self, systems: SystemLike, degree: int,
                           time_domain: Union[TimeDomain, str] = TimeDomain.CT) -> Optional[LyapunovCertificate]:
        """Only the decrease condition sos; no condition on V itself."""
        return self.search_lyapunov(as_system(systems, time_domain), degree, SearchMode.V_SOS,
                                    require_sos=False).certificate

    def sweep_degrees(self, system: SystemLike, degree_max: Optional[int] = None,
                      mode: Union[SearchMode, str] = SearchMode.V_SOS, degree_min: int = 2,
                      jobs: Optional[int] = None, require_sos: bool = True,
                      stop_at_first: bool = False) -> SweepResult:
        """
        Search every even degree from degree_min to degree_max.

        Failures of single degrees (dimension cap, compilation) are recorded as
        Indeterminate outcomes and in `errors`; the sweep continues.
        """
        system = as_system(system)
        mode = SearchMode(mode)
        self._validate(system, 2)
        degree_max = degree_max or self.settings.degree_max
        start = max(2, degree_min + degree_min % 2)

        def task(degree: int) -> Tuple[DegreeOutcome, str]:
            try:
                return self.search_lyapunov(system, degree, mode, require_sos), ""
            except (DimensionCapError, SosCompilationError) as e:
                return DegreeOutcome(degree, SolveStatus.INDETERMINATE, note=str(e)), f"degree {degree}: {e}"

        stop = (lambda item: item[0].certificate is not None) if stop_at_first else None
        result = SweepResult(mode)
        for outcome, error in run_sweep(task, range(start, degree_max + 1, 2), jobs or self.settings.jobs, stop):
            result.outcomes.append(outcome)
            if error:
                result.add_error(error)
        self._log({"stage": "sweep", "mode": mode.value, "minimal_degree": result.minimal_degree,
                   "errors": len(result.errors)})
        return result
