import numpy as np
import pytest

from poly_core import parse_polynomial
from sdp_solver import (
    DimensionCapError, InteriorPointMethod, SdpSolver, SolverSettings, SolveStatus, is_positive_definite,
    max_step, min_eigenvalue, nt_scaling, solve,
)
from sos_compiler import (
    BasisReduction, EqualityConstraint, FreeEntry, GramEntry, SdpProblem, build_sos_constraint,
    compile_program, reconstruct,
)


def sos_problem(text: str, reduction=BasisReduction.NONE) -> SdpProblem:
    return compile_program([build_sos_constraint("p", parse_polynomial(text), reduction=reduction)])


class TestLinalg:
    def test_min_eigenvalue(self):
        assert min_eigenvalue(np.diag([3.0, -1.0])) == pytest.approx(-1.0)
        with pytest.raises(ValueError):
            min_eigenvalue(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            min_eigenvalue(np.ones((2, 3)))

    def test_nt_scaling_maps_s_to_x(self, rng):
        a = rng.normal(size=(3, 3))
        b = rng.normal(size=(3, 3))
        X = a @ a.T + np.eye(3)
        S = b @ b.T + np.eye(3)
        W = nt_scaling(X, S)
        np.testing.assert_allclose(W @ S @ W, X, atol=1e-9)

    def test_max_step(self):
        X = np.eye(2)
        assert max_step(X, np.diag([-2.0, 1.0])) == pytest.approx(0.5)
        assert max_step(X, np.eye(2)) == np.inf

    def test_is_positive_definite(self):
        assert is_positive_definite([np.eye(2), np.diag([3.0])])
        assert not is_positive_definite([np.eye(2), np.diag([1.0, 0.0])])


class TestInteriorPoint:
    def test_small_standard_form_problem(self):
        # min x11 + 2 x22 subject to trace X = 1
        ipm = InteriorPointMethod([np.diag([1.0, 2.0])], [np.eye(2)[None, :, :]], np.array([1.0]))
        states = list(ipm.iterate())
        last = states[-1]
        assert last.converged
        assert last.primal_objective == pytest.approx(1.0, abs=1e-6)
        assert last.dual_objective == pytest.approx(1.0, abs=1e-6)

    def test_dual_residual_is_absolute(self):
        ipm = InteriorPointMethod([np.diag([1.0, 2.0])], [np.eye(2)[None, :, :]], np.array([1.0]))
        first = next(ipm.iterate())
        assert first.dual_residual > 0.0
        assert first.dual_infeasibility == pytest.approx(first.dual_residual / (1.0 + np.sqrt(5.0)))


class TestSolver:
    def test_sum_of_squares_is_strictly_feasible(self):
        solution = solve(sos_problem("x1^2 + x1*x2 + x2^2"))
        assert solution.status == SolveStatus.FEASIBLE
        assert solution.strict
        assert solution.margin > 1e-7
        assert solution.max_eq_violation <= 1e-7
        basis = ((1, 0), (0, 1))
        assert reconstruct(basis, solution.gram(0), 2).almost_equal(parse_polynomial("x1^2 + x1*x2 + x2^2"), 1e-6)

    def test_negative_form_is_infeasible(self):
        solution = solve(sos_problem("-x1^2 - x2^2"))
        assert solution.status == SolveStatus.INFEASIBLE
        assert solution.dual_point

    def test_motzkin_is_not_sos(self):
        assert solve(sos_problem("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1")).status == SolveStatus.INFEASIBLE

    def test_motzkin_times_norm_is_sos(self):
        problem = sos_problem("x1^6*x2^2 + 2*x1^4*x2^4 + x1^2*x2^6 - 3*x1^4*x2^2 - 3*x1^2*x2^4 + x1^2 + x2^2",
                              BasisReduction.NEWTON)
        assert solve(problem).status == SolveStatus.FEASIBLE

    @pytest.mark.parametrize("reduction", [BasisReduction.NONE, BasisReduction.DIAGONAL, BasisReduction.NEWTON])
    def test_motzkin_times_norm_finishes_from_a_definite_iterate(self, reduction):
        problem = sos_problem("x1^6*x2^2 + 2*x1^4*x2^4 + x1^2*x2^6 - 3*x1^4*x2^2 - 3*x1^2*x2^4 + x1^2 + x2^2",
                              reduction)
        solution = solve(problem)
        assert solution.status == SolveStatus.FEASIBLE, solution.note
        assert solution.max_eq_violation <= 1e-7
        assert "positive definiteness" not in solution.note

    def test_boundary_point_is_feasible_but_not_strict(self):
        # (x1 - x2)^2 has a singular Gram matrix on (x1, x2)
        solution = solve(sos_problem("x1^2 - 2*x1*x2 + x2^2"))
        assert solution.status == SolveStatus.FEASIBLE
        assert not solution.strict

    @pytest.mark.parametrize("trace_cap", [1e2, 1e4, 1e6])
    def test_boundary_point_is_never_declared_infeasible(self, trace_cap):
        solution = solve(sos_problem("x1^2 - 2*x1*x2 + x2^2"), SolverSettings(trace_cap=trace_cap))
        assert solution.status == SolveStatus.FEASIBLE
        assert solution.margin_bound >= -1e-7

    def test_margin_bound_covers_the_achieved_margin(self):
        for text in ("x1^2 + x1*x2 + x2^2", "x1^2 - 2*x1*x2 + x2^2"):
            solution = solve(sos_problem(text))
            assert solution.margin_bound >= solution.margin - 1e-6

    def test_verdicts_survive_constraint_reordering(self, rng, motzkin):
        for text, expected in [("x1^2 + x1*x2 + x2^2", SolveStatus.FEASIBLE), (motzkin.to_text(), SolveStatus.INFEASIBLE)]:
            problem = sos_problem(text)
            for _ in range(10):
                order = rng.permutation(problem.n_constraints)
                shuffled = problem.model_copy(update={"constraints": [problem.constraints[k] for k in order]})
                assert solve(shuffled).status == expected

    def test_scaling_invariance(self, motzkin):
        for text in ("x1^2 + x1*x2 + x2^2", motzkin.to_text()):
            problem = sos_problem(text)
            scaled = problem.model_copy(update={"constraints": [
                c.model_copy(update={"rhs": 10.0 * c.rhs}) for c in problem.constraints]})
            settings = SolverSettings(trace_cap=1e5)
            assert solve(scaled, settings).status == solve(problem).status

    def test_inconsistent_equalities(self):
        problem = SdpProblem(blocks=[1], block_labels=["q"], constraints=[
            EqualityConstraint(label="a", gram=[GramEntry(block=0, row=0, col=0, value=1.0)], rhs=1.0),
            EqualityConstraint(label="b", gram=[GramEntry(block=0, row=0, col=0, value=1.0)], rhs=2.0),
        ])
        solution = solve(problem)
        assert solution.status == SolveStatus.INFEASIBLE
        assert "inconsistent" in solution.note

    def test_free_scalars_only(self):
        problem = SdpProblem(n_free=1, free_labels=["c"], constraints=[
            EqualityConstraint(label="c", free=[FreeEntry(index=0, value=2.0)], rhs=6.0),
        ])
        solution = solve(problem)
        assert solution.status == SolveStatus.FEASIBLE
        assert solution.free_values == pytest.approx([3.0])

    def test_dimension_cap(self, motzkin):
        with pytest.raises(DimensionCapError) as info:
            SdpSolver(SolverSettings(dimension_cap=5)).solve(sos_problem(motzkin.to_text()))
        assert info.value.total_dimension == 10

    def test_solution_schema_roundtrip(self):
        solution = solve(sos_problem("x1^2 + x2^2"))
        assert type(solution).model_validate_json(solution.model_dump_json()) == solution

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            SolverSettings(early_stop_margin=0.0)
        with pytest.raises(ValueError):
            SolverSettings(step_fraction=1.5)

    def test_events_are_logged(self):
        events = []
        solver = SdpSolver()
        solver.log_callback = lambda run_id, component, details: events.append((component, details))
        solver.run_id = "test"
        solver.solve(sos_problem("x1^2 + x2^2"))
        assert events and events[-1][0] == "sdp_solver"
        assert events[-1][1]["status"] == "feasible"
