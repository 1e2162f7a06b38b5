import numpy as np
import pytest

from poly_core import Polynomial, count_monomials, parse_polynomial
from sdp_solver import SolveStatus, solve
from sos_compiler import (
    BasisReduction, NormalizationRule, PolynomialTemplate, SdpaParseError, SosCompilationError,
    SosProgram, build_sos_constraint, closed_form_savings, compile_program, count_savings,
    direct_savings, from_sdpa, monomial_basis, newton_reduce, pair_products, prune_diagonal,
    reconstruct, savings_table, to_sdpa,
)


def random_psd(rng, size: int) -> np.ndarray:
    factor = rng.normal(size=(size, size))
    return factor @ factor.T


class TestBasis:
    def test_graded_order(self):
        assert monomial_basis(2, 1) == [(0, 0), (1, 0), (0, 1)]
        assert monomial_basis(2, 2, homogeneous=True) == [(2, 0), (1, 1), (0, 2)]

    @pytest.mark.parametrize("n,d", [(1, 3), (2, 3), (3, 2), (4, 2)])
    def test_basis_sizes(self, n, d):
        assert len(monomial_basis(n, d)) == count_monomials(n, d, homogeneous=False)
        assert len(monomial_basis(n, d, homogeneous=True)) == count_monomials(n, d, homogeneous=True)

    def test_pair_products_cover_every_product(self):
        basis = monomial_basis(2, 2)
        products = pair_products(basis)
        assert len(products) == count_monomials(2, 4, homogeneous=False)
        assert sorted(products[(2, 0)]) == [(0, 3), (1, 1)]

    def test_newton_polytope_of_motzkin(self, motzkin):
        reduced = newton_reduce(monomial_basis(2, 3), motzkin.support())
        assert set(reduced) == {(0, 0), (1, 1), (2, 1), (1, 2)}

    def test_diagonal_pruning_drops_missing_squares(self):
        # x1^2 + x2^4: x1*x2 squared is nowhere in the support
        support = parse_polynomial("x1^2 + x2^4").support()
        reduced = prune_diagonal(monomial_basis(2, 2), support)
        assert (1, 1) not in reduced
        assert (2, 0) not in reduced
        assert (0, 2) in reduced

    def test_unknown_reduction(self, motzkin):
        with pytest.raises(ValueError):
            build_sos_constraint("p", motzkin, reduction="hull")


class TestCompiler:
    def test_motzkin_program_size(self, motzkin):
        problem = compile_program([build_sos_constraint("p", motzkin)])
        assert problem.blocks == [10]
        assert problem.n_constraints == 28
        assert problem.n_free == 0

    def test_gram_convention(self, rng):
        # any PSD Q with p = z^T Q z satisfies every equality
        basis = tuple(monomial_basis(2, 2))
        Q = random_psd(rng, len(basis))
        p = reconstruct(basis, Q, 2)
        problem = compile_program([build_sos_constraint("p", p, gram_basis=basis)])
        assert np.max(np.abs(problem.evaluate_residuals([Q], []))) < 1e-9

    def test_reconstruct_matches_quadratic_form(self, rng):
        basis = tuple(monomial_basis(3, 1))
        Q = random_psd(rng, len(basis))
        p = reconstruct(basis, Q, 3)
        for point in rng.normal(size=(5, 3)):
            z = np.array([np.prod(point ** np.array(m)) for m in basis])
            assert p.evaluate(point) == pytest.approx(z @ Q @ z)

    def test_homogeneous_inference(self):
        form = build_sos_constraint("p", parse_polynomial("x1^4 + x2^4"))
        assert form.homogeneous
        assert form.gram_basis == ((2, 0), (1, 1), (0, 2))
        mixed = build_sos_constraint("p", parse_polynomial("x1^4 + 1", 2))
        assert not mixed.homogeneous
        assert len(mixed.gram_basis) == 6

    def test_epsilon_shift(self):
        constraint = build_sos_constraint("p", parse_polynomial("x1^2 + x2^2"), epsilon=0.1)
        assert constraint.strict
        assert constraint.shift == parse_polynomial("0.1*x1^2 + 0.1*x2^2")
        assert constraint.shifted_target.constant.almost_equal(parse_polynomial("0.9*x1^2 + 0.9*x2^2"))

    def test_strict_constraint_keeps_supplied_basis(self):
        constraint = build_sos_constraint("p", parse_polynomial("x1^4 + x2^4"), strict=True,
                                          gram_basis=[(2, 0), (0, 2)])
        problem = compile_program([constraint], normalization=NormalizationRule.epsilon_pd(0.1))
        assert problem.blocks == [2]
        assert solve(problem).status == SolveStatus.FEASIBLE

    def test_strict_constraint_without_basis_gets_default(self):
        constraint = build_sos_constraint("p", parse_polynomial("x1^4 + x2^4"), strict=True)
        problem = compile_program([constraint], normalization=NormalizationRule.epsilon_pd(0.1))
        assert problem.blocks == [3]

    def test_target_outside_span(self):
        with pytest.raises(SosCompilationError) as info:
            compile_program([build_sos_constraint("p", parse_polynomial("x1^2 + x2^2"), gram_basis=[(1, 0)])])
        assert info.value.monomial == (0, 2)
        assert info.value.label == "p"

    def test_empty_program(self):
        with pytest.raises(SosCompilationError):
            compile_program([])

    def test_odd_degree_is_structurally_outside(self):
        with pytest.raises(SosCompilationError):
            compile_program([build_sos_constraint("p", parse_polynomial("x1^3 + x1^2"))])

    def test_template_program(self):
        program = SosProgram(2, NormalizationRule.epsilon_pd(1e-3), BasisReduction.DIAGONAL)
        V = program.new_template("V", 2, include_constant=False)
        assert V.size == 5
        assert V.free_label(0) == "V[x1]"
        program.add_sos_constraint("V", V.as_affine(), strict=True)
        problem = program.compile()
        assert problem.n_free == 5
        assert problem.free_labels[2] == "V[x1^2]"
        assert program.compiled_constraints[0].shift is not None
        # V = x1^2 + x2^2 with Q = (1 - eps) I on (x1, x2) is a solution
        values = np.zeros(5)
        values[V.basis.index((2, 0))] = 1.0
        values[V.basis.index((0, 2))] = 1.0
        basis = program.compiled_constraints[0].gram_basis
        Q = np.diag([1.0 - 1e-3 if sum(m) == 1 else 0.0 for m in basis])
        assert np.max(np.abs(problem.evaluate_residuals([Q], values))) < 1e-12

    def test_template_pins(self):
        template = PolynomialTemplate.create("V", 2, 2, pinned={(2, 0): 1.0})
        assert (2, 0) not in template.basis
        assert template.evaluate(np.zeros(template.size)) == Polynomial.monomial((2, 0))
        with pytest.raises(ValueError):
            PolynomialTemplate("V", 2, 2, ((1, 0), (1, 0)))

    def test_unit_leading_normalization(self):
        program = SosProgram(2, NormalizationRule.unit_leading("V", (2, 0)))
        V = program.new_template("V", 2, homogeneous=True)
        program.add_sos_constraint("V", V.as_affine())
        problem = program.compile()
        last = problem.constraints[-1]
        assert last.label == "normalize:V[x1^2]"
        assert last.rhs == 1.0


class TestSavings:
    @pytest.mark.parametrize("n,d,expected", [(2, 4, (105, 36)), (1, 1, (2, 2)), (3, 2, (34, 20))])
    def test_known_values(self, n, d, expected):
        assert count_savings(n, d) == expected

    def test_closed_forms_match_direct_counts(self):
        for n in range(1, 5):
            for d in range(1, 6):
                assert closed_form_savings(n, d) == direct_savings(n, d)

    def test_table(self):
        table = savings_table(4, 5)
        assert len(table) == 20
        assert bool(table["match"].all())
        row = table[(table["n"] == 2) & (table["d"] == 4)].iloc[0]
        assert (row["vars_saved"], row["eqs_saved"]) == (105, 36)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            count_savings(0, 2)


class TestSdpa:
    def test_roundtrip_fixed_program(self, motzkin):
        problem = compile_program([build_sos_constraint("p", motzkin)])
        text = to_sdpa(problem)
        assert text.splitlines()[1].startswith("* labels ")
        assert from_sdpa(text) == problem

    def test_roundtrip_with_free_scalars(self):
        program = SosProgram(2, NormalizationRule.epsilon_pd(1e-4), BasisReduction.DIAGONAL)
        V = program.new_template("V", 2, include_constant=False)
        program.add_sos_constraint("V", V.as_affine(), strict=True)
        program.add_sos_constraint("W", V.as_affine().scale(0.3), strict=True)
        problem = program.compile()
        assert from_sdpa(to_sdpa(problem)) == problem

    def test_roundtrip_keeps_empty_blocks(self, motzkin):
        problem = compile_program([
            build_sos_constraint("zero", Polynomial.zero(2)),
            build_sos_constraint("p", motzkin),
        ])
        assert problem.blocks == [0, 10]
        assert from_sdpa(to_sdpa(problem)) == problem

    @pytest.mark.parametrize("text", ["", "abc\n", "2\n1\n3\n"])
    def test_malformed(self, text):
        with pytest.raises(SdpaParseError):
            from_sdpa(text)
