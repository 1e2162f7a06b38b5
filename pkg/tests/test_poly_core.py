import numpy as np
import pytest
import sympy

from poly_core import (
    LinearSystem, Polynomial, PolynomialParseError, SwitchedSystem, SystemDescription, TimeDomain,
    VariableCountError, VectorField, compose_linear, count_monomials, dehomogenize, derivative,
    discrete_difference, euler_residual, format_polynomial, gradient, homogenize, lie_derivative,
    norm_power, parse_polynomial, squared_gradient_norm, substitute_shift, top_homogeneous_component,
)


def to_sympy(p: Polynomial, symbols):
    return sum(c * sympy.prod([s ** e for s, e in zip(symbols, m)]) for m, c in p.terms.items())


def from_sympy(expr, symbols) -> Polynomial:
    poly = sympy.Poly(sympy.expand(expr), *symbols)
    return Polynomial(len(symbols), {m: float(c) for m, c in poly.terms()})


def random_polynomial(rng, n_vars: int, degree: int, n_terms: int = 6) -> Polynomial:
    terms = {}
    for _ in range(n_terms):
        exponents = rng.multinomial(int(rng.integers(0, degree + 1)), [1.0 / (n_vars + 1)] * (n_vars + 1))[:n_vars]
        terms[tuple(int(e) for e in exponents)] = float(rng.integers(-9, 10))
    return Polynomial(n_vars, terms)


class TestArithmetic:
    def test_difference_of_squares(self):
        x1 = Polynomial.variable(2, 0)
        x2 = Polynomial.variable(2, 1)
        assert (x1 + x2) * (x1 - x2) == parse_polynomial("x1^2 - x2^2")

    def test_tiny_coefficients_are_pruned(self):
        p = Polynomial(2, {(1, 0): 1.0, (0, 1): 1e-13})
        assert p.monomials() == [(1, 0)]

    def test_zero_polynomial_has_degree_zero(self):
        zero = Polynomial.zero(3)
        assert zero.is_zero()
        assert zero.degree == 0
        assert (parse_polynomial("x1 - x1", 2)).is_zero()

    def test_variable_count_mismatch(self):
        with pytest.raises(VariableCountError):
            Polynomial.variable(2, 0) + Polynomial.variable(3, 0)

    def test_integer_power_matches_repeated_product(self):
        p = parse_polynomial("x1 + 2*x2 - 1")
        assert p ** 3 == p * p * p
        assert p ** 0 == Polynomial.constant(2, 1.0)

    def test_degree_of_product(self, rng):
        for _ in range(10):
            p = random_polynomial(rng, 2, 4)
            q = random_polynomial(rng, 2, 3)
            if p.is_zero() or q.is_zero():
                continue
            assert (p * q).degree == p.degree + q.degree

    def test_polynomials_are_immutable(self):
        p = parse_polynomial("x1")
        with pytest.raises(AttributeError):
            p.foo = 1

    def test_batch_evaluation(self, motzkin):
        points = np.array([[1.0, 1.0], [0.0, 0.0], [2.0, -1.0]])
        np.testing.assert_allclose(motzkin.evaluate(points), [0.0, 1.0, 16 + 4 - 12 + 1])
        assert motzkin.evaluate([1.0, 1.0]) == pytest.approx(0.0)


class TestTextFormat:
    def test_parse_and_print(self, motzkin):
        assert motzkin.coefficient((2, 2)) == -3.0
        assert format_polynomial(motzkin) == "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1"

    def test_printed_text_parses_back_exactly(self, rng):
        for _ in range(20):
            p = random_polynomial(rng, 3, 5) * 0.1
            assert parse_polynomial(p.to_text(), 3) == p

    def test_explicit_variable_count(self):
        assert parse_polynomial("x1", 3).n_vars == 3
        with pytest.raises(VariableCountError):
            parse_polynomial("x4", 3)

    @pytest.mark.parametrize("text", ["", "x1^", "x1 ** 2", "x0 + 1", "2 x1 +", "x1 + (x2)"])
    def test_malformed_text(self, text):
        with pytest.raises(PolynomialParseError):
            parse_polynomial(text)

    def test_error_reports_column(self):
        with pytest.raises(PolynomialParseError) as info:
            parse_polynomial("x1 + $")
        assert info.value.position == 5


class TestCalculus:
    def test_motzkin_gradient(self, motzkin):
        expected = [
            parse_polynomial("4*x1^3*x2^2 + 2*x1*x2^4 - 6*x1*x2^2"),
            parse_polynomial("2*x1^4*x2 + 4*x1^2*x2^3 - 6*x1^2*x2"),
        ]
        assert gradient(motzkin) == expected

    def test_derivative_matches_symbolic(self, rng):
        symbols = sympy.symbols("x1:4")
        for _ in range(15):
            p = random_polynomial(rng, 3, 6)
            for i in range(3):
                expected = from_sympy(sympy.diff(to_sympy(p, symbols), symbols[i]), symbols)
                assert derivative(p, i).almost_equal(expected)

    def test_lie_derivative_matches_symbolic(self, rng):
        symbols = sympy.symbols("x1:3")
        for _ in range(10):
            V = random_polynomial(rng, 2, 4)
            f = VectorField((random_polynomial(rng, 2, 3), random_polynomial(rng, 2, 3)))
            expr = sum(sympy.diff(to_sympy(V, symbols), s) * to_sympy(c, symbols)
                       for s, c in zip(symbols, f.components))
            assert lie_derivative(V, f).almost_equal(from_sympy(expr, symbols))

    def test_lie_derivative_dimension_check(self):
        f = VectorField.from_strings(["-x1", "-x2"])
        with pytest.raises(VariableCountError):
            lie_derivative(parse_polynomial("x1^2", 3), f)

    def test_quadratic_decrease_along_degree4_field_is_shifted_motzkin(self, motzkin, degree4_field):
        V = parse_polynomial("0.5*x1^2 + 0.5*x2^2")
        shifted = substitute_shift(motzkin, [-1.0, -1.0])
        assert (-lie_derivative(V, degree4_field)).almost_equal(shifted)

    def test_homogenize_motzkin(self, motzkin):
        homogeneous = homogenize(motzkin, 6)
        assert homogeneous == parse_polynomial("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2*x3^2 + x3^6")
        assert homogeneous.is_homogeneous()
        assert dehomogenize(homogeneous) == motzkin

    def test_homogenize_below_degree(self, motzkin):
        with pytest.raises(ValueError):
            homogenize(motzkin, 4)

    def test_top_homogeneous_component(self, motzkin):
        assert top_homogeneous_component(motzkin) == parse_polynomial("x1^4*x2^2 + x1^2*x2^4")
        with pytest.raises(ValueError):
            top_homogeneous_component(Polynomial.zero(2))

    def test_euler_identity_for_forms(self, nonsos_form):
        assert euler_residual(nonsos_form).max_abs_difference(Polynomial.zero(3)) < 1e-12
        with pytest.raises(ValueError):
            euler_residual(parse_polynomial("x1^2 + x2"))

    def test_gradient_norm(self):
        V = parse_polynomial("x1^2 + x1*x2")
        assert squared_gradient_norm(V) == parse_polynomial("4*x1^2 + 4*x1*x2 + x2^2 + x1^2")

    def test_compose_linear_pointwise(self, rng):
        V = random_polynomial(rng, 2, 4)
        A = rng.normal(size=(2, 2))
        composed = compose_linear(V, A)
        for point in rng.normal(size=(5, 2)):
            assert composed.evaluate(point) == pytest.approx(V.evaluate(A @ point), rel=1e-9, abs=1e-9)

    def test_discrete_difference(self):
        V = parse_polynomial("x1^2 + x2^2")
        assert discrete_difference(V, LinearSystem(np.eye(2))).is_zero()
        halved = discrete_difference(V, LinearSystem(0.5 * np.eye(2)))
        assert halved.almost_equal(V * 0.75)

    def test_norm_power_and_counts(self):
        assert norm_power(2, 2) == parse_polynomial("x1^4 + 2*x1^2*x2^2 + x2^4")
        assert count_monomials(2, 3, homogeneous=False) == 10
        assert count_monomials(3, 2, homogeneous=True) == 6


class TestSystems:
    def test_vector_field_homogeneity(self, thc_field):
        assert not thc_field.is_homogeneous
        assert VectorField.from_strings(["-x1^3", "x1^2*x2"]).is_homogeneous
        assert thc_field.degree == 7
        assert thc_field.vanishes_at_origin()

    def test_linear_system_as_field(self):
        system = LinearSystem(np.array([[-1.0, 1.0], [-1.0, -1.0]]))
        field = system.to_vector_field()
        assert field.to_strings() == ["-x1 + x2", "-x1 - x2"]
        assert system.is_hurwitz()
        assert not LinearSystem(np.eye(2)).is_schur()

    def test_linear_system_rejects_rectangular(self):
        with pytest.raises(ValueError):
            LinearSystem(np.ones((2, 3)))

    def test_switched_system_checks_modes(self):
        with pytest.raises(VariableCountError):
            SwitchedSystem((LinearSystem(np.eye(2)), LinearSystem(np.eye(3))))
        with pytest.raises(ValueError):
            SwitchedSystem((VectorField.from_strings(["-x1"]),), TimeDomain.DT)

    def test_system_description(self):
        description = SystemDescription(variables=2, matrices=[[[-1, 0], [0, -2]]], time="dt")
        system = description.to_system()
        assert system.time == TimeDomain.DT
        assert SystemDescription.from_system(system) == description
        with pytest.raises(ValueError):
            SystemDescription(variables=2, vector_fields=[["-x1"]])

    def test_damped_field(self, degree4_field):
        damped = degree4_field.damped(0.5)
        point = np.array([[0.3, -0.7]])
        np.testing.assert_allclose(damped.evaluate(point), degree4_field.evaluate(point) - 0.5 * point)
        assert damped.vanishes_at_origin()

    def test_spectral_helpers(self):
        system = LinearSystem(np.array([[0.5, 1.0], [0.0, -2.0]]))
        assert system.spectral_abscissa() == pytest.approx(0.5)
        assert system.spectral_radius() == pytest.approx(2.0)
        assert not system.is_hurwitz()
        assert not system.is_schur()
