"""
Text format for polynomials: `x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1`
"""
import re
from typing import Dict, List, Optional, Tuple

from .models import Monomial, Polynomial, VariableCountError


class PolynomialParseError(ValueError):
    """Raised on malformed polynomial text; `position` is the 0-based column"""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at column {position + 1}: {text!r}")
        self.text = text
        self.position = position


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<variable>x(?P<index>\d+))"
    r"|(?P<op>[-+*^])"
    r")"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN.match(text, position)
        if not match or match.end() == position:
            stripped = len(text[position:]) - len(text[position:].lstrip())
            raise PolynomialParseError("unexpected character", text, position + stripped)
        start = match.start(match.lastgroup) if match.lastgroup else position
        if match.group("number") is not None:
            tokens.append(("number", match.group("number"), start))
        elif match.group("variable") is not None:
            tokens.append(("variable", match.group("index"), match.start("variable")))
        else:
            tokens.append(("op", match.group("op"), match.start("op")))
        position = match.end()
    return tokens


def parse_polynomial(text: str, n_vars: Optional[int] = None) -> Polynomial:
    """
    Parse polynomial text.

    Args:
        text: terms joined by + or -, each a product of decimal coefficients and x<i>^<e> factors
        n_vars: ambient variable count; inferred from the largest index when omitted

    Returns:
        The parsed Polynomial
    """
    tokens = _tokenize(text)
    if not tokens:
        raise PolynomialParseError("empty polynomial", text, 0)

    terms: List[Tuple[float, Dict[int, int]]] = []
    max_index = 0
    i = 0
    sign = 1.0
    if tokens[0] == ("op", "-", tokens[0][2]) or tokens[0] == ("op", "+", tokens[0][2]):
        sign = -1.0 if tokens[0][1] == "-" else 1.0
        i = 1

    while True:
        coefficient = sign
        powers: Dict[int, int] = {}
        expect_factor = True
        while expect_factor:
            if i >= len(tokens):
                raise PolynomialParseError("expected a coefficient or variable", text, len(text))
            kind, value, position = tokens[i]
            if kind == "number":
                coefficient *= float(value)
                i += 1
            elif kind == "variable":
                index = int(value)
                if index < 1:
                    raise PolynomialParseError("variables are numbered from x1", text, position)
                i += 1
                exponent = 1
                if i < len(tokens) and tokens[i][:2] == ("op", "^"):
                    i += 1
                    if i >= len(tokens) or tokens[i][0] != "number" or not tokens[i][1].isdigit():
                        where = tokens[i][2] if i < len(tokens) else len(text)
                        raise PolynomialParseError("expected an integer exponent", text, where)
                    exponent = int(tokens[i][1])
                    i += 1
                powers[index] = powers.get(index, 0) + exponent
                max_index = max(max_index, index)
            else:
                raise PolynomialParseError(f"unexpected '{value}'", text, position)
            if i < len(tokens) and tokens[i][:2] == ("op", "*"):
                i += 1
            else:
                expect_factor = False
        terms.append((coefficient, powers))

        if i >= len(tokens):
            break
        kind, value, position = tokens[i]
        if kind != "op" or value not in "+-":
            raise PolynomialParseError(f"expected '+' or '-' before {value!r}", text, position)
        sign = -1.0 if value == "-" else 1.0
        i += 1

    n = n_vars if n_vars is not None else max(max_index, 1)
    if max_index > n:
        raise VariableCountError(n, max_index, "polynomial text")
    result: Dict[Monomial, float] = {}
    for coefficient, powers in terms:
        exponents = [0] * n
        for index, exponent in powers.items():
            exponents[index - 1] = exponent
        key = tuple(exponents)
        result[key] = result.get(key, 0.0) + coefficient
    return Polynomial(n, result)


def _format_coefficient(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _format_monomial(monomial: Monomial) -> str:
    factors = []
    for index, exponent in enumerate(monomial, start=1):
        if exponent == 1:
            factors.append(f"x{index}")
        elif exponent > 1:
            factors.append(f"x{index}^{exponent}")
    return "*".join(factors)


def format_monomial(monomial: Monomial) -> str:
    return _format_monomial(monomial) or "1"


def format_polynomial(p: Polynomial) -> str:
    """Print highest degree first; coefficients use repr so parsing back is exact."""
    if p.is_zero():
        return "0"
    ordered = sorted(p.terms, key=lambda m: (-sum(m), tuple(-e for e in m)))
    pieces = []
    for k, monomial in enumerate(ordered):
        coefficient = p.terms[monomial]
        negative = coefficient < 0
        magnitude = -coefficient if negative else coefficient
        mono_text = _format_monomial(monomial)
        if not mono_text:
            body = _format_coefficient(magnitude)
        elif magnitude == 1.0:
            body = mono_text
        else:
            body = f"{_format_coefficient(magnitude)}*{mono_text}"
        if k == 0:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f" - {body}" if negative else f" + {body}")
    return "".join(pieces)
