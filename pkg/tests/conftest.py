import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from poly_core import VectorField, parse_polynomial  # noqa: E402

MOTZKIN = "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1"

THC_FIELD = [
    "0.36*x1 + 2*x2 - 0.32*x1^7 - 0.02*x1*x2^6 + 8*x2^7 + 3*x1^2*x2^5",
    "-2*x1 - 0.44*x2 - 16*x1^7 - x1*x2^6 - 0.16*x2^7 - 0.06*x1^2*x2^5",
]

DEGREE4_FIELD = [
    "-x1^3*x2^2 + 2*x1^3*x2 - x1^3 + 4*x1^2*x2^2 - 8*x1^2*x2 + 4*x1^2 - x1*x2^4 + 4*x1*x2^3 - 4*x1 + 10*x2^2",
    "-9*x1^2*x2 + 10*x1^2 + 2*x1*x2^3 - 8*x1*x2^2 - 4*x1 - x2^3 + 4*x2^2 - 4*x2",
]

NONSOS_FORM = (
    "0.004*x1^6 + 0.004*x2^6 + 1.004*x3^6 + 1.012*x1^4*x2^2 + 1.012*x1^2*x2^4 + 0.012*x1^4*x3^2"
    " + 0.012*x2^4*x3^2 + 0.012*x1^2*x3^4 + 0.012*x2^2*x3^4 - 2.976*x1^2*x2^2*x3^2"
)


@pytest.fixture
def motzkin():
    return parse_polynomial(MOTZKIN)


@pytest.fixture
def thc_field():
    return VectorField.from_strings(THC_FIELD)


@pytest.fixture
def degree4_field():
    return VectorField.from_strings(DEGREE4_FIELD)


@pytest.fixture
def nonsos_form():
    return parse_polynomial(NONSOS_FORM)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_config(tmp_path):
    """Write a config JSON with the given sections and return its path"""
    def write(**sections) -> str:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(sections))
        return str(path)
    return write
