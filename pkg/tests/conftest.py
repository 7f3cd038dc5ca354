import pytest

from circlekit.poly import parse_polynomial


@pytest.fixture
def P():
    """Shortcut: build a polynomial from its text form."""
    return parse_polynomial


def text_poly(s):
    return parse_polynomial(s)
