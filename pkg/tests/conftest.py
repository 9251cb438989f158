import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from nearcurve.forms import IntegerForm  # noqa: E402

FORMS = {
    "F5": "x^5+y^5-z^5",
    "Qp": "x^2+y^2-z^2",
    "E3": "y^2*z-x^3+x*z^2",
    "F5b": "x^5+2*y^5-3*z^5",
    "F5c": "x^5+y^5+z^5-3*x*y*z^3",
}


def form(name: str) -> IntegerForm:
    return IntegerForm.parse(FORMS[name], nvars=3)


def binary(text: str) -> IntegerForm:
    return IntegerForm.parse(text, nvars=2)


@pytest.fixture(scope="session")
def F5():
    return form("F5")


@pytest.fixture(scope="session")
def Qp():
    return form("Qp")


@pytest.fixture(scope="session")
def E3():
    return form("E3")


@pytest.fixture(scope="session")
def F5_flexes(F5):
    from nearcurve.geometry import flex_report

    return flex_report(F5)
