import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphfunc.dilog import bloch_wigner, g4_value

CATALAN = 0.915965594177219015054603514932


def reference(z: complex) -> float:
    z = mpmath.mpc(z)
    return float(mpmath.im(mpmath.polylog(2, z)) + mpmath.arg(1 - z) * mpmath.log(abs(z)))


points = st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False).filter(
    lambda z: abs(z - 1) > 1e-3 and abs(z.imag) > 1e-6)


def test_catalan_at_i():
    assert bloch_wigner(1j) == pytest.approx(CATALAN, abs=1e-15)
    assert g4_value(1j) == pytest.approx(2 * CATALAN, abs=1e-14)


def test_real_axis_and_special_points():
    assert bloch_wigner(0) == 0 and bloch_wigner(1) == 0
    for x in (-3.0, 0.25, 0.5, 2.0):
        assert bloch_wigner(x) == pytest.approx(0.0, abs=1e-15)


def test_maximum_at_sixth_root_of_unity():
    # D attains its maximum 1.0149416064096536... at exp(i pi/3)
    assert bloch_wigner(complex(0.5, math.sqrt(3) / 2)) == pytest.approx(1.0149416064096536, abs=1e-14)


@given(points)
def test_matches_mpmath(z):
    assert bloch_wigner(z) == pytest.approx(reference(z), abs=1e-13)


@given(points)
def test_functional_equations(z):
    d = bloch_wigner(z)
    assert bloch_wigner(z.conjugate()) == pytest.approx(-d, abs=1e-13)
    assert bloch_wigner(1 - z) == pytest.approx(-d, abs=1e-13)
    assert bloch_wigner(1 / z) == pytest.approx(-d, abs=1e-13)
