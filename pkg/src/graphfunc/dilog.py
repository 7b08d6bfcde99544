"""Bloch-Wigner dilogarithm."""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache


@lru_cache(maxsize=None)
def _bernoulli(nmax: int) -> tuple[float, ...]:
    # B_1 = -1/2 convention
    B = [Fraction(0)] * (nmax + 1)
    B[0] = Fraction(1)
    for m in range(1, nmax + 1):
        B[m] = -sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1)
    return tuple(float(b) for b in B)


_NTERMS = 40
# B_n / (n+1)!
_COEFFS = tuple(b / math.factorial(n + 1) for n, b in enumerate(_bernoulli(_NTERMS)))


def _li2_reduced(w: complex) -> complex:
    """Li2(w) for |w| <= 1 and Re w <= 1/2, via the series in u = -log(1-w)."""
    u = -cmath.log(1 - w)
    u2 = u * u
    # odd Bernoulli numbers beyond B_1 vanish
    total = u * _COEFFS[0] + u2 * _COEFFS[1]
    p = u
    for n in range(2, _NTERMS + 1, 2):
        p *= u2
        total += _COEFFS[n] * p
    return total


def bloch_wigner(z: complex) -> float:
    """D(z) = Im(Li2(z)) + arg(1-z) log|z|; returns 0 at z = 0 and z = 1."""
    z = complex(z)
    if z == 0 or z == 1:
        return 0.0
    sign = 1.0
    if abs(z) > 1:
        z = 1 / z
        sign = -sign
    if z.real > 0.5:
        z = 1 - z
        sign = -sign
    if z == 0:
        return 0.0
    val = _li2_reduced(z).imag + cmath.phase(1 - z) * math.log(abs(z))
    return sign * val


def g4_value(z: complex) -> float:
    """Graphical function of the three-star in four dimensions: 4i D(z)/(z - zbar)."""
    z = complex(z)
    return 2.0 * bloch_wigner(z) / z.imag
