"""Exact sparse polynomials in edge variables with coefficients in the external
distance symbols.

A :class:`Poly` maps an exponent vector over the edge variables ``a1..aE`` to an
:class:`SPoly`, itself a sparse polynomial with rational coefficients in the
symbols ``s[i,j]`` (squared distances between external vertices).  Both tiers are
kept in canonical form: no zero coefficients are ever stored, so structural
equality is polynomial equality.

Monomials are ordered graded-lexicographically by edge index (``a1 > a2 > ...``),
which also fixes the text serialization.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Union

Number = Union[int, Fraction]

# an s-monomial is a sorted tuple of ((label_i, label_j), exponent) with label_i < label_j
SMono = tuple


def _canon(c) -> Number:
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int):
        return c
    if isinstance(c, Rational):
        return _canon(Fraction(c))
    raise TypeError(f"exact rational expected, got {type(c).__name__}")


def s_pair(i: str, j: str) -> tuple[str, str]:
    """Canonical (sorted) key for the symbol s[i,j]."""
    if i == j:
        raise ValueError("s[i,i] is identically zero")
    return (i, j) if i < j else (j, i)


def _smono_mul(m1: SMono, m2: SMono) -> SMono:
    if not m1:
        return m2
    if not m2:
        return m1
    acc = dict(m1)
    for k, e in m2:
        acc[k] = acc.get(k, 0) + e
    return tuple(sorted(acc.items()))


def s_symbol_name(pair: tuple[str, str]) -> str:
    i, j = pair
    if len(i) == 1 and len(j) == 1:
        return f"s{i}{j}"
    return f"s[{i},{j}]"


class SPoly:
    """Sparse polynomial in the s-symbols with exact rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[SMono, Number] | None = None):
        t = {}
        if terms:
            for m, c in terms.items():
                c = _canon(c)
                if c != 0:
                    t[m] = c
        self.terms: dict[SMono, Number] = t
        self._hash = None

    @classmethod
    def const(cls, c) -> "SPoly":
        return cls({(): c})

    @classmethod
    def symbol(cls, i: str, j: str) -> "SPoly":
        return cls({((s_pair(i, j), 1),): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self) -> Number:
        if not self.is_const():
            raise ValueError("coefficient depends on s-symbols")
        return self.terms.get((), 0)

    def __add__(self, other: "SPoly") -> "SPoly":
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m, 0) + c
            if v:
                t[m] = _canon(v)
            else:
                t.pop(m, None)
        out = SPoly()
        out.terms = t
        return out

    def __neg__(self) -> "SPoly":
        out = SPoly()
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other: "SPoly") -> "SPoly":
        return self + (-other)

    def __mul__(self, other: "SPoly") -> "SPoly":
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _smono_mul(m1, m2)
                v = t.get(m, 0) + c1 * c2
                if v:
                    t[m] = v
                else:
                    t.pop(m, None)
        return SPoly(t)

    def scale(self, c) -> "SPoly":
        c = _canon(c)
        if c == 0:
            return SPoly()
        out = SPoly()
        out.terms = {m: _canon(v * c) for m, v in self.terms.items()}
        return out

    def evaluate(self, s: Mapping[tuple[str, str], object]):
        total = 0
        for m, c in self.terms.items():
            v = c
            for pair, e in m:
                if pair not in s:
                    raise KeyError(f"unassigned symbol {s_symbol_name(pair)}")
                v = v * s[pair] ** e
            total = total + v
        return total

    def symbols(self) -> set:
        return {pair for m in self.terms for pair, _ in m}

    def __eq__(self, other) -> bool:
        if isinstance(other, SPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({(): other} if other != 0 else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"SPoly({self.terms!r})"


_ONE = SPoly.const(1)


class Poly:
    """Sparse polynomial in ``nvars`` edge variables over :class:`SPoly` coefficients.

    Instances are treated as immutable values; every operation returns a new
    polynomial.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, SPoly | Number] | None = None):
        self.nvars = nvars
        t: dict[tuple, SPoly] = {}
        if terms:
            for exps, c in terms.items():
                if len(exps) != nvars:
                    raise ValueError("exponent vector length does not match nvars")
                if any(e < 0 for e in exps):
                    raise ValueError("negative exponent")
                if not isinstance(c, SPoly):
                    c = SPoly.const(c)
                if not c.is_zero():
                    t[tuple(exps)] = c
        self.terms = t

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        return p

    # constructors

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        if not isinstance(c, SPoly):
            c = SPoly.const(c)
        return cls._raw(nvars, {(0,) * nvars: c} if not c.is_zero() else {})

    @classmethod
    def one(cls, nvars: int) -> "Poly":
        return cls.const(nvars, 1)

    @classmethod
    def var(cls, nvars: int, index: int) -> "Poly":
        """The edge variable ``a{index+1}`` (``index`` is 0-based)."""
        e = [0] * nvars
        e[index] = 1
        return cls._raw(nvars, {tuple(e): _ONE})

    @classmethod
    def monomial(cls, exps: Iterable[int], coeff=1) -> "Poly":
        exps = tuple(exps)
        return cls(len(exps), {exps: coeff})

    # queries

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def monomials(self) -> list[tuple]:
        """Exponent vectors in descending graded-lex order."""
        return sorted(self.terms, key=_grlex_key, reverse=True)

    def coefficient(self, exps) -> SPoly:
        return self.terms.get(tuple(exps), SPoly())

    def has_constant_coefficients(self) -> bool:
        return all(c.is_const() for c in self.terms.values())

    def low_degree(self, vars: Iterable[int] | None = None) -> int:
        """Minimum number of factors from ``vars`` (0-based indices) over all monomials."""
        return min(self._partial_degrees(vars))

    def degree(self, vars: Iterable[int] | None = None) -> int:
        return max(self._partial_degrees(vars))

    def _partial_degrees(self, vars):
        if not self.terms:
            raise ValueError("degree of the zero polynomial is undefined")
        if vars is None:
            return [sum(m) for m in self.terms]
        idx = list(vars)
        return [sum(m[i] for i in idx) for m in self.terms]

    def homogeneous_degree(self) -> int | None:
        """Total degree if every monomial has the same degree, otherwise ``None``."""
        degs = set(self._partial_degrees(None))
        return degs.pop() if len(degs) == 1 else None

    def is_multilinear(self) -> bool:
        return all(e <= 1 for m in self.terms for e in m)

    # arithmetic

    def _check(self, other: "Poly"):
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            if m in t:
                v = t[m] + c
                if v.is_zero():
                    del t[m]
                else:
                    t[m] = v
            else:
                t[m] = c
        return Poly._raw(self.nvars, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                c = c1 * c2
                if m in t:
                    v = t[m] + c
                    if v.is_zero():
                        del t[m]
                    else:
                        t[m] = v
                elif not c.is_zero():
                    t[m] = c
        return Poly._raw(self.nvars, t)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "Poly":
        if isinstance(c, SPoly):
            return self * Poly.const(self.nvars, c)
        c = _canon(c)
        if c == 0:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {m: v.scale(c) for m, v in self.terms.items()})

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Poly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def partial_derivative(self, index: int) -> "Poly":
        """Formal derivative with respect to ``a{index+1}``."""
        t = {}
        for m, c in self.terms.items():
            e = m[index]
            if e == 0:
                continue
            nm = m[:index] + (e - 1,) + m[index + 1:]
            t[nm] = c.scale(e)
        return Poly._raw(self.nvars, t)

    def exact_divide(self, divisor: "Poly") -> "Poly":
        """Quotient of an exact division over rational coefficients.

        Raises ``ValueError`` if ``divisor`` does not divide ``self`` or if the
        divisor carries s-dependent coefficients.
        """
        self._check(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if not divisor.has_constant_coefficients():
            raise ValueError("exact division needs a divisor with rational coefficients")
        lead = max(divisor.terms, key=_grlex_key)
        lead_c = divisor.terms[lead].const_value()
        rem = self
        quot: dict = {}
        while rem.terms:
            m = max(rem.terms, key=_grlex_key)
            if any(a < b for a, b in zip(m, lead)):
                raise ValueError("polynomial division is not exact")
            qm = tuple(a - b for a, b in zip(m, lead))
            qc = rem.terms[m].scale(Fraction(1) / lead_c)
            quot[qm] = qc
            rem = rem - Poly._raw(self.nvars, {qm: qc}) * divisor
        return Poly._raw(self.nvars, quot)

    def substitute_s(self, s: Mapping[tuple[str, str], Number]) -> "Poly":
        """Replace the s-symbols by exact rationals."""
        return Poly(self.nvars, {m: c.evaluate(s) for m, c in self.terms.items()})

    def numeric_terms(self, s: Mapping[tuple[str, str], float] | None = None) -> tuple[list, list]:
        """(exponent vectors, float coefficients) after substituting numeric ``s``."""
        s = s or {}
        exps, coeffs = [], []
        for m, c in self.terms.items():
            v = float(c.evaluate(s))
            if v != 0.0:
                exps.append(m)
                coeffs.append(v)
        return exps, coeffs

    def evaluate(self, alpha, s: Mapping | None = None):
        """Value at edge variables ``alpha`` (sequence or {index: value}) and symbols ``s``.

        Exact when all inputs are rational; float inputs are summed with
        compensated (``math.fsum``) summation over monomials.
        """
        s = s or {}
        if isinstance(alpha, Mapping):
            lookup = alpha
        else:
            lookup = dict(enumerate(alpha))
        values = []
        for m, c in self.terms.items():
            v = c.evaluate(s)
            for i, e in enumerate(m):
                if e:
                    if i not in lookup:
                        raise KeyError(f"unassigned variable a{i + 1}")
                    v = v * lookup[i] ** e
            values.append(v)
        if any(isinstance(v, (float, complex)) for v in values):
            return math.fsum(values)
        return _canon(sum(values, 0)) if values else 0

    def map_exponents(self, fn) -> "Poly":
        t = {}
        for m, c in self.terms.items():
            nm = tuple(fn(m))
            t[nm] = t[nm] + c if nm in t else c
        return Poly(self.nvars, t)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Poly({to_text(self)!r}, nvars={self.nvars})"

    def __str__(self):
        return to_text(self)


def _grlex_key(m: tuple):
    return (sum(m), m)


# text serialization


def _format_coeff(c: Number) -> str:
    return str(c) if isinstance(c, int) else f"{c.numerator}/{c.denominator}"


def _smono_text(m: SMono) -> list[str]:
    out = []
    for pair, e in m:
        name = s_symbol_name(pair)
        out.append(name if e == 1 else f"{name}^{e}")
    return out


def _amono_text(m: tuple) -> list[str]:
    out = []
    for i, e in enumerate(m):
        if e == 1:
            out.append(f"a{i + 1}")
        elif e > 1:
            out.append(f"a{i + 1}^{e}")
    return out


def to_text(p: Poly) -> str:
    """Canonical text form, e.g. ``"s01*a1*a2+s0z*a1*a3-2*a3^2"``."""
    if p.is_zero():
        return "0"
    parts = []
    for m in p.monomials():
        coeff = p.terms[m]
        amono = _amono_text(m)
        for sm in sorted(coeff.terms, key=lambda x: (-sum(e for _, e in x), x)):
            c = coeff.terms[sm]
            factors = _smono_text(sm) + amono
            mag = abs(c)
            if factors:
                body = "*".join(factors) if mag == 1 else "*".join([_format_coeff(mag)] + factors)
            else:
                body = _format_coeff(mag)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += sign + body
    return text


_TERM_RE = re.compile(r"([+-]?)([^+-]+)")
_S_RE = re.compile(r"^s(?:\[([^,\]]+),([^\]]+)\]|(\w)(\w))$")


def from_text(text: str, nvars: int) -> Poly:
    """Parse the canonical text form back into a :class:`Poly`."""
    text = text.replace(" ", "")
    if text == "0":
        return Poly.zero(nvars)
    out = Poly.zero(nvars)
    pos = 0
    for match in _TERM_RE.finditer(text):
        if match.start() != pos:
            raise ValueError(f"cannot parse polynomial near {text[pos:]!r}")
        pos = match.end()
        sign = -1 if match.group(1) == "-" else 1
        coeff = Fraction(sign)
        exps = [0] * nvars
        smono: dict = {}
        for factor in match.group(2).split("*"):
            base, _, power = factor.partition("^")
            e = int(power) if power else 1
            if base[0].isdigit():
                coeff *= Fraction(base) ** e
            elif base[0] == "a" and base[1:].isdigit():
                idx = int(base[1:]) - 1
                if not 0 <= idx < nvars:
                    raise ValueError(f"variable {base} out of range")
                exps[idx] += e
            else:
                sm = _S_RE.match(base)
                if not sm:
                    raise ValueError(f"unknown symbol {base!r}")
                i, j = (sm.group(1), sm.group(2)) if sm.group(1) else (sm.group(3), sm.group(4))
                key = s_pair(i, j)
                smono[key] = smono.get(key, 0) + e
        c = SPoly({tuple(sorted(smono.items())): coeff})
        out = out + Poly(nvars, {tuple(exps): c})
    if pos != len(text):
        raise ValueError(f"cannot parse polynomial near {text[pos:]!r}")
    return out
