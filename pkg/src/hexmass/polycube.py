"""Sparse trivariate polynomials in natural coordinates (xi, eta, zeta).

Coefficients are normally :class:`fractions.Fraction` so that integrals over
the reference cube ``[-1, 1]^3`` come out exact.  Float coefficients are
tolerated (the arithmetic is the same), which is what the floating-point
metric path of :mod:`hexmass.hex8` relies on.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from numbers import Number, Rational
from typing import Iterable, Mapping

import numpy as np

Exponent = tuple[int, int, int]

VARIABLE_NAMES = ("x", "y", "z")


def _as_coefficient(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    return float(value)


class Polynomial3:
    """Immutable polynomial ``sum c_abc * xi^a * eta^b * zeta^c``.

    Terms are kept in a dict keyed by exponent triple, iterated in
    lexicographic order of the triple.  Zero coefficients are never stored.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, object] | None = None):
        clean = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != 3 or min(exps) < 0:
                raise ValueError(f"bad exponent triple {exps!r}")
            coef = _as_coefficient(coef)
            if coef != 0:
                clean[exps] = clean.get(exps, 0) + coef
        self._terms = {e: clean[e] for e in sorted(clean) if clean[e] != 0}
        self._hash = None

    @classmethod
    def constant(cls, value) -> "Polynomial3":
        return cls({(0, 0, 0): value})

    @classmethod
    def monomial(cls, a: int, b: int, c: int, coef=1) -> "Polynomial3":
        return cls({(a, b, c): coef})

    @property
    def terms(self) -> dict[Exponent, object]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, a: int, b: int, c: int):
        return self._terms.get((a, b, c), Fraction(0))

    @property
    def degrees(self) -> Exponent:
        """Highest exponent of each variable separately."""
        if not self._terms:
            return (0, 0, 0)
        return tuple(max(e[k] for e in self._terms) for k in range(3))

    @property
    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self._terms.values())

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial3):
            return other
        if isinstance(other, Number):
            return Polynomial3.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial3(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial3({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            other = _as_coefficient(other)
            return Polynomial3({e: c * other for e, c in self._terms.items()})
        if not isinstance(other, Polynomial3):
            return NotImplemented
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Number):
            return NotImplemented
        other = _as_coefficient(other)
        return Polynomial3({e: c / other for e, c in self._terms.items()})

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Polynomial3.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Polynomial3.constant(other)
        if not isinstance(other, Polynomial3):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    # calculus -------------------------------------------------------------

    def derivative(self, axis: int) -> "Polynomial3":
        """Partial derivative with respect to variable ``axis`` (0, 1, 2)."""
        out = {}
        for e, c in self._terms.items():
            if e[axis]:
                d = list(e)
                d[axis] -= 1
                out[tuple(d)] = c * e[axis]
        return Polynomial3(out)

    def map_coefficients(self, fn) -> "Polynomial3":
        return Polynomial3({e: fn(c) for e, c in self._terms.items()})

    def to_float(self) -> "Polynomial3":
        return self.map_coefficients(float)

    def __call__(self, xi, eta=None, zeta=None):
        if eta is None and zeta is None:
            xi, eta, zeta = xi
        return poly_eval(self, (xi, eta, zeta))

    def __repr__(self):
        return f"Polynomial3({format_polynomial(self)!r})"

    def __str__(self):
        return format_polynomial(self)


XI = Polynomial3.monomial(1, 0, 0)
ETA = Polynomial3.monomial(0, 1, 0)
ZETA = Polynomial3.monomial(0, 0, 1)
ONE = Polynomial3.constant(1)


def poly_mul(p: Polynomial3, q: Polynomial3) -> Polynomial3:
    out: dict[Exponent, object] = {}
    for (a1, b1, c1), x in p.items():
        for (a2, b2, c2), y in q.items():
            key = (a1 + a2, b1 + b2, c1 + c2)
            out[key] = out.get(key, 0) + x * y
    return Polynomial3(out)


def poly_eval(p: Polynomial3, x):
    """Evaluate ``p`` at ``x = (xi, eta, zeta)``.

    Rational coordinates with rational coefficients give an exact
    :class:`Fraction`.  Coordinates may also be numpy arrays of equal shape,
    in which case evaluation is elementwise in floating point.
    """
    xi, eta, zeta = x
    if any(isinstance(v, np.ndarray) for v in (xi, eta, zeta)):
        xi, eta, zeta = (np.asarray(v, dtype=float) for v in (xi, eta, zeta))
        out = np.zeros(np.broadcast(xi, eta, zeta).shape)
        for (a, b, c), coef in p.items():
            out = out + float(coef) * xi**a * eta**b * zeta**c
        return out
    exact = p.is_exact and all(isinstance(v, (int, Fraction)) for v in (xi, eta, zeta))
    if not exact:
        xi, eta, zeta = float(xi), float(eta), float(zeta)
    total = Fraction(0) if exact else 0.0
    for (a, b, c), coef in p.items():
        total += (coef if exact else float(coef)) * xi**a * eta**b * zeta**c
    return total


def poly_eval_points(p: Polynomial3, points: np.ndarray) -> np.ndarray:
    """Float evaluation at an ``(n, 3)`` array of points."""
    points = np.asarray(points, dtype=float)
    return poly_eval(p, (points[:, 0], points[:, 1], points[:, 2]))


@lru_cache(maxsize=None)
def _axis_integral(a: int) -> Fraction:
    return Fraction(0) if a % 2 else Fraction(2, a + 1)


@lru_cache(maxsize=None)
def monomial_integral(a: int, b: int, c: int) -> Fraction:
    """Exact integral of ``xi^a eta^b zeta^c`` over ``[-1, 1]^3``."""
    return _axis_integral(a) * _axis_integral(b) * _axis_integral(c)


def integrate_cube(p: Polynomial3):
    """Integral of ``p`` over the reference cube (exact for rational ``p``)."""
    total = Fraction(0) if p.is_exact else 0.0
    for (a, b, c), coef in p.items():
        total += coef * monomial_integral(a, b, c)
    return total


def from_coefficients(pairs: Iterable[tuple[Exponent, object]]) -> Polynomial3:
    return Polynomial3(dict(pairs))


# text form -----------------------------------------------------------------

MAX_DENSITY_DEGREE = 8

_NUMBER = re.compile(r"^(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(/\d+)?$")
_FACTOR = re.compile(r"^([xyz])(\^(\d+))?$")


class PolynomialSyntaxError(ValueError):
    pass


def _parse_number(token: str) -> Fraction:
    if not _NUMBER.match(token):
        raise PolynomialSyntaxError(f"bad coefficient {token!r}")
    if "/" in token:
        num, den = token.split("/")
        return Fraction(num) / Fraction(den)
    return Fraction(token)


def parse_polynomial(text: str, max_degree: int = MAX_DENSITY_DEGREE) -> Polynomial3:
    """Parse ``'1 + 0.5*x - 2*x^2*y*z^3'`` style text (x, y, z = xi, eta, zeta).

    Decimal coefficients are read exactly (``0.1`` becomes ``1/10``).
    """
    src = text.replace(" ", "").replace("\t", "")
    if not src:
        raise PolynomialSyntaxError("empty expression")
    if src[0] not in "+-":
        src = "+" + src
    # a sign right after e/E belongs to an exponent such as 1e-3
    tokens = re.split(r"(?<![eE])([+-])", src)[1:]
    pieces = list(zip(tokens[::2], tokens[1::2]))
    terms: dict[Exponent, Fraction] = {}
    for sign, body in pieces:
        if not body:
            raise PolynomialSyntaxError(f"dangling sign in {text!r}")
        coef = Fraction(1)
        exps = [0, 0, 0]
        for factor in body.split("*"):
            m = _FACTOR.match(factor)
            if m:
                k = VARIABLE_NAMES.index(m.group(1))
                exps[k] += int(m.group(3) or 1)
            else:
                coef *= _parse_number(factor)
        if max(exps) > max_degree:
            raise PolynomialSyntaxError(
                f"degree {max(exps)} exceeds the limit of {max_degree} per variable"
            )
        key = tuple(exps)
        terms[key] = terms.get(key, Fraction(0)) + (coef if sign == "+" else -coef)
    return Polynomial3(terms)


def _format_coefficient(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(float(c))


def format_polynomial(p: Polynomial3) -> str:
    if not p:
        return "0"
    parts = []
    for exps, coef in p.items():
        factors = []
        for name, e in zip(VARIABLE_NAMES, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        sign = "-" if coef < 0 else "+"
        mag = _format_coefficient(abs(coef))
        if factors and mag == "1":
            body = "*".join(factors)
        else:
            body = "*".join([mag] + factors)
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def rational_str(value: Fraction) -> str:
    """Serialise a rational as ``"num/den"`` (denominator always written)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den or 1))
