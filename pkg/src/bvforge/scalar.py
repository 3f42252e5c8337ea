"""Exact Gaussian rationals a + b*i with a, b in Q."""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

__all__ = ["Scalar", "ZERO", "ONE", "I", "as_scalar", "parse_rational"]

_MPQ = type(mpq(0))
_RAT = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse "p" or "p/q"; raises ValueError on anything else."""
    m = _RAT.match(text)
    if not m or (m.group(2) is not None and int(m.group(2)) == 0):
        raise ValueError(f"malformed rational {text!r}")
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def _q(x) -> _MPQ:
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, bool):
        return mpq(int(x))
    if isinstance(x, (int, Rational)):
        return mpq(x)
    if isinstance(x, str):
        f = parse_rational(x)
        return mpq(f.numerator, f.denominator)
    raise TypeError(f"exact rational expected, got {type(x).__name__}")


class Scalar:
    """Gaussian rational. Immutable; floats are rejected."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _q(re))
        object.__setattr__(self, "im", _q(im))

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @staticmethod
    def _wrap(re, im) -> "Scalar":
        s = object.__new__(Scalar)
        object.__setattr__(s, "re", re)
        object.__setattr__(s, "im", im)
        return s

    # arithmetic
    def __add__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return Scalar._wrap(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return Scalar._wrap(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return Scalar._wrap(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, int):
            return Scalar._wrap(self.re * other, self.im * other)
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        if not o.im:
            return Scalar._wrap(self.re * o.re, self.im * o.re)
        if not self.im:
            return Scalar._wrap(self.re * o.re, self.re * o.im)
        return Scalar._wrap(self.re * o.re - self.im * o.im,
                            self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self) -> "Scalar":
        return Scalar._wrap(self.re, -self.im)

    def inverse(self) -> "Scalar":
        n = self.re * self.re + self.im * self.im
        if not n:
            raise ZeroDivisionError("Scalar division by zero")
        return Scalar._wrap(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    # comparison / hashing
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"Scalar({self.text()})"

    def text(self) -> str:
        """Canonical form "a/b+c/d*i"."""
        im = self.im
        sign = "-" if im < 0 else "+"
        return f"{self.re}{sign}{abs(im)}*i"

    @classmethod
    def from_text(cls, text: str) -> "Scalar":
        m = re.match(r"^([+-]?\d+(?:/\d+)?)([+-])(\d+(?:/\d+)?)\*i$", text.strip())
        if not m:
            raise ValueError(f"malformed Gaussian rational {text!r}")
        im = _q(m.group(3))
        return cls(_q(m.group(1)), -im if m.group(2) == "-" else im)


def as_scalar(x, strict: bool = True):
    if isinstance(x, Scalar):
        return x
    try:
        return Scalar._wrap(_q(x), mpq(0))
    except TypeError:
        if strict:
            raise
        return None


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)
