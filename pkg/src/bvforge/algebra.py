"""Graded commutative polynomial algebra on lattice generators.

A monomial is a tuple of ``(Generator, exponent)`` pairs sorted by the global
generator order.  Odd generators appear with exponent 1.  A polynomial maps
monomials to coefficients; ``GradedPoly`` holds exact Gaussian rationals and
``NumPoly`` holds complex floats (used by the numerical layer only).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import IntEnum
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, NamedTuple

from .scalar import ONE, Scalar, as_scalar

__all__ = [
    "Kind", "Grading", "Mixed", "Generator", "GRADINGS", "ODD_KINDS",
    "GradedPoly", "NumPoly", "mul", "left_derivative", "right_derivative",
    "grading_of", "substitute", "mono_mul", "mono_parity", "mono_grading",
    "poly_from_text",
]


class Kind(IntEnum):
    FIELD = 0
    GHOST = 1
    ANTIGHOST = 2
    MULTIPLIER = 3
    FIELD_AF = 4
    GHOST_AF = 5
    ANTIGHOST_AF = 6
    MULTIPLIER_AF = 7

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def is_antifield(self) -> bool:
        return self >= 4

    @property
    def partner(self) -> "Kind":
        return Kind((self + 4) % 8)


_LABELS = {
    Kind.FIELD: "Field", Kind.GHOST: "Ghost", Kind.ANTIGHOST: "AntiGhost",
    Kind.MULTIPLIER: "Multiplier", Kind.FIELD_AF: "FieldAntifield",
    Kind.GHOST_AF: "GhostAntifield", Kind.ANTIGHOST_AF: "AntiGhostAntifield",
    Kind.MULTIPLIER_AF: "MultiplierAntifield",
}
_BY_LABEL = {v: k for k, v in _LABELS.items()}


@dataclass(frozen=True)
class Grading:
    pure_ghost: int
    antifield: int
    total_antifield: int
    odd: bool

    @property
    def ghost(self) -> int:
        return self.pure_ghost - self.antifield

    @property
    def parity(self) -> str:
        return "odd" if self.odd else "even"

    def __add__(self, other: "Grading") -> "Grading":
        return Grading(self.pure_ghost + other.pure_ghost,
                       self.antifield + other.antifield,
                       self.total_antifield + other.total_antifield,
                       self.odd != other.odd)

    def scaled(self, n: int) -> "Grading":
        return Grading(n * self.pure_ghost, n * self.antifield,
                       n * self.total_antifield, self.odd and n % 2 == 1)


@dataclass(frozen=True)
class Mixed:
    """Returned by grading queries when terms disagree (or the polynomial is 0)."""
    zero: bool = False


UNIT_GRADING = Grading(0, 0, 0, False)

# Antighosts carry pure ghost number -1 so that #af stays 0 on the
# configuration fields; see the notes in the README.
GRADINGS = {
    Kind.FIELD: Grading(0, 0, 0, False),
    Kind.GHOST: Grading(1, 0, 0, True),
    Kind.ANTIGHOST: Grading(-1, 0, 0, True),
    Kind.MULTIPLIER: Grading(0, 0, 0, False),
    Kind.FIELD_AF: Grading(0, 1, 1, True),
    Kind.GHOST_AF: Grading(0, 2, 1, False),
    Kind.ANTIGHOST_AF: Grading(1, 1, 1, False),
    Kind.MULTIPLIER_AF: Grading(0, 1, 1, True),
}
ODD_KINDS = frozenset(k for k, g in GRADINGS.items() if g.odd)
_ODD = frozenset(int(k) for k in ODD_KINDS)


class Generator(NamedTuple):
    """One graded symbol.  ``lie``/``tensor`` are -1 when absent."""
    kind: Kind
    lie: int
    tensor: int
    site: tuple

    @property
    def grading(self) -> Grading:
        return GRADINGS[self.kind]

    @property
    def odd(self) -> bool:
        return self.kind in _ODD

    @property
    def is_antifield(self) -> bool:
        return self.kind >= 4

    def partner(self) -> "Generator":
        """The conjugate generator (field <-> antifield) at the same indices."""
        return Generator(Kind((self.kind + 4) % 8), self.lie, self.tensor, self.site)

    def shifted(self, dt: int, dx: int, n_t: int, n_x: int) -> "Generator":
        t, x = self.site
        return self._replace(site=((t + dt) % n_t, (x + dx) % n_x))

    def text(self) -> str:
        lie = "-" if self.lie < 0 else str(self.lie)
        ten = "-" if self.tensor < 0 else str(self.tensor)
        t, x = self.site
        return f"{_LABELS[self.kind]}[{lie},{ten}]@({t},{x})"

    @classmethod
    def from_text(cls, text: str) -> "Generator":
        m = _GEN_RE.match(text)
        if not m or m.group(1) not in _BY_LABEL:
            raise ValueError(f"malformed generator {text!r}")
        lie = -1 if m.group(2) == "-" else int(m.group(2))
        ten = -1 if m.group(3) == "-" else int(m.group(3))
        return cls(_BY_LABEL[m.group(1)], lie, ten, (int(m.group(4)), int(m.group(5))))


_GEN_RE = re.compile(r"^(\w+)\[(-|\d+),(-|\d+)\]@\((-?\d+),(-?\d+)\)$")


# monomial kernels -----------------------------------------------------------

def mono_mul(a: tuple, b: tuple):
    """Return (sign, monomial) of a*b; sign 0 means the product vanishes."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    odd_a = 0
    for g, _ in a:
        if g[0] in _ODD:
            odd_a += 1
    out = []
    sign = 1
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        fa = a[i]
        fb = b[j]
        ga = fa[0]
        gb = fb[0]
        if ga < gb:
            out.append(fa)
            if ga[0] in _ODD:
                odd_a -= 1
            i += 1
        elif gb < ga:
            out.append(fb)
            if odd_a & 1 and gb[0] in _ODD:
                sign = -sign
            j += 1
        else:
            if ga[0] in _ODD:
                return 0, None
            out.append((ga, fa[1] + fb[1]))
            i += 1
            j += 1
    if i < na:
        out.extend(a[i:])
    elif j < nb:
        out.extend(b[j:])
    return sign, tuple(out)


def mono_parity(m: tuple) -> int:
    n = 0
    for g, _ in m:
        if g[0] in _ODD:
            n += 1
    return n & 1


def mono_grading(m: tuple) -> Grading:
    g = UNIT_GRADING
    for gen, e in m:
        g = g + GRADINGS[gen.kind].scaled(e)
    return g


def mono_degree(m: tuple) -> int:
    return sum(e for _, e in m)


def mono_text(m: tuple) -> str:
    return " * ".join(g.text() + (f"^{e}" if e > 1 else "") for g, e in m)


def _mono_dleft(m: tuple, g):
    """Left derivative of a monomial: (multiplier, monomial) or None."""
    odd_before = 0
    for k, (h, e) in enumerate(m):
        if h == g:
            if h[0] in _ODD:
                return (-1 if odd_before & 1 else 1), m[:k] + m[k + 1:]
            if e == 1:
                return 1, m[:k] + m[k + 1:]
            return e, m[:k] + ((h, e - 1),) + m[k + 1:]
        if h > g:
            return None
        if h[0] in _ODD:
            odd_before += 1
    return None


# polynomials ----------------------------------------------------------------

class _Poly:
    __slots__ = ("_terms", "_hash", "_dcache")

    def __init__(self, terms: Mapping | None = None):
        d = {}
        if terms:
            coerce = self._coerce
            for m, c in terms.items():
                c = coerce(c)
                if c:
                    d[tuple(m)] = c
        self._terms = d
        self._hash = None
        self._dcache = None

    @classmethod
    def _raw(cls, d: dict):
        p = object.__new__(cls)
        p._terms = d
        p._hash = None
        p._dcache = None
        return p

    # constructors
    @classmethod
    def zero(cls):
        return cls._raw({})

    @classmethod
    def constant(cls, c):
        c = cls._coerce(c)
        return cls._raw({(): c} if c else {})

    @classmethod
    def one(cls):
        return cls.constant(1)

    @classmethod
    def gen(cls, g: Generator, coeff=1):
        c = cls._coerce(coeff)
        return cls._raw({((g, 1),): c} if c else {})

    # mapping-like access
    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, mono: tuple):
        return self._terms.get(tuple(mono), self._coerce(0))

    def constant_term(self):
        return self._terms.get((), self._coerce(0))

    # equality
    def __eq__(self, other):
        if isinstance(other, _Poly):
            return type(self) is type(other) and self._terms == other._terms
        try:
            return self == self.constant(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # arithmetic
    def _lift(self, other):
        """Bring ``other`` into a common polynomial class with ``self``."""
        if isinstance(other, _Poly):
            if type(other) is type(self):
                return self, other
            return self.numeric(), other.numeric()
        return None

    def __add__(self, other):
        pair = self._lift(other)
        if pair is None:
            try:
                other = self.constant(other)
            except TypeError:
                return NotImplemented
            pair = (self, other)
        a, b = pair
        d = dict(a._terms)
        for m, c in b._terms.items():
            prev = d.get(m)
            if prev is None:
                d[m] = c
            else:
                s = prev + c
                if s:
                    d[m] = s
                else:
                    del d[m]
        return type(a)._raw(d)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, _Poly):
            return self + (-other)
        try:
            return self + self.constant(other) * -1
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = self._coerce(c)
        if not c:
            return type(self).zero()
        return type(self)._raw({m: v * c for m, v in self._terms.items()})

    def __mul__(self, other):
        pair = self._lift(other)
        if pair is None:
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        a, b = pair
        return type(a)._raw(_mul_terms(a._terms, b._terms))

    def __rmul__(self, other):
        # scalars commute with everything
        return self.__mul__(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = type(self).one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # structure queries
    def generators(self) -> set:
        out = set()
        for m in self._terms:
            for g, _ in m:
                out.add(g)
        return out

    def degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=-1)

    def grading(self):
        gs = {mono_grading(m) for m in self._terms}
        if len(gs) == 1:
            return gs.pop()
        return Mixed(zero=not self._terms)

    def parity(self):
        """0, 1, or None when terms disagree (the zero polynomial gives None)."""
        ps = {mono_parity(m) for m in self._terms}
        return ps.pop() if len(ps) == 1 else None

    def ghost_number(self):
        """Common total ghost number #pg - #af of all terms, or None."""
        gs = {mono_grading(m).ghost for m in self._terms}
        return gs.pop() if len(gs) == 1 else None

    def filter(self, pred: Callable[[tuple], bool]):
        return type(self)._raw({m: c for m, c in self._terms.items() if pred(m)})

    def part(self, *, antifield: int | None = None, total_antifield: int | None = None,
             ghost: int | None = None, pure_ghost: int | None = None):
        """Homogeneous component selected by one or more gradings."""
        def keep(m):
            g = mono_grading(m)
            return ((antifield is None or g.antifield == antifield)
                    and (total_antifield is None or g.total_antifield == total_antifield)
                    and (ghost is None or g.ghost == ghost)
                    and (pure_ghost is None or g.pure_ghost == pure_ghost))
        return self.filter(keep)

    def without_antifields(self):
        return self.filter(lambda m: all(g[0] < 4 for g, _ in m))

    def involution(self):
        """Grade involution: odd terms change sign."""
        return type(self)._raw({m: (-c if mono_parity(m) else c)
                                for m, c in self._terms.items()})

    # derivatives
    def left_derivative(self, g: Generator):
        if self._dcache is not None:
            return self._dcache.get(g) or type(self).zero()
        d = {}
        for m, c in self._terms.items():
            r = _mono_dleft(m, g)
            if r is None:
                continue
            k, rest = r
            v = c * k if k != 1 else c
            prev = d.get(rest)
            d[rest] = v if prev is None else prev + v
        return type(self)._raw({m: c for m, c in d.items() if c})

    def right_derivative(self, g: Generator):
        p = self.left_derivative(g)
        return p.involution() if g[0] in _ODD else p

    def derivatives(self) -> dict:
        """All nonzero left derivatives, computed in one pass and cached."""
        if self._dcache is not None:
            return self._dcache
        acc: dict = {}
        for m, c in self._terms.items():
            odd_before = 0
            for k, (h, e) in enumerate(m):
                if h[0] in _ODD:
                    rest = m[:k] + m[k + 1:]
                    v = -c if odd_before & 1 else c
                    odd_before += 1
                elif e == 1:
                    rest = m[:k] + m[k + 1:]
                    v = c
                else:
                    rest = m[:k] + ((h, e - 1),) + m[k + 1:]
                    v = c * e
                dh = acc.get(h)
                if dh is None:
                    acc[h] = {rest: v}
                else:
                    prev = dh.get(rest)
                    dh[rest] = v if prev is None else prev + v
        cls = type(self)
        out = {}
        for h, dh in acc.items():
            dh = {m: c for m, c in dh.items() if c}
            if dh:
                out[h] = cls._raw(dh)
        self._dcache = out
        return out

    # substitution / evaluation
    def substitute(self, bindings: Mapping):
        cls = type(self)
        imgs = {}
        for g, p in bindings.items():
            if not isinstance(p, _Poly):
                p = cls.constant(p)
            par = p.parity()
            if p and par is None:
                raise ValueError(f"binding for {g.text()} is not parity-homogeneous")
            if p and par != int(g.odd):
                raise ValueError(f"binding for {g.text()} changes parity")
            imgs[g] = p
        if not imgs:
            return self
        if any(isinstance(p, NumPoly) for p in imgs.values()) and cls is GradedPoly:
            return self.numeric().substitute(bindings)
        result = cls.zero()
        powers: dict = {}
        for m, c in self._terms.items():
            term = cls.constant(c)
            for g, e in m:
                img = imgs.get(g)
                if img is None:
                    fac = cls._raw({((g, e),): cls._coerce(1)})
                else:
                    key = (g, e)
                    fac = powers.get(key)
                    if fac is None:
                        fac = powers[key] = img ** e
                term = term * fac
                if not term:
                    break
            result = result + term
        return result

    def numeric(self) -> "NumPoly":
        return NumPoly._raw({m: complex(c) for m, c in self._terms.items()})

    def evaluate(self, values: Mapping, odd_zero: bool = True) -> "NumPoly":
        """Substitute numbers for even generators (missing ones count as 0).

        Odd generators are set to zero when ``odd_zero``; otherwise they are
        kept symbolic.
        """
        d: dict = {}
        for m, c in self._terms.items():
            v = complex(c)
            rest = []
            for g, e in m:
                if g[0] in _ODD:
                    if odd_zero:
                        v = 0.0
                        break
                    rest.append((g, e))
                else:
                    x = values.get(g, 0.0)
                    v *= x ** e
                    if v == 0:
                        break
            if v == 0:
                continue
            key = tuple(rest)
            d[key] = d.get(key, 0.0) + v
        return NumPoly._raw({m: c for m, c in d.items() if c != 0})

    # text
    def text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m in sorted(self._terms):
            c = self._terms[m]
            ct = self._ctext(c)
            parts.append(ct if not m else ct + " * " + mono_text(m))
        return " ; ".join(parts)

    def __repr__(self):
        return f"{type(self).__name__}({self.text()})"

    def __str__(self):
        return self.text()


def _mul_terms(ta: dict, tb: dict) -> dict:
    out: dict = {}
    for ma, ca in ta.items():
        for mb, cb in tb.items():
            s, m = mono_mul(ma, mb)
            if not s:
                continue
            c = ca * cb
            if s < 0:
                c = -c
            prev = out.get(m)
            out[m] = c if prev is None else prev + c
    return {m: c for m, c in out.items() if c}


class GradedPoly(_Poly):
    """Exact element of the graded algebra (Gaussian rational coefficients)."""
    __slots__ = ()
    _coerce = staticmethod(as_scalar)

    @staticmethod
    def _ctext(c: Scalar) -> str:
        return c.text()

    @classmethod
    def from_text(cls, text: str) -> "GradedPoly":
        return poly_from_text(text)


class NumPoly(_Poly):
    """Polynomial with complex floating-point coefficients."""
    __slots__ = ()

    @staticmethod
    def _coerce(c) -> complex:
        if isinstance(c, _Poly):
            raise TypeError("polynomial is not a coefficient")
        return complex(c)

    @staticmethod
    def _ctext(c: complex) -> str:
        return f"{c.real!r}{'+' if c.imag >= 0 else '-'}{abs(c.imag)!r}*i"

    def numeric(self) -> "NumPoly":
        return self

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def value(self) -> complex:
        """The constant term, requiring nothing else to be present."""
        extra = [m for m in self._terms if m]
        if extra:
            raise ValueError("polynomial still depends on generators")
        return self._terms.get((), 0j)


# functional API -------------------------------------------------------------

def mul(p: _Poly, q: _Poly) -> _Poly:
    return p * q


def left_derivative(p: _Poly, g: Generator) -> _Poly:
    return p.left_derivative(g)


def right_derivative(p: _Poly, g: Generator) -> _Poly:
    return p.right_derivative(g)


def grading_of(p: _Poly):
    return p.grading()


def substitute(p: _Poly, bindings: Mapping) -> _Poly:
    return p.substitute(bindings)


def poly_from_text(text: str) -> GradedPoly:
    text = text.strip()
    if text == "0":
        return GradedPoly.zero()
    result: dict = {}
    for part in text.split(" ; "):
        pieces = part.split(" * ")
        c = Scalar.from_text(pieces[0])
        mono: tuple = ()
        sign = 1
        for f in pieces[1:]:
            base, _, exp = f.partition("^")
            g = Generator.from_text(base)
            e = int(exp) if exp else 1
            if e < 1 or (g.odd and e != 1):
                raise ValueError(f"bad exponent in {f!r}")
            s, mono = mono_mul(mono, ((g, e),))
            if not s:
                raise ValueError(f"repeated odd generator in {part!r}")
            sign *= s
        c = c if sign > 0 else -c
        if mono in result:
            raise ValueError(f"duplicate monomial in {part!r}")
        result[mono] = c
    return GradedPoly(result)


def linear_combination(pairs: Iterable, cls=GradedPoly):
    out = cls.zero()
    for c, p in pairs:
        out = out + p * c
    return out
