"""Expression micro-grammar for functionals on the lattice.

    expr   := term (("+" | "-") term)*
    term   := power ("*" power)*
    power  := atom ("^" INT)?
    atom   := NUMBER | "i" | ref | OP "(" expr ")" | "(" expr ")" | "-" atom
    ref    := NAME ("[" idx ("," idx)? "]")? "@" "(" INT "," INT ")"
    OP     := Dt | Dx | Dbt | Dbx | Dct | Dcx

NAME is one of phi, A, C, Cbar, B.  Numbers are integers or p/q.  The
difference operators shift every generator in their argument.
"""
from __future__ import annotations

import re

from .algebra import Generator, GradedPoly, Kind
from .lattice import DiscreteDerivative, Lattice, translate
from .scalar import I, Scalar, parse_rational

__all__ = ["parse_expr", "ExprError"]


class ExprError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(.))")
_NAMES = {"phi": Kind.FIELD, "A": Kind.FIELD, "C": Kind.GHOST, "Cbar": Kind.ANTIGHOST,
          "B": Kind.MULTIPLIER}
_OPS = {"Dt": (0, "forward"), "Dx": (1, "forward"), "Dbt": (0, "backward"),
        "Dbx": (1, "backward"), "Dct": (0, "central"), "Dcx": (1, "central")}


def _tokens(text: str) -> list:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprError(f"cannot tokenize at {text[pos:]!r}")
        pos = m.end()
        if m.group(1):
            out.append(("num", m.group(1)))
        elif m.group(2):
            out.append(("name", m.group(2)))
        elif m.group(3) and not m.group(3).isspace():
            out.append(("sym", m.group(3)))
    return out


class _Parser:
    def __init__(self, text: str, lattice: Lattice):
        self.toks = _tokens(text)
        self.i = 0
        self.lat = lattice

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ExprError(f"expected {value or kind}, found {tok[1]!r}")
        self.i += 1
        return tok[1]

    def parse(self) -> GradedPoly:
        p = self.expr()
        if self.peek()[0] is not None:
            raise ExprError(f"trailing input at {self.peek()[1]!r}")
        return p

    def expr(self) -> GradedPoly:
        p = self.term()
        while self.peek() in (("sym", "+"), ("sym", "-")):
            op = self.take()
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> GradedPoly:
        p = self.power()
        while self.peek() == ("sym", "*"):
            self.take()
            p = p * self.power()
        return p

    def power(self) -> GradedPoly:
        p = self.atom()
        if self.peek() == ("sym", "^"):
            self.take()
            p = p ** int(self.take("num"))
        return p

    def _int(self) -> int:
        neg = False
        if self.peek() == ("sym", "-"):
            self.take()
            neg = True
        v = int(self.take("num"))
        return -v if neg else v

    def atom(self) -> GradedPoly:
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return GradedPoly.constant(Scalar(parse_rational(val)))
        if (kind, val) == ("sym", "-"):
            self.take()
            return -self.atom()
        if (kind, val) == ("sym", "("):
            self.take()
            p = self.expr()
            self.take("sym", ")")
            return p
        if kind == "name" and val == "i":
            self.take()
            return GradedPoly.constant(I)
        if kind == "name" and val in _OPS:
            self.take()
            direction, scheme = _OPS[val]
            self.take("sym", "(")
            p = self.expr()
            self.take("sym", ")")
            d = DiscreteDerivative(direction, scheme)
            out = GradedPoly.zero()
            for k, w in d.stencil(self.lat):
                kt, kx = (k, 0) if direction == 0 else (0, k)
                out = out + translate(p, kt, kx, self.lat) * Scalar(w)
            return out
        if kind == "name" and val in _NAMES:
            self.take()
            return GradedPoly.gen(self.ref(val))
        raise ExprError(f"unexpected token {val!r}")

    def ref(self, name: str) -> Generator:
        idx = []
        if self.peek() == ("sym", "["):
            self.take()
            idx.append(self._int())
            while self.peek() == ("sym", ","):
                self.take()
                idx.append(self._int())
            self.take("sym", "]")
        self.take("sym", "@")
        self.take("sym", "(")
        t = self._int()
        self.take("sym", ",")
        x = self._int()
        self.take("sym", ")")
        site = self.lat.site(t, x)
        if name == "phi":
            if idx:
                raise ExprError("phi takes no indices")
            return Generator(Kind.FIELD, -1, -1, site)
        if name == "A":
            if len(idx) != 2:
                raise ExprError("A needs [lie, mu]")
            return Generator(Kind.FIELD, idx[0], idx[1], site)
        if len(idx) != 1:
            raise ExprError(f"{name} needs [lie]")
        return Generator(_NAMES[name], idx[0], -1, site)


def parse_expr(text: str, lattice: Lattice) -> GradedPoly:
    return _Parser(text, lattice).parse()
