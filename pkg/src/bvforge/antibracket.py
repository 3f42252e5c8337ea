"""The antibracket pairing each field generator with its antifield.

    {X, Y} = w * sum_Phi [ dR X/dPhi * dL Y/dPhi' - dR X/dPhi' * dL Y/dPhi ]

with w = 1/(dt dx).  Right derivatives are obtained from left ones by the
grade involution.  With this overall sign, {A, A'} = +w, and the three
identities (antisymmetry, Leibniz, Jacobi) hold in the form

    {Y, X} = -(-1)^{(|X|+1)(|Y|+1)} {X, Y}
    {X, YZ} = {X, Y} Z + (-1)^{|Y||Z|} {X, Z} Y
    {X, {Y, Z}} - (-1)^{(|X|+1)(|Y|+1)} {Y, {X, Z}} = {{X, Y}, Z}
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .algebra import Generator, GradedPoly, Mixed, _Poly, mono_mul, mono_parity
from .scalar import Scalar, as_scalar

__all__ = ["ConjugatePairing", "antibracket", "bracket_adjoint", "GradingError"]


class GradingError(ValueError):
    pass


@dataclass(frozen=True)
class ConjugatePairing:
    """Field/antifield bijection with weight 1/(dt dx) per pair."""
    weight: Scalar = Scalar(1)

    @staticmethod
    def partner(g: Generator) -> Generator:
        return g.partner()

    def bracket(self, x: _Poly, y: _Poly) -> _Poly:
        return antibracket(x, y, self.weight)

    @classmethod
    def for_model(cls, model) -> "ConjugatePairing":
        return cls(model.weight)


def _accumulate(out: dict, ta: dict, tb: dict, flip_odd_a: bool, sign: int) -> None:
    """out += sign * involution^flip(a) * b, term by term."""
    for ma, ca in ta.items():
        if flip_odd_a and mono_parity(ma):
            ca = -ca
        if sign < 0:
            ca = -ca
        for mb, cb in tb.items():
            s, m = mono_mul(ma, mb)
            if not s:
                continue
            c = ca * cb
            if s < 0:
                c = -c
            prev = out.get(m)
            out[m] = c if prev is None else prev + c


def antibracket(x: _Poly, y: _Poly, weight=1) -> _Poly:
    if isinstance(x, _Poly) and isinstance(y, _Poly) and type(x) is not type(y):
        x, y = x.numeric(), y.numeric()
    cls = type(x)
    dx = x.derivatives()
    if not dx:
        return cls.zero()
    dy = y.derivatives()
    out: dict = {}
    for g, dxg in dx.items():
        dyp = dy.get(g.partner())
        if dyp is None:
            continue
        # first slot: right derivative of x
        _accumulate(out, dxg._terms, dyp._terms, g.odd, -1 if g.is_antifield else 1)
    res = cls._raw({m: c for m, c in out.items() if c})
    w = cls._coerce(weight)
    if w != cls._coerce(1):
        res = res.scale(w)
    return res


def bracket_adjoint(psi: _Poly, weight=1) -> Callable[[_Poly], _Poly]:
    """X -> {psi, X} for a ghost-number -1, antifield-free psi."""
    if psi:
        g = psi.grading()
        if isinstance(g, Mixed) or g.ghost != -1 or g.antifield != 0 or not g.odd:
            raise GradingError(f"adjoint needs #gh -1, #af 0, odd; got {g}")
    if not psi:
        return lambda x: type(x).zero()

    def ad(x: _Poly) -> _Poly:
        return antibracket(psi, x, weight)
    return ad
