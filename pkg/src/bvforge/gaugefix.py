"""Gauge-fixing fermions and the canonical transformation they generate."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import Generator, GradedPoly, Kind, Mixed, _Poly, mono_grading
from .antibracket import antibracket, bracket_adjoint
from .bvcomplex import derivation_from_images
from .lattice import BACKWARD, ETA, ModelSpec, field_ref
from .scalar import I, Scalar

__all__ = [
    "GaugeFermion", "GaugeFixedTheory", "SplitError", "lorenz_fermion", "alpha_psi",
    "apply_gauge_fermion", "split_differential", "gauge_fix", "gauge_fixed_lagrangian",
    "brst_table", "CONFIG_KINDS", "HomomorphismReport", "homomorphism_check",
    "expected_brst_table",
]

CONFIG_KINDS = (Kind.FIELD, Kind.GHOST, Kind.ANTIGHOST, Kind.MULTIPLIER)


class SplitError(RuntimeError):
    pass


@dataclass(frozen=True)
class GaugeFermion:
    psi: GradedPoly
    alpha: Fraction = Fraction(1)

    def __post_init__(self):
        if self.psi:
            g = self.psi.grading()
            if isinstance(g, Mixed) or g.ghost != -1 or g.antifield != 0:
                raise ValueError(f"gauge fermion needs #gh -1 and #af 0, got {g}")
            if any(h.is_antifield for h in self.psi.generators()):
                raise ValueError("gauge fermion contains antifields")


def lorenz_fermion(model: ModelSpec, alpha=None) -> GaugeFermion:
    """psi = i sum_s dt dx [ (alpha/2) Cbar^I B^I + Cbar^I eta^{mu nu} D_mu A^I_nu ].

    The divergence uses backward differences so that, paired with the forward
    differences of D_mu C, the ghost operator is the standard 3-point stencil.
    """
    if model.kind != "yang-mills":
        raise ValueError("the Lorenz fermion needs a Yang-Mills model")
    alpha = model.alpha if alpha is None else Fraction(alpha)
    lat = model.lattice
    half_a = Scalar(alpha / 2)
    total = GradedPoly.zero()
    for s in lat.sites():
        for a in range(model.dim_g):
            cbar = GradedPoly.gen(Generator(Kind.ANTIGHOST, a, -1, s))
            b = GradedPoly.gen(Generator(Kind.MULTIPLIER, a, -1, s))
            div = GradedPoly.zero()
            for mu in range(2):
                div = div + BACKWARD[mu](field_ref(Kind.FIELD, a, mu, lat), s, lat) * ETA[mu]
            total = total + cbar * b * half_a + cbar * div
    return GaugeFermion(total * (I * Scalar(lat.volume)), alpha)


def alpha_psi(x: _Poly, psi: GradedPoly, weight=1, max_terms: int | None = None) -> _Poly:
    """sum_n 1/n! ad_psi^n (x); finite because ad_psi lowers #af by one."""
    ad = bracket_adjoint(psi, weight)
    if max_terms is None:
        afs = [mono_grading(m).antifield for m in x.terms]
        max_terms = (max(afs) if afs else 0) + 1
    total = x
    term = x
    for n in range(1, max_terms + 1):
        term = ad(term) * Scalar(Fraction(1, n))
        if not term:
            return total
        total = total + term
    if ad(term):
        raise AssertionError("gauge-fermion series did not terminate within the #af bound")
    return total


def apply_gauge_fermion(lag: GradedPoly, fermion: GaugeFermion, weight=1) -> GradedPoly:
    return alpha_psi(lag, fermion.psi, weight)


def split_differential(l_tilde: GradedPoly, generators, weight=1):
    """Images of s~ = delta^g + gamma^g, separated by the #ta shift.

    delta^g lowers #ta by one, gamma^g keeps it.  Any other piece is an error.
    """
    delta, gamma = {}, {}
    for g in generators:
        img = antibracket(l_tilde, GradedPoly.gen(g), weight)
        if not img:
            continue
        ta = g.grading.total_antifield
        d = img.filter(lambda m, t=ta - 1: mono_grading(m).total_antifield == t)
        c = img.filter(lambda m, t=ta: mono_grading(m).total_antifield == t)
        rest = img - d - c
        if rest:
            m = next(iter(rest.terms))
            raise SplitError(f"s~({g.text()}) has a third homogeneous part, e.g. "
                             f"{GradedPoly._raw({m: rest.terms[m]}).text()}")
        if d:
            delta[g] = d
        if c:
            gamma[g] = c
    return delta, gamma


@dataclass(frozen=True)
class GaugeFixedTheory:
    model: ModelSpec
    fermion: GaugeFermion
    L_tilde: GradedPoly
    L_g: GradedPoly
    delta_g: dict
    gamma_g: dict

    @property
    def weight(self) -> Scalar:
        return self.model.weight

    def s_tilde(self, p: _Poly) -> _Poly:
        return self.delta(p) + self.gamma(p)

    def delta(self, p: _Poly) -> _Poly:
        return derivation_from_images(self.delta_g, p)

    def gamma(self, p: _Poly) -> _Poly:
        return derivation_from_images(self.gamma_g, p)

    def gamma_config(self, p: _Poly) -> _Poly:
        """gamma^g restricted to antifield-free generators (acts on L_g, F, G)."""
        imgs = {g: v for g, v in self.gamma_g.items() if not g.is_antifield}
        return derivation_from_images(imgs, p)


def gauge_fix(model: ModelSpec, fermion: GaugeFermion | None = None) -> GaugeFixedTheory:
    fermion = lorenz_fermion(model) if fermion is None else fermion
    w = model.weight
    lt = apply_gauge_fermion(model.lagrangian, fermion, w)
    lg = lt.without_antifields()
    delta, gamma = split_differential(lt, model.generators(), w)
    return GaugeFixedTheory(model, fermion, lt, lg, delta, gamma)


def gauge_fixed_lagrangian(theory: GaugeFixedTheory) -> GradedPoly:
    return theory.L_g


def brst_table(theory: GaugeFixedTheory, site=(0, 0)) -> dict:
    """gamma^g images of the configuration generators at one site.

    Keys are (kind label, lie, tensor); values are polynomials.
    """
    out = {}
    for kind in CONFIG_KINDS:
        for a in range(theory.model.dim_g):
            for mu in ((0, 1) if kind == Kind.FIELD else (-1,)):
                g = Generator(kind, a, mu, site)
                out[(kind.label, a, mu)] = theory.gamma_g.get(g, GradedPoly.zero())
    return out


@dataclass
class HomomorphismReport:
    checked: int
    product_failures: list
    bracket_failures: list

    @property
    def passed(self) -> bool:
        return not self.product_failures and not self.bracket_failures


def homomorphism_check(theory: GaugeFixedTheory, pairs) -> HomomorphismReport:
    """alpha_Psi(XY) = alpha_Psi(X) alpha_Psi(Y) and likewise for the antibracket."""
    psi, w = theory.fermion.psi, theory.weight
    a = lambda p: alpha_psi(p, psi, w)
    rep = HomomorphismReport(0, [], [])
    for x, y in pairs:
        rep.checked += 1
        ax, ay = a(x), a(y)
        if a(x * y) != ax * ay:
            rep.product_failures.append((x, y))
        if a(antibracket(x, y, w)) != antibracket(ax, ay, w):
            rep.bracket_failures.append((x, y))
    return rep


def expected_brst_table(model: ModelSpec, site=(0, 0)) -> dict:
    """A -> DC, C -> -1/2 [C, C], Cbar -> i B, B -> 0, keyed like brst_table."""
    from .lattice import covariant_ghost_derivative
    lat, f, n = model.lattice, model.structure_constants, model.dim_g
    ghost = lambda a: GradedPoly.gen(Generator(Kind.GHOST, a, -1, site))
    out = {}
    for a in range(n):
        for mu in (0, 1):
            out[(Kind.FIELD.label, a, mu)] = covariant_ghost_derivative(lat, f, a, mu, site)
    for a in range(n):
        cc = GradedPoly.zero()
        for j in range(n):
            for k in range(n):
                if f[a][j][k]:
                    cc = cc + ghost(j) * ghost(k) * Scalar(f[a][j][k])
        out[(Kind.GHOST.label, a, -1)] = cc * Scalar(Fraction(-1, 2))
        out[(Kind.ANTIGHOST.label, a, -1)] = GradedPoly.gen(
            Generator(Kind.MULTIPLIER, a, -1, site)) * I
        out[(Kind.MULTIPLIER.label, a, -1)] = GradedPoly.zero()
    return out
