"""BV differential, master equation, nilpotency and truncated homology."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable, Iterable

from . import linalg
from .algebra import Generator, GradedPoly, _Poly, mono_degree, mono_grading, mono_mul, mono_text
from .antibracket import antibracket
from .scalar import Scalar

__all__ = [
    "BVDifferential", "CMEError", "TruncationOverflow", "TruncatedComplex",
    "bv_differential", "cme_residual", "check_nilpotency", "NilpotencyReport",
    "build_truncated_complex", "homology_dims", "derivation_from_images",
]


class CMEError(RuntimeError):
    def __init__(self, residual: GradedPoly):
        super().__init__(f"classical master equation fails: {len(residual)} residual terms")
        self.residual = residual


class TruncationOverflow(ValueError):
    def __init__(self, monomial: tuple, source: tuple):
        super().__init__(f"image term {mono_text(monomial) or '1'} of {mono_text(source)} "
                         f"lies outside the truncation")
        self.monomial = monomial
        self.source = source


def derivation_from_images(images: dict, p: _Poly) -> _Poly:
    """Left derivation D(p) = sum_g D(g) * dL p / dg."""
    out = type(p).zero()
    for g, dp in p.derivatives().items():
        img = images.get(g)
        if img:
            out = out + img * dp
    return out


@dataclass(frozen=True)
class BVDifferential:
    generator_images: dict
    source_lagrangian: GradedPoly
    weight: Scalar = Scalar(1)

    def __call__(self, p: _Poly) -> _Poly:
        return derivation_from_images(self.generator_images, p)

    def part(self, shift: int) -> "BVDifferential":
        """The piece changing #af by ``shift`` (-1 for Koszul-Tate, 0 for the rest)."""
        imgs = {}
        for g, img in self.generator_images.items():
            target = g.grading.antifield + shift
            q = img.filter(lambda m, t=target: mono_grading(m).antifield == t)
            if q:
                imgs[g] = q
        return BVDifferential(imgs, self.source_lagrangian, self.weight)

    @property
    def koszul_tate(self) -> "BVDifferential":
        return self.part(-1)

    @property
    def longitudinal(self) -> "BVDifferential":
        return self.part(0)

    def image(self, g: Generator) -> GradedPoly:
        return self.generator_images.get(g, GradedPoly.zero())


def cme_residual(lag: GradedPoly, weight=1) -> GradedPoly:
    return antibracket(lag, lag, weight)


def differential_from_lagrangian(lag: GradedPoly, generators: Iterable, weight=1) -> BVDifferential:
    """s g = {L, g}: the left-acting convention (see README)."""
    imgs = {}
    for g in generators:
        img = antibracket(lag, GradedPoly.gen(g), weight)
        if img:
            imgs[g] = img
    return BVDifferential(imgs, lag, weight)


def bv_differential(model, require_cme: bool = True) -> BVDifferential:
    if require_cme:
        r = cme_residual(model.lagrangian, model.weight)
        if r:
            raise CMEError(r)
    return differential_from_lagrangian(model.lagrangian, model.generators(), model.weight)


@dataclass
class NilpotencyReport:
    checked: int
    failures: list = field(default_factory=list)   # (input, s^2 input)

    @property
    def passed(self) -> bool:
        return not self.failures


def check_nilpotency(s: Callable, sample: Iterable) -> NilpotencyReport:
    rep = NilpotencyReport(0)
    for x in sample:
        rep.checked += 1
        y = s(s(x))
        if y:
            rep.failures.append((x, y))
    return rep


# truncated complexes --------------------------------------------------------

def _enumerate_monomials(gens: list, af: int, lo: int, hi: int) -> list:
    out = []
    gens = sorted(gens)
    for d in range(lo, hi + 1):
        for combo in combinations_with_replacement(gens, d):
            ok = True
            for a, b in zip(combo, combo[1:]):
                if a == b and a.odd:
                    ok = False
                    break
            if not ok:
                continue
            if sum(g.grading.antifield for g in combo) != af:
                continue
            mono: tuple = ()
            for g in combo:
                _, mono = mono_mul(mono, ((g, 1),))
            out.append(mono)
    if lo == 0 and af == 0 and () not in out:
        out.insert(0, ())
    return sorted(set(out), key=lambda m: (mono_degree(m), m))


@dataclass
class TruncatedComplex:
    degree_window: tuple
    poly_degree_cap: int
    basis: dict                      # #af -> list of monomials
    matrices: dict                   # k -> column-wise matrix of d_k : C_k -> C_{k-1}
    min_degree: int = 1
    caveats: list = field(default_factory=list)
    shift: int = -1                  # d_k maps C_k to C_(k+shift)

    def dimension(self, k: int) -> int:
        return len(self.basis.get(k, []))

    def check_square_zero(self) -> bool:
        for k, mat in self.matrices.items():
            nxt = self.matrices.get(k + self.shift)
            if nxt is None:
                continue
            if not linalg.is_zero_matrix(linalg.matmul(nxt, mat)):
                return False
        return True

    def vector(self, k: int, p: GradedPoly) -> dict:
        index = {m: i for i, m in enumerate(self.basis[k])}
        out = {}
        for m, c in p.items():
            if m not in index:
                raise TruncationOverflow(m, ())
            out[index[m]] = c
        return out

    def preimage(self, k: int, p: GradedPoly):
        """Exact x in C_(k-shift) with d x = p, or None."""
        return linalg.solve(self.matrices.get(k - self.shift, {}), self.vector(k, p))


def build_truncated_complex(s_part: Callable, generators: Iterable, window: tuple, cap: int,
                            min_degree: int = 1, shift: int = -1) -> TruncatedComplex:
    """Matrices of an #af-homogeneous differential in monomial bases.

    Basis of C_k: monomials with #af = k and min_degree <= degree <= cap.
    ``shift`` is the #af change of s_part (-1 for Koszul-Tate).
    """
    gens = list(generators)
    lo, hi = window
    basis = {k: _enumerate_monomials(gens, k, min_degree, cap) for k in range(lo, hi + 1)}
    index = {k: {m: i for i, m in enumerate(b)} for k, b in basis.items()}
    mats: dict = {}
    for k in range(lo, hi + 1):
        tgt = k + shift
        if tgt not in basis:
            continue
        cols: dict = {}
        for j, m in enumerate(basis[k]):
            img = s_part(GradedPoly._raw({m: Scalar(1)}))
            col = {}
            for mi, c in img.items():
                i = index[tgt].get(mi)
                if i is None:
                    raise TruncationOverflow(mi, m)
                col[i] = c
            if col:
                cols[j] = col
        mats[k] = cols
    cx = TruncatedComplex((lo, hi), cap, basis, mats, min_degree, shift=shift)
    if not cx.check_square_zero():
        raise ArithmeticError("differential does not square to zero on the truncation")
    return cx


def homology_dims(cx: TruncatedComplex, k: int) -> int:
    lo, hi = cx.degree_window
    if not lo <= k <= hi:
        raise ValueError(f"degree {k} outside window {cx.degree_window}")
    dim = cx.dimension(k)
    src = k - cx.shift
    r_out = linalg.rank(cx.matrices[k]) if k in cx.matrices else 0
    r_in = linalg.rank(cx.matrices[src]) if src in cx.matrices else 0
    return dim - r_out - r_in
