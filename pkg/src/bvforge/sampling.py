"""Seeded random elements of the algebra for the property suites."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .algebra import GradedPoly, mono_grading, mono_mul
from .scalar import Scalar

__all__ = ["DEFAULT_SEED", "random_monomial", "random_homogeneous", "random_scalar"]

DEFAULT_SEED = 20240531


def random_scalar(rng: np.random.Generator, complex_part: bool = True) -> Scalar:
    re = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
    im = Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3))) if complex_part else 0
    if re == 0 and im == 0:
        re = Fraction(1)
    return Scalar(re, im)


def random_monomial(rng: np.random.Generator, gens: list, degree: int) -> tuple:
    """A nonzero monomial of the given degree (odd generators at most once)."""
    for _ in range(100):
        mono: tuple = ()
        for k in rng.integers(0, len(gens), size=degree):
            s, mono = mono_mul(mono, ((gens[int(k)], 1),))
            if not s:
                break
        else:
            return mono
    raise ValueError("could not draw a nonzero monomial")


def random_homogeneous(rng: np.random.Generator, gens: list, max_degree: int = 3,
                       max_terms: int = 3, min_degree: int = 1) -> GradedPoly:
    """Sum of up to ``max_terms`` monomials sharing one grading."""
    d = int(rng.integers(min_degree, max_degree + 1))
    lead = random_monomial(rng, gens, d)
    target = mono_grading(lead) if lead else None
    terms = {lead: random_scalar(rng)}
    want = int(rng.integers(1, max_terms + 1))
    tries = 0
    while len(terms) < want and tries < 40:
        tries += 1
        m = random_monomial(rng, gens, int(rng.integers(min_degree, max_degree + 1)))
        if m and mono_grading(m) == target and m not in terms:
            terms[m] = random_scalar(rng)
    return GradedPoly._raw(terms)
