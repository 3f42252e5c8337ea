"""Periodic 1+1 dimensional lattice, discrete derivatives and model builders."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator

import numpy as np

from .algebra import Generator, GradedPoly, Kind, Mixed
from .scalar import I, Scalar

__all__ = [
    "Lattice", "DiscreteDerivative", "DensityTemplate", "FieldSpecies", "ModelSpec",
    "local_sum", "build_scalar_model", "build_ym_model", "epsilon_constants",
    "check_antisymmetry", "check_jacobi", "ETA", "ModelError", "zero_constants",
    "jacobi_defect", "field_ref", "D_T", "D_X", "DB_T", "DB_X", "FORWARD", "BACKWARD",
]

# metric diag(-1, +1); index 0 is time, 1 is space
ETA = (-1, 1)


class ModelError(ValueError):
    """Invalid model data (bad constants, stencil too wide, ...)."""


def _rat(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("lattice spacings must be exact rationals")
    return Fraction(x)


@dataclass(frozen=True)
class Lattice:
    n_t: int
    n_x: int
    dt: Fraction = Fraction(1)
    dx: Fraction = Fraction(1)

    def __post_init__(self):
        if self.n_t < 2 or self.n_x < 2:
            raise ModelError("lattice needs n_t, n_x >= 2")
        object.__setattr__(self, "dt", _rat(self.dt))
        object.__setattr__(self, "dx", _rat(self.dx))
        if self.dt <= 0 or self.dx <= 0:
            raise ModelError("spacings must be positive")

    @property
    def n_sites(self) -> int:
        return self.n_t * self.n_x

    @property
    def volume(self) -> Fraction:
        return self.dt * self.dx

    @property
    def cfl(self) -> Fraction:
        return self.dt / self.dx

    def spacing(self, direction: int) -> Fraction:
        return self.dt if direction == 0 else self.dx

    def extent(self, direction: int) -> int:
        return self.n_t if direction == 0 else self.n_x

    def site(self, t: int, x: int) -> tuple:
        return (t % self.n_t, x % self.n_x)

    def shift(self, s: tuple, direction: int, k: int = 1) -> tuple:
        t, x = s
        return self.site(t + k, x) if direction == 0 else self.site(t, x + k)

    def sites(self) -> Iterator[tuple]:
        return ((t, x) for t in range(self.n_t) for x in range(self.n_x))


def _dir(direction) -> int:
    if direction in (0, "t"):
        return 0
    if direction in (1, "x"):
        return 1
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class DiscreteDerivative:
    """First difference along t or x.  ``forward`` and ``backward`` are
    adjoint up to sign under the periodic sum."""
    direction: int
    scheme: str = "forward"

    def __post_init__(self):
        object.__setattr__(self, "direction", _dir(self.direction))
        if self.scheme not in ("forward", "backward", "central"):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def stencil(self, lattice: Lattice) -> list:
        """(offset, weight) pairs with exact weights."""
        h = lattice.spacing(self.direction)
        if self.scheme == "forward":
            return [(1, 1 / h), (0, -1 / h)]
        if self.scheme == "backward":
            return [(0, 1 / h), (-1, -1 / h)]
        return [(1, 1 / (2 * h)), (-1, -1 / (2 * h))]

    def __call__(self, f: Callable[[tuple], GradedPoly], s: tuple, lattice: Lattice) -> GradedPoly:
        out = GradedPoly.zero()
        for k, w in self.stencil(lattice):
            out = out + f(lattice.shift(s, self.direction, k)) * w
        return out

    def apply_array(self, u: np.ndarray, lattice: Lattice) -> np.ndarray:
        """Apply to a (n_t, n_x) array of numbers."""
        out = np.zeros_like(u, dtype=float if not np.iscomplexobj(u) else complex)
        for k, w in self.stencil(lattice):
            out = out + float(w) * np.roll(u, -k, axis=self.direction)
        return out

    def matrix(self, lattice: Lattice) -> np.ndarray:
        """Dense matrix on the flattened (t, x) site index."""
        n = lattice.n_sites
        m = np.zeros((n, n))
        for t, x in lattice.sites():
            row = t * lattice.n_x + x
            for k, w in self.stencil(lattice):
                tt, xx = lattice.shift((t, x), self.direction, k)
                m[row, tt * lattice.n_x + xx] += float(w)
        return m


D_T = DiscreteDerivative(0, "forward")
D_X = DiscreteDerivative(1, "forward")
DB_T = DiscreteDerivative(0, "backward")
DB_X = DiscreteDerivative(1, "backward")
FORWARD = (D_T, D_X)
BACKWARD = (DB_T, DB_X)


def field_ref(kind: Kind, lie: int = -1, tensor: int = -1, lattice: Lattice | None = None):
    """Callable site -> generator polynomial (sites reduced mod the lattice)."""
    def f(s):
        if lattice is not None:
            s = lattice.site(*s)
        return GradedPoly.gen(Generator(kind, lie, tensor, s))
    return f


@dataclass(frozen=True)
class DensityTemplate:
    """Site-indexed density; ``reach`` bounds the stencil in (t, x)."""
    func: Callable[[tuple], GradedPoly]
    reach: tuple = (1, 1)

    def __call__(self, s: tuple) -> GradedPoly:
        return self.func(s)


def _periodic_distance(a: int, b: int, n: int) -> int:
    d = (a - b) % n
    return min(d, n - d)


def local_sum(template: DensityTemplate, lattice: Lattice) -> GradedPoly:
    """Sum of the density over all sites with weight dt*dx."""
    rt, rx = template.reach
    if rt >= lattice.n_t:
        raise ModelError(f"stencil reach {rt} in t does not fit n_t={lattice.n_t}")
    if rx >= lattice.n_x:
        raise ModelError(f"stencil reach {rx} in x does not fit n_x={lattice.n_x}")
    ref = template((0, 0))
    for g in ref.generators():
        t, x = g.site
        if _periodic_distance(t, 0, lattice.n_t) > rt or _periodic_distance(x, 0, lattice.n_x) > rx:
            raise ModelError(f"density references {g.text()} outside the declared stencil")
    total = GradedPoly.zero()
    for s in lattice.sites():
        total = total + template(s)
    return total * Scalar(lattice.volume)


# structure constants --------------------------------------------------------

def epsilon_constants(dim: int = 3) -> tuple:
    if dim != 3:
        raise ModelError("the epsilon constants need dim 3")
    f = [[[Fraction(0)] * 3 for _ in range(3)] for _ in range(3)]
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        f[a][b][c] = Fraction(1)
        f[a][c][b] = Fraction(-1)
    return _freeze(f)


def zero_constants(dim: int = 3) -> tuple:
    return _freeze([[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)])


def _freeze(f) -> tuple:
    return tuple(tuple(tuple(Fraction(v) for v in row) for row in mat) for mat in f)


def check_antisymmetry(f) -> None:
    """Total antisymmetry of f^{IJK}; raises naming the offending index pair."""
    n = len(f)
    for a, b, c in product(range(n), repeat=3):
        v = f[a][b][c]
        for (p, q, r), sgn in (((b, c, a), 1), ((c, a, b), 1), ((b, a, c), -1),
                              ((a, c, b), -1), ((c, b, a), -1)):
            if f[p][q][r] != sgn * v:
                raise ModelError(
                    f"f^{{{a + 1}{b + 1}{c + 1}}} = {v} and f^{{{p + 1}{q + 1}{r + 1}}} = "
                    f"{f[p][q][r]} violate total antisymmetry")


def jacobi_defect(f) -> list:
    """List of (a, b, c, m, value) where the Jacobi identity fails.

    Convention [e_b, e_c] = f^{Lbc} e_L.
    """
    n = len(f)
    out = []
    for a, b, c in product(range(n), repeat=3):
        for m in range(n):
            v = Fraction(0)
            for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                for L in range(n):
                    v += f[L][y][z] * f[m][x][L]
            if v:
                out.append((a, b, c, m, v))
    return out


def check_jacobi(f) -> None:
    bad = jacobi_defect(f)
    if bad:
        a, b, c, m, v = bad[0]
        raise ModelError(f"structure constants violate Jacobi at (I,J,K)=({a + 1},{b + 1},{c + 1}),"
                         f" component {m + 1}: {v}")


# models ---------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpecies:
    name: str
    kind: Kind
    tensor_rank: int = 0
    lie_dim: int = 0

    def generators(self, lattice: Lattice, antifield: bool = False) -> list:
        kind = self.kind.partner if antifield else self.kind
        lies = range(self.lie_dim) if self.lie_dim else (-1,)
        tens = range(2) if self.tensor_rank else (-1,)
        return [Generator(kind, a, mu, s) for a in lies for mu in tens for s in lattice.sites()]


@dataclass(frozen=True)
class ModelSpec:
    lattice: Lattice
    kind: str                              # "scalar" or "yang-mills"
    fields: tuple
    density: DensityTemplate
    lagrangian: GradedPoly                 # extended Lagrangian (summed, weighted)
    structure_constants: tuple = ()
    killing_form: tuple = ()
    alpha: Fraction = Fraction(1)
    mass: Fraction = Fraction(0)
    checked: bool = True
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def dim_g(self) -> int:
        return len(self.structure_constants)

    @property
    def abelian(self) -> bool:
        return all(v == 0 for mat in self.structure_constants for row in mat for v in row)

    @property
    def weight(self) -> Scalar:
        """Antibracket weight 1/(dt dx)."""
        return Scalar(1 / self.lattice.volume)

    def field_generators(self) -> list:
        return sorted(g for sp in self.fields for g in sp.generators(self.lattice))

    def antifield_generators(self) -> list:
        return sorted(g for sp in self.fields for g in sp.generators(self.lattice, True))

    def generators(self) -> list:
        return self.field_generators() + self.antifield_generators()

    def with_lagrangian(self, lag: GradedPoly) -> "ModelSpec":
        return ModelSpec(self.lattice, self.kind, self.fields, self.density, lag,
                         self.structure_constants, self.killing_form, self.alpha,
                         self.mass, False, dict(self.extra))


def build_scalar_model(lattice: Lattice, mass=0) -> ModelSpec:
    mass = Fraction(mass)
    if mass < 0:
        raise ModelError("mass must be >= 0")
    phi = field_ref(Kind.FIELD, lattice=lattice)
    half = Fraction(1, 2)
    m2 = mass * mass

    def density(s):
        pt = D_T(phi, s, lattice)
        px = D_X(phi, s, lattice)
        p = phi(s)
        return pt * pt * half - px * px * half - p * p * (m2 / 2)

    tmpl = DensityTemplate(density, (1, 1))
    return ModelSpec(lattice, "scalar", (FieldSpecies("phi", Kind.FIELD),), tmpl,
                     local_sum(tmpl, lattice), mass=mass)


def _nonzero(f) -> list:
    n = len(f)
    return [(a, b, c, Scalar(f[a][b][c])) for a, b, c in product(range(n), repeat=3)
            if f[a][b][c]]


def field_strength(lattice: Lattice, f, lie: int, s: tuple) -> GradedPoly:
    """F^I_{01} = D_t A_1 - D_x A_0 + f^{IJK} A^J_0 A^K_1 at site s."""
    a1 = field_ref(Kind.FIELD, lie, 1, lattice)
    a0 = field_ref(Kind.FIELD, lie, 0, lattice)
    out = D_T(a1, s, lattice) - D_X(a0, s, lattice)
    n = len(f)
    for j in range(n):
        for k in range(n):
            c = f[lie][j][k]
            if c:
                out = out + (GradedPoly.gen(Generator(Kind.FIELD, j, 0, s))
                             * GradedPoly.gen(Generator(Kind.FIELD, k, 1, s))) * Scalar(c)
    return out


def covariant_ghost_derivative(lattice: Lattice, f, lie: int, mu: int, s: tuple) -> GradedPoly:
    """(D_mu C)^I = D_mu C^I + f^{IJK} A^J_mu C^K with a forward difference."""
    c = field_ref(Kind.GHOST, lie, -1, lattice)
    out = FORWARD[mu](c, s, lattice)
    n = len(f)
    for j in range(n):
        for k in range(n):
            v = f[lie][j][k]
            if v:
                out = out + (GradedPoly.gen(Generator(Kind.FIELD, j, mu, s))
                             * GradedPoly.gen(Generator(Kind.GHOST, k, -1, s))) * Scalar(v)
    return out


def ym_species(dim: int) -> tuple:
    return (FieldSpecies("A", Kind.FIELD, 1, dim), FieldSpecies("C", Kind.GHOST, 0, dim),
            FieldSpecies("Cbar", Kind.ANTIGHOST, 0, dim),
            FieldSpecies("B", Kind.MULTIPLIER, 0, dim))


def build_ym_model(lattice: Lattice, dim_g: int = 3, alpha=1, structure_constants=None,
                   check: bool = True) -> ModelSpec:
    """Yang-Mills with ghosts, antighosts and multipliers; returns L^ext.

    ``check=False`` skips the Jacobi test (used for negative controls).
    """
    f = epsilon_constants(dim_g) if structure_constants is None else _freeze(structure_constants)
    if len(f) != dim_g:
        raise ModelError("structure constants do not match dim_g")
    if check:
        check_antisymmetry(f)
        check_jacobi(f)
    kill = tuple(tuple(Fraction(int(i == j)) for j in range(dim_g)) for i in range(dim_g))
    nz = _nonzero(f)
    half = Scalar(Fraction(1, 2))

    def gen(kind, lie, mu, s):
        return GradedPoly.gen(Generator(kind, lie, mu, s))

    def density(s):
        s = lattice.site(*s)
        out = GradedPoly.zero()
        for a in range(dim_g):
            F = field_strength(lattice, f, a, s)
            out = out + F * F * half
        for a in range(dim_g):
            for mu in range(2):
                out = out + gen(Kind.FIELD_AF, a, mu, s) * covariant_ghost_derivative(lattice, f, a, mu, s)
        for a, b, c, v in nz:
            out = out + gen(Kind.GHOST, b, -1, s) * gen(Kind.GHOST, c, -1, s) * gen(Kind.GHOST_AF, a, -1, s) * (v * half)
        for a in range(dim_g):
            out = out - gen(Kind.MULTIPLIER, a, -1, s) * gen(Kind.ANTIGHOST_AF, a, -1, s) * I
        return out

    tmpl = DensityTemplate(density, (1, 1))
    lag = local_sum(tmpl, lattice)
    return ModelSpec(lattice, "yang-mills", ym_species(dim_g), tmpl, lag, f, kill,
                     Fraction(alpha), checked=check)


def is_even_ghost_zero(p: GradedPoly) -> bool:
    g = p.grading()
    return not isinstance(g, Mixed) and not g.odd and g.ghost == 0


def translate(p: GradedPoly, kt: int, kx: int, lattice: Lattice) -> GradedPoly:
    """Shift every generator by (kt, kx), re-sorting monomials with their signs."""
    from .algebra import mono_mul
    out: dict = {}
    for m, c in p.items():
        mono: tuple = ()
        sign = 1
        for g, e in m:
            s, mono = mono_mul(mono, ((g.shifted(kt, kx, lattice.n_t, lattice.n_x), e),))
            sign *= s
        out[mono] = c if sign > 0 else -c
    return GradedPoly(out)
