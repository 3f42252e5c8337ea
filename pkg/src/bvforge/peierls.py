"""Retarded/advanced Green's functions of the linearized gauge-fixed theory and
the graded Peierls bracket.

Conventions
-----------
H_ab = dL_a dL_b S at the background (the raw lattice Hessian, measure
included).  A perturbation enters the field equation dL_a S = 0 as
sum_b dphi_b H_ba, so the linearized field operator is the graded transpose
P_ab = (-1)^{e_a e_b} H_ba, which is H on the even block and -H on the odd
block.  The operator acting on field values is K = P / (dt dx); for the free
scalar K = -(box + m^2).  The retarded Green's function is the right inverse
P Delta^R = 1 supported in the future of the source (so Delta^R -> -1/2 inside
the light cone in 1+1 dimensions); the advanced one is the graded transpose
of Delta^R.

    {F, G} = sum_ab (-1)^{(|F|+1) e_a} dF/dphi_a (Delta^R - Delta^A)_ab dG/dphi_b
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .algebra import Generator, GradedPoly, Kind, NumPoly, _Poly, mono_mul, mono_parity
from .lattice import Lattice, ModelSpec

__all__ = [
    "Background", "LinearizedOperator", "GreensPair", "WrapError", "HyperbolicityError",
    "linearize", "greens_functions", "peierls_bracket", "brst_leibniz_check",
    "descent_check", "gauge_independence_check", "LeibnizReport", "GaugeReport",
    "scalar_mode_sum", "NotClosedError",
]


class WrapError(RuntimeError):
    pass


class HyperbolicityError(RuntimeError):
    pass


class NotClosedError(ValueError):
    def __init__(self, which: str, image):
        super().__init__(f"{which} is not gamma^g-closed: gamma^g {which} = {image.text()[:200]}")
        self.image = image


@dataclass(frozen=True)
class Background:
    """Values of even generators; everything absent (and every odd generator) is 0."""
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for g, v in self.values.items():
            if g.odd:
                raise ValueError(f"odd generator {g.text()} cannot take a numerical value")
            if g.is_antifield:
                raise ValueError(f"antifield {g.text()} in a background")
            if not np.isfinite(v):
                raise ValueError(f"non-finite background value at {g.text()}")

    @classmethod
    def zero(cls) -> "Background":
        return cls({})

    @property
    def is_zero(self) -> bool:
        return not any(self.values.values())

    def label(self) -> str:
        return "zero" if self.is_zero else f"{len(self.values)} values"


def _species_of(g: Generator) -> tuple:
    return (int(g.kind), g.lie, g.tensor)


@dataclass
class LinearizedOperator:
    hessian: sp.csr_matrix
    lattice: Lattice
    species: list                     # ordered (kind, lie, tensor)
    generators: list                  # index -> Generator
    index: dict                       # Generator -> index
    odd: np.ndarray
    background: Background
    quadratic: bool
    model: ModelSpec | None = None

    @property
    def field_operator(self) -> sp.csr_matrix:
        """P = graded transpose of the Hessian (odd rows negated)."""
        sgn = np.where(self.odd, -1.0, 1.0)
        return sp.diags(sgn) @ self.hessian

    @property
    def matrix(self) -> sp.csr_matrix:
        """K = P / (dt dx): the operator acting on field values."""
        return (self.field_operator / float(self.lattice.volume)).tocsr()

    @property
    def block_size(self) -> int:
        return self.lattice.n_x * len(self.species)

    @property
    def size(self) -> int:
        return self.hessian.shape[0]

    @property
    def cfl(self) -> float:
        return float(self.lattice.cfl)

    def species_block(self, species: tuple) -> np.ndarray:
        """Indices of one species, ordered by (t, x)."""
        return np.array([i for i, g in enumerate(self.generators) if _species_of(g) == species])

    def vector(self, values: dict) -> np.ndarray:
        v = np.zeros(self.size, dtype=complex)
        for g, x in values.items():
            v[self.index[g]] += x
        return v


def _config_generators(model: ModelSpec | None, lag: GradedPoly, lattice: Lattice) -> list:
    if model is not None:
        return model.field_generators()
    return sorted(g for g in lag.generators() if not g.is_antifield)


def linearize(model: ModelSpec | None, lag: GradedPoly, background: Background | None = None,
              lattice: Lattice | None = None) -> LinearizedOperator:
    background = Background.zero() if background is None else background
    lattice = model.lattice if model is not None else lattice
    if any(g.is_antifield for g in lag.generators()):
        raise ValueError("linearize expects an antifield-free Lagrangian")
    gens = _config_generators(model, lag, lattice)
    species = sorted({_species_of(g) for g in gens})
    sidx = {s: k for k, s in enumerate(species)}
    nc = len(species)
    nx = lattice.n_x

    def pos(g):
        t, x = g.site
        return (t * nx + x) * nc + sidx[_species_of(g)]

    order = sorted(gens, key=pos)
    index = {g: pos(g) for g in order}
    n = lattice.n_sites * nc
    if len(order) != n:
        raise ValueError("generator set does not cover every (site, species)")
    vals = background.values

    # one pass over the monomials: second left derivatives at the background
    acc: dict = defaultdict(complex)
    for mono, c in lag.items():
        cz = complex(c)
        L = len(mono)
        for i in range(L):
            gi, ei = mono[i]
            for j in range(L):
                gj, ej = mono[j]
                if i == j and (gi.odd or ei < 2):
                    continue
                # remaining factors after removing gi then gj (left derivatives)
                fac = _second_derivative_value(mono, i, j, vals)
                if fac:
                    acc[(index[gi], index[gj])] += cz * fac
    rows, cols, data = [], [], []
    for (a, b), v in acc.items():
        if v != 0:
            rows.append(a)
            cols.append(b)
            data.append(v)
    data = np.array(data, dtype=complex)
    if data.size and np.all(data.imag == 0):
        data = data.real
    H = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    odd = np.array([g.odd for g in order])
    quadratic = lag.degree() <= 2
    return LinearizedOperator(H, lattice, species, order, index, odd, background, quadratic, model)


def _second_derivative_value(mono: tuple, i: int, j: int, vals: dict) -> complex:
    """Value of dL_{g_i} dL_{g_j} of the monomial at the background (odd -> 0).

    The outer derivative is with respect to factor i.
    """
    gi, ei = mono[i]
    gj, ej = mono[j]
    # inner derivative (factor j)
    sign = 1
    if gj.odd:
        sign *= -1 if sum(1 for g, _ in mono[:j] if g.odd) % 2 else 1
    exps = [e for _, e in mono]
    coef = exps[j] if not gj.odd else 1
    exps[j] -= 1
    # outer derivative (factor i) on the reduced monomial
    if exps[i] == 0:
        return 0
    if gi.odd:
        before = sum(1 for k in range(i) if mono[k][0].odd and exps[k] > 0)
        sign *= -1 if before % 2 else 1
    else:
        coef *= exps[i]
    exps[i] -= 1
    val = complex(sign * coef)
    for k, (g, _) in enumerate(mono):
        e = exps[k]
        if e:
            if g.odd:
                return 0
            x = vals.get(g, 0.0)
            if x == 0:
                return 0
            val *= x ** e
    return val


# Green's functions ---------------------------------------------------------

@dataclass
class GreensPair:
    retarded: np.ndarray
    op: LinearizedOperator
    horizon: int
    leads: np.ndarray
    back_reach: int
    residual: float                  # sup-norm of P Delta^R - 1 on the safe rows
    residual_all: float              # including the truncation front
    wrap: bool
    caveats: list = field(default_factory=list)

    @property
    def usable(self) -> bool:
        return not self.wrap

    @property
    def tolerance(self) -> float:
        return self.residual

    @property
    def sigma(self) -> np.ndarray:
        return np.where(self.op.odd, -1.0, 1.0)

    @property
    def advanced(self) -> np.ndarray:
        """Graded transpose: Delta^A_ab = (-1)^{e_a e_b} Delta^R_ba."""
        return self.retarded.T * self.sigma[None, :]

    def apply_retarded(self, v: np.ndarray) -> np.ndarray:
        return self.retarded @ v

    def apply_advanced(self, v: np.ndarray) -> np.ndarray:
        return self.retarded.T @ (self.sigma * v)

    def apply_causal(self, v: np.ndarray) -> np.ndarray:
        return self.apply_retarded(v) - self.apply_advanced(v)


def _block_offsets(H: sp.csr_matrix, n_t: int, m: int) -> dict:
    coo = H.tocoo()
    ti = coo.row // m
    tj = coo.col // m
    d = (tj - ti + n_t // 2) % n_t - n_t // 2
    blocks: dict = {}
    for t, dd, r, c, v in zip(ti, d, coo.row % m, coo.col % m, coo.data):
        key = (int(t), int(dd))
        b = blocks.get(key)
        if b is None:
            b = blocks[key] = np.zeros((m, m), dtype=H.dtype)
        b[r, c] += v
    return blocks


def greens_functions(op: LinearizedOperator, horizon: int | None = None) -> GreensPair:
    """Retarded Green's function by explicit time stepping.

    Each column class j (a species at a spatial site) enters the rows of time
    t at most at time t + lead_j; at every step the block of those leading
    coefficients is solved for the newest values.  ``horizon`` counts time
    steps and must stay below n_t / 2.
    """
    lat = op.lattice
    n_t = lat.n_t
    m = op.block_size
    T = (n_t - 1) // 2 if horizon is None else int(horizon)
    if T < 0:
        raise ValueError("horizon must be >= 0")
    H = op.field_operator.tocsr()
    blocks = _block_offsets(H, n_t, m)
    offsets = sorted({d for _, d in blocks})
    if not offsets:
        raise HyperbolicityError("empty operator")
    leads = np.full(m, -10 ** 6)
    for (t, d), b in blocks.items():
        nz = np.any(b != 0, axis=0)
        leads[nz] = np.maximum(leads[nz], d)
    if np.any(leads < -10 ** 5):
        raise HyperbolicityError("some components never enter the equations")
    p = max(0, -min(offsets))
    lmax = int(leads.max())
    wrap = 2 * T >= n_t or T + lmax + p >= n_t
    dtype = np.result_type(H.dtype, float)

    # leading blocks, factored once per time slice
    lus = {}
    cols = np.arange(m)
    for t in range(n_t):
        M = np.zeros((m, m), dtype=dtype)
        for j in range(m):
            b = blocks.get((t, int(leads[j])))
            if b is not None:
                M[:, j] = b[:, j]
        try:
            lu = sla.lu_factor(M, check_finite=True)
        except (sla.LinAlgError, ValueError) as exc:
            raise HyperbolicityError(f"leading block singular at t={t}") from exc
        if np.min(np.abs(np.diag(lu[0]))) < 1e-12 * max(1.0, np.max(np.abs(M))):
            raise HyperbolicityError(f"leading block singular at t={t}")
        lus[t] = lu

    N = op.size
    R = np.zeros((N, N), dtype=dtype)
    span = T + lmax + 1
    block_list = [(d, blocks) for d in offsets]
    for t0 in range(n_t):
        U = np.zeros((p + span + 1, m, m), dtype=dtype)
        for tau in range(T + 1):
            t = (t0 + tau) % n_t
            rhs = np.eye(m, dtype=dtype) if tau == 0 else np.zeros((m, m), dtype=dtype)
            for d in offsets:
                b = blocks.get((t, d))
                if b is None:
                    continue
                k = tau + d + p
                if 0 <= k < U.shape[0]:
                    rhs -= b @ U[k]
            x = sla.lu_solve(lus[t], rhs)
            U[tau + leads + p, cols, :] = x
        for r in range(span):
            rows = ((t0 + r) % n_t) * m
            R[rows:rows + m, t0 * m:(t0 + 1) * m] = U[r + p]

    pair = GreensPair(R, op, T, leads, p, 0.0, 0.0, wrap)
    pair.residual, pair.residual_all = _residuals(H, R, n_t, m, T, p)
    if wrap:
        pair.caveats.append("support reaches the periodic seam: horizon too long for n_t")
    return pair


def _residuals(H, R, n_t, m, T, p):
    res = H @ R
    res = np.asarray(res)
    res[np.diag_indices_from(res)] -= 1.0
    N = R.shape[0]
    tr = np.arange(N) // m
    safe = 0.0
    for t0 in range(n_t):
        rel = (tr - t0) % n_t
        rel = np.where(rel > n_t - 1 - p, rel - n_t, rel)
        mask = (rel >= -p) & (rel <= T)
        blk = res[mask, t0 * m:(t0 + 1) * m]
        if blk.size:
            safe = max(safe, float(np.max(np.abs(blk))))
    return safe, float(np.max(np.abs(res)))


# mode-sum oracle for the free scalar --------------------------------------

def _chebyshev_u(n: np.ndarray, c: np.ndarray) -> np.ndarray:
    """U_n(c) in closed form, for n >= -1 (U_{-1} = 0)."""
    n = np.asarray(n, dtype=float)
    c = np.asarray(c, dtype=float)
    out = np.zeros(np.broadcast(n, c).shape)
    n, c = np.broadcast_arrays(n, c)
    inside = np.abs(c) <= 1.0
    th = np.arccos(np.clip(c, -1.0, 1.0))
    s = np.sin(th)
    small = inside & (s < 1e-7)
    reg = inside & ~small
    out[reg] = np.sin((n[reg] + 1) * th[reg]) / s[reg]
    sgn = np.where(c >= 0, 1.0, -1.0)
    out[small] = (n[small] + 1) * sgn[small] ** n[small]
    outside = ~inside
    if np.any(outside):
        ph = np.arccosh(np.abs(c[outside]))
        out[outside] = sgn[outside] ** n[outside] * np.sinh((n[outside] + 1) * ph) / np.sinh(ph)
    return out


def scalar_mode_sum(lattice: Lattice, mass: float, tau: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Retarded Green's function of the free lattice scalar from a discrete
    Fourier sum: value at relative time step tau and relative site x."""
    dt, dx = float(lattice.dt), float(lattice.dx)
    nx = lattice.n_x
    q = np.arange(nx)
    w2 = 4.0 * np.sin(np.pi * q / nx) ** 2 / dx ** 2 + mass ** 2
    c = 1.0 - dt * dt * w2 / 2.0
    tau = np.asarray(tau)
    x = np.asarray(x)
    shape = np.broadcast(tau, x).shape
    tau_b, x_b = np.broadcast_arrays(tau, x)
    u = _chebyshev_u(tau_b[..., None] - 1, c[None, ...] if tau_b.ndim == 0 else np.broadcast_to(c, tau_b.shape + (nx,)))
    phase = np.exp(2j * np.pi * np.outer(x_b.ravel(), q) / nx).reshape(shape + (nx,))
    vals = -(dt / dx) * (u * phase).sum(axis=-1).real / nx
    return np.where(tau_b >= 1, vals, 0.0)


# the bracket ---------------------------------------------------------------

def _homogeneous_parity(p: _Poly, name: str) -> int:
    if not p:
        return 0
    par = p.parity()
    if par is None:
        raise ValueError(f"{name} is not parity-homogeneous")
    return par


def _derivative_vectors(F: _Poly, op: LinearizedOperator, bg, symbolic: bool) -> dict:
    """F'_a = sum_mono vec[mono][a] * mono."""
    vecs: dict = {}
    for g, dF in F.derivatives().items():
        if g.is_antifield:
            raise ValueError("Peierls bracket arguments must be antifield-free")
        a = op.index.get(g)
        if a is None:
            raise ValueError(f"{g.text()} is not a field of the linearized operator")
        poly = dF.numeric() if symbolic else dF.evaluate(bg.values, odd_zero=False)
        for mono, c in poly.items():
            v = vecs.get(mono)
            if v is None:
                v = vecs[mono] = np.zeros(op.size, dtype=complex)
            v[a] += c
    return vecs


def peierls_bracket(F: _Poly, G: _Poly, pair: GreensPair, background: Background | None = None,
                    symbolic: bool = False) -> NumPoly:
    """Graded Peierls bracket.  With ``symbolic`` the derivatives of F and G
    are kept as polynomials (valid when the Lagrangian is quadratic, so that
    the Green's functions do not depend on the configuration)."""
    if not pair.usable:
        raise WrapError("Green's pair flagged unusable (periodic wrap)")
    if symbolic and not pair.op.quadratic:
        raise ValueError("symbolic brackets need a field-independent propagator")
    bg = pair.op.background if background is None else background
    pf = _homogeneous_parity(F, "F")
    _homogeneous_parity(G, "G")
    fv = _derivative_vectors(F, pair.op, bg, symbolic)
    gv = _derivative_vectors(G, pair.op, bg, symbolic)
    if not fv or not gv:
        return NumPoly.zero()
    odd = pair.op.odd
    sign = np.where(odd & (pf == 0), -1.0, 1.0)
    out: dict = {}
    egs = {n: pair.apply_causal(v) for n, v in gv.items()}
    for mf, v in fv.items():
        sv = sign * v
        for mg, eg in egs.items():
            val = complex(sv @ eg)
            if val == 0:
                continue
            s, mono = mono_mul(mf, mg)
            if not s:
                continue
            out[mono] = out.get(mono, 0j) + s * val
    return NumPoly._raw({k: c for k, c in out.items() if c != 0})


# BRST compatibility ----------------------------------------------------------

@dataclass
class LeibnizReport:
    lhs: NumPoly
    rhs: NumPoly
    discrepancy: float
    tolerance: float
    background: str

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tolerance


def _right_form(p: _Poly, gp: _Poly) -> _Poly:
    """Given gp = gamma_L p, return gamma_R p = (-1)^{|p|} gamma_L p termwise.

    gamma_L raises parity by one, so |p| = parity(term of gp) + 1."""
    return -gp.involution()


def _evaluate(p: _Poly, bg: Background) -> NumPoly:
    return p.numeric().evaluate(bg.values, odd_zero=False)


def brst_leibniz_check(F: _Poly, G: _Poly, theory, pair: GreensPair,
                       background: Background | None = None, tol: float = 1e-8) -> LeibnizReport:
    """gamma{F,G} = (-1)^{|G|}{gamma F, G} + {F, gamma G} with right-acting gamma."""
    bg = Background.zero() if background is None else background
    pg = _homogeneous_parity(G, "G")
    gr = lambda p: _right_form(p, theory.gamma_config(p))
    fg = peierls_bracket(F, G, pair, symbolic=True)
    lhs = _evaluate(gr(fg), bg)
    rhs = peierls_bracket(gr(F), G, pair, symbolic=True) * (-1) ** pg \
        + peierls_bracket(F, gr(G), pair, symbolic=True)
    rhs = _evaluate(rhs, bg)
    disc = (lhs - rhs).max_abs()
    return LeibnizReport(lhs, rhs, disc, tol, bg.label())


def descent_check(F: _Poly, G: _Poly, Hp: _Poly, theory, pair: GreensPair,
                  background: Background | None = None, tol: float = 1e-8) -> LeibnizReport:
    """{F, G + gamma H} = {F, G} + gamma{F, H} for gamma-closed F."""
    bg = Background.zero() if background is None else background
    gF = theory.gamma_config(F)
    if gF:
        raise NotClosedError("F", gF)
    gr = lambda p: _right_form(p, theory.gamma_config(p))
    lhs = _evaluate(peierls_bracket(F, G + gr(Hp), pair, symbolic=True), bg)
    rhs = _evaluate(peierls_bracket(F, G, pair, symbolic=True)
                    + gr(peierls_bracket(F, Hp, pair, symbolic=True)), bg)
    return LeibnizReport(lhs, rhs, (lhs - rhs).max_abs(), tol, bg.label())


# gauge independence -----------------------------------------------------------

@dataclass
class GaugeReport:
    difference: NumPoly
    max_difference: float
    residual: float
    basis_size: int
    tolerance: float
    witness: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def _exact_basis(theory, gens: list) -> list:
    """Ghost-number -1 monomials of degree <= 2: Cbar and Cbar * (even field)."""
    cbars = [g for g in gens if g.kind == Kind.ANTIGHOST]
    evens = [g for g in gens if not g.odd]
    out = []
    for c in cbars:
        out.append(((c, 1),))
        for e in evens:
            _, m = mono_mul(((c, 1),), ((e, 1),))
            out.append(m)
    return out


def gauge_independence_check(F: GradedPoly, G: GradedPoly, theory1, theory2,
                             horizon: int | None = None, tol: float = 1e-8,
                             basis_generators: list | None = None) -> GaugeReport:
    for name, X in (("F", F), ("G", G)):
        for th in (theory1, theory2):
            img = th.gamma_config(X)
            if img:
                raise NotClosedError(name, img)
    brackets = []
    for th in (theory1, theory2):
        op = linearize(th.model, th.L_g)
        pair = greens_functions(op, horizon)
        brackets.append(peierls_bracket(F, G, pair, symbolic=True))
    diff = brackets[1] - brackets[0]
    gens = basis_generators
    if gens is None:
        lies = {g.lie for g in (F.generators() | G.generators())}
        gens = [g for g in theory1.model.field_generators() if g.lie in lies]
    basis = _exact_basis(theory1, gens)
    gr = lambda p: _right_form(p, theory1.gamma_config(p))
    images = [gr(GradedPoly._raw({m: theory1.L_g._coerce(1)})) for m in basis]
    rows: dict = {}
    for img in images:
        for mono in img.terms:
            rows.setdefault(mono, len(rows))
    for mono in diff.terms:
        rows.setdefault(mono, len(rows))
    A = np.zeros((len(rows), len(basis)), dtype=complex)
    for j, img in enumerate(images):
        for mono, c in img.items():
            A[rows[mono], j] = complex(c)
    b = np.zeros(len(rows), dtype=complex)
    for mono, c in diff.items():
        b[rows[mono]] = c
    if len(basis) and np.any(b):
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        res = float(np.max(np.abs(A @ x - b)))
    else:
        x = np.zeros(len(basis))
        res = float(np.max(np.abs(b))) if b.size else 0.0
    wit = {basis[j]: x[j] for j in np.flatnonzero(np.abs(x) > 1e-12)}
    return GaugeReport(diff, diff.max_abs(), res, len(basis), tol, wit)
