"""Acceptance criteria 1-10.

Each test prints one line ``criterion N: PASS|FAIL (details)``; the lines are
repeated in the pytest terminal summary.  Run this file directly
(``python tests/test_acceptance.py``) to get only the ten lines.
"""
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy

sys.path.insert(0, str(Path(__file__).resolve().parent))

from bvforge import GradedPoly, Lattice, build_scalar_model, build_ym_model
from bvforge.algebra import Generator, Kind
from bvforge.antibracket import antibracket
from bvforge.bvcomplex import (build_truncated_complex, check_nilpotency, cme_residual,
                               differential_from_lagrangian, homology_dims)
from bvforge.cli import RunConfig, check_homology
from bvforge.expr import parse_expr
from bvforge.gaugefix import (brst_table, expected_brst_table, gauge_fix, homomorphism_check,
                              lorenz_fermion)
from bvforge.lattice import field_strength, zero_constants
from bvforge.peierls import (brst_leibniz_check, descent_check, gauge_independence_check,
                             greens_functions, linearize, peierls_bracket, scalar_mode_sum)
from bvforge.sampling import DEFAULT_SEED, random_homogeneous

RESULTS: dict = {}
TOL = 1e-8


def record(n: int, ok: bool, detail: str) -> bool:
    RESULTS[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def rng():
    return np.random.default_rng(DEFAULT_SEED)


def jacobi_broken():
    f = [list(map(list, m)) for m in zero_constants(3)]
    f[2][0][1], f[2][1][0] = Fraction(1), Fraction(-1)
    f[1][1][2], f[1][2][1] = Fraction(1), Fraction(-1)
    return f


def abelian(lat):
    return build_ym_model(lat, dim_g=1, structure_constants=zero_constants(1))


def sgn(x, y):
    return (-1) ** ((x.parity() + 1) * (y.parity() + 1))


# 1 ------------------------------------------------------------------------------

def test_criterion_1_antibracket_identities():
    t0 = time.time()
    m = build_ym_model(Lattice(2, 2))
    gens, w, r = m.generators(), m.weight, rng()
    bad = {"antisymmetry": 0, "leibniz": 0, "jacobi": 0}
    n = 500
    for _ in range(n):
        x, y, z = (random_homogeneous(r, gens, max_degree=3) for _ in range(3))
        xy = antibracket(x, y, w)
        if antibracket(y, x, w) != -xy * sgn(x, y):
            bad["antisymmetry"] += 1
        if antibracket(x, y * z, w) != xy * z + antibracket(x, z, w) * y * (-1) ** (
                y.parity() * z.parity()):
            bad["leibniz"] += 1
        lhs = antibracket(x, antibracket(y, z, w), w) \
            - antibracket(y, antibracket(x, z, w), w) * sgn(x, y)
        if lhs != antibracket(xy, z, w):
            bad["jacobi"] += 1
    dt = time.time() - t0
    ok = not any(bad.values()) and dt <= 60
    assert record(1, ok, f"{n} triples on 2x2 su(2), failures {bad}, exact, {dt:.1f}s"), bad


# 2 ------------------------------------------------------------------------------

def test_criterion_2_master_equation():
    t0 = time.time()
    sizes = {}
    for n in (2, 3):
        m = build_ym_model(Lattice(n, n))
        sizes[f"{n}x{n}"] = len(cme_residual(m.lagrangian, m.weight))
    ctrl = build_ym_model(Lattice(2, 2), structure_constants=jacobi_broken(), check=False)
    ctrl_terms = len(cme_residual(ctrl.lagrangian, ctrl.weight))
    ab = abelian(Lattice(3, 3))
    ab_terms = len(cme_residual(ab.lagrangian, ab.weight))
    dt = time.time() - t0
    ok = not any(sizes.values()) and ctrl_terms > 0 and dt <= 120
    detail = (f"su(2) residual terms {sizes}; Jacobi-broken control {ctrl_terms} terms; "
              f"abelian 3x3 {ab_terms} terms; {dt:.1f}s")
    assert record(2, ok, detail), detail


# 3 ------------------------------------------------------------------------------

def test_criterion_3_nilpotency():
    t0 = time.time()
    m = build_ym_model(Lattice(2, 2))
    gens = [GradedPoly.gen(g) for g in m.generators()]
    s = differential_from_lagrangian(m.lagrangian, m.generators(), m.weight)
    fails = {"s": len(check_nilpotency(s, gens).failures)}
    for alpha in (0, 1, 2):
        th = gauge_fix(m, lorenz_fermion(m, alpha))
        fails[f"s~ alpha={alpha}"] = len(check_nilpotency(th.s_tilde, gens).failures)
    ab = abelian(Lattice(2, 2))
    ab_gens = [GradedPoly.gen(g) for g in ab.generators()]
    ab_fail = len(check_nilpotency(differential_from_lagrangian(
        ab.lagrangian, ab.generators(), ab.weight), ab_gens).failures)
    for alpha in (0, 1, 2):
        ab_fail += len(check_nilpotency(gauge_fix(ab, lorenz_fermion(ab, alpha)).s_tilde,
                                        ab_gens).failures)
    dt = time.time() - t0
    ok = not any(fails.values()) and dt <= 120
    detail = (f"su(2) 2x2 failing generators out of {len(gens)}: {fails}; "
              f"abelian failures {ab_fail}; {dt:.1f}s")
    assert record(3, ok, detail), detail


# 4 ------------------------------------------------------------------------------

def test_criterion_4_brst_table():
    m = build_ym_model(Lattice(2, 2))
    table = brst_table(gauge_fix(m))
    want = expected_brst_table(m)
    # canonical serialization, symbol for symbol
    bad = [k for k in want if table[k].text() != want[k].text()]
    ok = not bad and len(table) == len(want)
    assert record(4, ok, f"{len(table)} generator images compared, mismatches {bad}"), bad


# 5 ------------------------------------------------------------------------------

def kernel_dim_oracle(lat, mass):
    n = lat.n_sites
    M = sympy.zeros(n, n)
    it, ix = 1 / sympy.Rational(lat.dt) ** 2, 1 / sympy.Rational(lat.dx) ** 2
    for t in range(lat.n_t):
        for x in range(lat.n_x):
            r = t * lat.n_x + x
            M[r, r] += -2 * it + 2 * ix + sympy.Rational(mass) ** 2
            for d in (1, -1):
                M[r, ((t + d) % lat.n_t) * lat.n_x + x] += it
                M[r, t * lat.n_x + (x + d) % lat.n_x] -= ix
    return n - M.rank()


def test_criterion_5_koszul_structure():
    cases = [((4, 4), 0), ((2, 8), 0), ((3, 5), Fraction(1, 2)), ((4, 4), Fraction(2))]
    out, ok = [], True
    for shape, mass in cases:
        m = build_scalar_model(Lattice(*shape), mass)
        s = differential_from_lagrangian(m.lagrangian, m.generators(), m.weight)
        cx = build_truncated_complex(s.koszul_tate, m.generators(), (0, 2), 1)
        h1 = homology_dims(cx, 1)
        want = kernel_dim_oracle(m.lattice, mass)
        ok &= cx.check_square_zero() and h1 == want
        out.append(f"{shape[0]}x{shape[1]} m={mass}: H_1={h1} oracle={want}")
    rep = check_homology(build_scalar_model(Lattice(4, 4)), RunConfig("homology", "-", degree=1))[0]
    caveat = any("periodic lattice" in c for c in rep.caveats)
    ok &= caveat
    detail = "; ".join(out) + f"; compactness caveat present: {caveat}"
    assert record(5, ok, detail), detail


# 6 ------------------------------------------------------------------------------

def test_criterion_6_homological_homomorphism():
    m = build_ym_model(Lattice(2, 2))
    gens, r = m.generators(), rng()
    pairs = [(random_homogeneous(r, gens), random_homogeneous(r, gens)) for _ in range(200)]
    reps = [homomorphism_check(gauge_fix(m, lorenz_fermion(m, a)), pairs) for a in (0, 1, 2)]
    ok = all(rep.passed for rep in reps)
    detail = ", ".join(f"alpha={a}: product {len(p.product_failures)} / bracket "
                       f"{len(p.bracket_failures)} failures"
                       for a, p in zip((0, 1, 2), reps))
    assert record(6, ok, f"200 pairs on 2x2 su(2); {detail}"), detail


# 7 ------------------------------------------------------------------------------

def test_criterion_7_greens_functions():
    t0 = time.time()
    lat = Lattice(64, 64)
    m = build_scalar_model(lat)
    pair = greens_functions(linearize(m, m.lagrangian.without_antifields()))
    T, n = pair.horizon, 64
    taus = np.arange(T + 1)
    oracle = scalar_mode_sum(lat, 0.0, taus[:, None], np.arange(n)[None, :])
    R = pair.retarded
    worst = 0.0
    rel = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n          # x - x0
    for t0_ in range(n):
        for tau in taus:
            blk = R[((t0_ + tau) % n) * n:((t0_ + tau) % n + 1) * n, t0_ * n:(t0_ + 1) * n]
            worst = max(worst, float(np.max(np.abs(blk - oracle[tau][rel]))))
    dt = time.time() - t0
    ok = pair.residual <= 1e-10 and worst <= 1e-8 and pair.usable and dt <= 300
    detail = (f"64x64 massless: sup|S''D^R - 1| = {pair.residual:.1e} on the safe window "
              f"(horizon {T}), max |D^R - mode sum| = {worst:.1e}, {dt:.1f}s")
    assert record(7, ok, detail), detail


# 8 ------------------------------------------------------------------------------

def _smeared(lat, t, shape):
    dx = float(lat.dx)
    p = GradedPoly.zero().numeric()
    for x in range(lat.n_x):
        g = GradedPoly.gen(Generator(Kind.FIELD, -1, -1, (t, x))).numeric()
        p = p + g * (dx * shape(x * dx))
    return p


def _separated_pairing(dx, length=8, tau=1.0, mass=Fraction(1, 2)):
    """Lattice {phi(f), phi(g)} at time separation tau vs the continuum mode sum."""
    n_x, dt = int(length / dx), dx / 2
    steps = int(round(tau / dt))
    lat = Lattice(2 * steps + 4, n_x, dt, dx)
    m = build_scalar_model(lat, mass)
    pair = greens_functions(linearize(m, m.lagrangian.without_antifields()))
    k = 2 * np.pi / length
    F = _smeared(lat, steps + 1, lambda x: np.cos(k * x))
    G = _smeared(lat, 1, lambda x: np.cos(k * x) + 0.3 * np.sin(k * x))
    val = peierls_bracket(F, G, pair).value().real
    w = np.sqrt(k * k + float(mass) ** 2)
    return val, -(length / 2) * np.sin(w * tau) / w


def test_criterion_8_peierls_properties():
    r = rng()
    # graded antisymmetry on the abelian gauge theory (ghosts included)
    m = build_ym_model(Lattice(8, 4), structure_constants=zero_constants(3))
    th = gauge_fix(m)
    pair = greens_functions(linearize(m, th.L_g))
    gens = m.field_generators()
    anti = 0.0
    for _ in range(40):
        F, G = (random_homogeneous(r, gens, max_degree=2) for _ in range(2))
        fg = peierls_bracket(F, G, pair, symbolic=True)
        gf = peierls_bracket(G, F, pair, symbolic=True)
        anti = max(anti, (fg + gf * (-1) ** (F.parity() * G.parity())).max_abs())
    # spacelike vanishing: at dt = dx the lattice cone is the light cone
    lat = Lattice(32, 32)
    sm = build_scalar_model(lat)
    sp = greens_functions(linearize(sm, sm.lagrangian.without_antifields()))
    space = 0.0
    F = parse_expr("phi@(10,5)", lat)
    for t in range(0, 32):
        for x in range(32):
            dt_ = min(abs(t - 10), 32 - abs(t - 10))
            dx_ = min(abs(x - 5), 32 - abs(x - 5))
            if dx_ >= dt_ + 2 and dt_ <= sp.horizon:
                G = parse_expr(f"phi@({t},{x})", lat)
                space = max(space, peierls_bracket(F, G, sp).max_abs())
    # equal-time pairing: exact delta/dx, and O(dx^2) against the continuum mode sum
    eq = 0.0
    for dx in (Fraction(1, 2), Fraction(1, 4)):
        lt = Lattice(16, 16, dx / 2, dx)
        mm = build_scalar_model(lt, Fraction(1, 2))
        pp = greens_functions(linearize(mm, mm.lagrangian.without_antifields()))
        G = parse_expr("Dbt(phi@(5,7))", lt)
        for x in range(16):
            v = peierls_bracket(parse_expr(f"phi@(5,{x})", lt), G, pp).value()
            eq = max(eq, abs(v - (float(1 / dx) if x == 7 else 0.0)))
    errs = []
    for dx in (Fraction(1, 4), Fraction(1, 8)):
        val, exact = _separated_pairing(dx)
        errs.append(abs(val - exact))
    ratio = errs[0] / errs[1]
    ok = anti <= TOL and space <= TOL and eq <= TOL and 3.0 <= ratio <= 5.0
    detail = (f"antisymmetry {anti:.1e}; spacelike (margin 2dx) max {space:.1e}; equal-time "
              f"pairing vs delta/dx {eq:.1e}; mode-sum error {errs[0]:.2e} -> {errs[1]:.2e} "
              f"on halving dx (ratio {ratio:.2f})")
    assert record(8, ok, detail), detail


# 9 ------------------------------------------------------------------------------

def test_criterion_9_brs_ideal_and_descent():
    r = rng()
    m = build_ym_model(Lattice(8, 4), structure_constants=zero_constants(3))
    th = gauge_fix(m)
    pair = greens_functions(linearize(m, th.L_g))
    gens = m.field_generators()
    leib = 0.0
    for _ in range(40):
        F, G = (random_homogeneous(r, gens, max_degree=2) for _ in range(2))
        leib = max(leib, brst_leibniz_check(F, G, th, pair).discrepancy)
    lat, f = m.lattice, m.structure_constants
    fs = lambda a, s: field_strength(lat, f, a, s)
    desc = 0.0
    closed = [fs(0, (1, 1)) * fs(0, (1, 2)), fs(1, (2, 3)), fs(2, (3, 0)) ** 2]
    for F in closed:
        for _ in range(5):
            G = random_homogeneous(r, gens, max_degree=2)
            H = random_homogeneous(r, gens, max_degree=2)
            while H.parity() == G.parity():       # G + gamma H must be homogeneous
                H = random_homogeneous(r, gens, max_degree=2)
            desc = max(desc, descent_check(F, G, H, th, pair).discrepancy)
    ok = leib <= TOL and desc <= TOL
    detail = f"abelian 8x4, zero background: Leibniz max {leib:.1e}, descent max {desc:.1e}"
    assert record(9, ok, detail), detail


# 10 -----------------------------------------------------------------------------

def test_criterion_10_gauge_independence():
    m = build_ym_model(Lattice(8, 4), dim_g=1, alpha=1, structure_constants=zero_constants(1))
    th1 = gauge_fix(m, lorenz_fermion(m, 1))
    th2 = gauge_fix(m, lorenz_fermion(m, 2))
    lat, f = m.lattice, m.structure_constants
    fs = lambda s: field_strength(lat, f, 0, s)
    pairs = [(fs((3, 1)) ** 2, fs((1, 1)) * fs((1, 2))),
             (fs((4, 0)) * fs((4, 1)), fs((2, 3)) ** 2),
             (fs((3, 2)) ** 2 + fs((3, 3)), fs((2, 2)) * fs((1, 0)))]
    worst_res, worst_diff = 0.0, 0.0
    for F, G in pairs:
        rep = gauge_independence_check(F, G, th1, th2)
        worst_res = max(worst_res, rep.residual)
        worst_diff = max(worst_diff, rep.max_difference)
    ok = worst_res <= TOL
    detail = (f"alpha 1 vs 2, {len(pairs)} field-strength pairs: max difference "
              f"{worst_diff:.1e}, exactness residual {worst_res:.1e}")
    assert record(10, ok, detail), detail


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items(), key=lambda kv: int(kv[0].split("_")[2])
                                  if kv[0].startswith("test_criterion_") else 0)
             if k.startswith("test_criterion_")]
    import io
    import contextlib
    for t in tests:
        with contextlib.redirect_stdout(io.StringIO()):
            try:
                t()
            except AssertionError:
                pass
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
