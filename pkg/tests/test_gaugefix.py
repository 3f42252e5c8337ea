from fractions import Fraction

import pytest

from bvforge import GradedPoly, Lattice, build_scalar_model, build_ym_model
from bvforge.algebra import Generator, Kind
from bvforge.bvcomplex import check_nilpotency, cme_residual
from bvforge.gaugefix import (GaugeFermion, alpha_psi, brst_table, expected_brst_table,
                              gauge_fix, homomorphism_check, lorenz_fermion)
from bvforge.lattice import zero_constants
from bvforge.sampling import random_homogeneous
from bvforge.scalar import I, Scalar


def gen(kind, lie=0, ten=-1, site=(0, 0)):
    return GradedPoly.gen(Generator(kind, lie, ten, site))


@pytest.fixture(scope="module", params=[0, 1, 2])
def abelian_theory(request):
    m = build_ym_model(Lattice(2, 2), dim_g=1, alpha=request.param,
                       structure_constants=zero_constants(1))
    return gauge_fix(m)


def test_abelian_gauge_fixed_invariants(abelian_theory):
    th = abelian_theory
    assert not cme_residual(th.L_tilde, th.weight)
    rep = check_nilpotency(th.s_tilde, [GradedPoly.gen(g) for g in th.model.generators()])
    assert rep.passed
    assert not th.gamma_config(th.L_g)
    assert not any(g.is_antifield for g in th.L_g.generators())


def test_lorenz_fermion_grading(su2_2x2):
    psi = lorenz_fermion(su2_2x2).psi
    g = psi.grading()
    assert g.ghost == -1 and g.antifield == 0 and g.odd


def test_fermion_validation():
    with pytest.raises(ValueError):
        GaugeFermion(gen(Kind.GHOST))
    with pytest.raises(ValueError):
        GaugeFermion(gen(Kind.ANTIGHOST) * gen(Kind.FIELD_AF, ten=0) * gen(Kind.GHOST))
    with pytest.raises(ValueError):
        lorenz_fermion(build_scalar_model(Lattice(2, 2)))


def test_multiplier_sector_of_lg():
    # L_g contains (alpha/2) B^2 per site, times dt dx
    for alpha in (0, 1, 2):
        m = build_ym_model(Lattice(2, 2), dim_g=1, alpha=alpha,
                           structure_constants=zero_constants(1))
        lg = gauge_fix(m).L_g
        b = Generator(Kind.MULTIPLIER, 0, -1, (1, 1))
        assert lg.coefficient(((b, 2),)) == Scalar(Fraction(alpha, 2))


def test_brst_table_hand_written(su2_2x2):
    # su(2) with f^{123} = 1, written out at site (0,0) (indices 0-based):
    # A^0_0 -> C^0(1,0) - C^0(0,0) + A^1_0 C^2 - A^2_0 C^1
    # C^0 -> -C^1 C^2,  Cbar^0 -> i B^0,  B^0 -> 0
    t = brst_table(gauge_fix(su2_2x2))
    c = lambda a, s=(0, 0): gen(Kind.GHOST, a, site=s)
    a0 = lambda a: gen(Kind.FIELD, a, 0)
    assert t[("Field", 0, 0)] == c(0, (1, 0)) - c(0) + a0(1) * c(2) - a0(2) * c(1)
    assert t[("Ghost", 0, -1)] == -(c(1) * c(2))
    assert t[("Ghost", 1, -1)] == c(0) * c(2)
    assert t[("AntiGhost", 2, -1)] == gen(Kind.MULTIPLIER, 2) * I
    assert not t[("Multiplier", 1, -1)]
    assert t == expected_brst_table(su2_2x2)


def test_alpha_psi_series_terminates(su2_2x2, rng):
    th = gauge_fix(su2_2x2)
    for g in su2_2x2.generators()[::9]:
        x = GradedPoly.gen(g)
        assert alpha_psi(x, th.fermion.psi, th.weight) is not None
    # fields are untouched, antifields shift by derivatives of psi
    a = Generator(Kind.FIELD, 0, 0, (0, 0))
    assert alpha_psi(GradedPoly.gen(a), th.fermion.psi, th.weight) == GradedPoly.gen(a)
    af = GradedPoly.gen(a.partner())
    shifted = alpha_psi(af, th.fermion.psi, th.weight)
    assert shifted - af == th.fermion.psi.left_derivative(a) * th.weight


def test_homomorphism_su2(su2_2x2, rng):
    th = gauge_fix(su2_2x2)
    gens = su2_2x2.generators()
    pairs = [(random_homogeneous(rng, gens), random_homogeneous(rng, gens)) for _ in range(30)]
    assert homomorphism_check(th, pairs).passed


def test_split_has_two_parts(su2_2x2):
    th = gauge_fix(su2_2x2)
    for g, img in th.delta_g.items():
        assert img.grading().total_antifield == g.grading.total_antifield - 1
    assert th.gamma_g
