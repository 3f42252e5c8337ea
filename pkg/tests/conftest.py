import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from bvforge import GradedPoly, Lattice, build_scalar_model, build_ym_model
from bvforge.algebra import Generator, Kind
from bvforge.lattice import zero_constants
from bvforge.scalar import Scalar
from bvforge.sampling import DEFAULT_SEED

# a small pool mixing every kind, used by the property tests
POOL = [Generator(k, lie, ten, (0, x))
        for k in Kind for lie, ten in ((0, 0), (1, -1)) for x in (0, 1)]


@pytest.fixture
def rng():
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture(scope="session")
def su2_2x2():
    return build_ym_model(Lattice(2, 2))


@pytest.fixture(scope="session")
def u1_2x2():
    return build_ym_model(Lattice(2, 2), dim_g=1, structure_constants=zero_constants(1))


@pytest.fixture(scope="session")
def scalar_4x4():
    return build_scalar_model(Lattice(4, 4))


scalars = st.builds(lambda a, b, c: Scalar(a, c) if b == 0 else Scalar(a) / b,
                    st.integers(-4, 4), st.integers(0, 3), st.integers(-2, 2))
monomials = st.lists(st.sampled_from(POOL), min_size=0, max_size=3)


@st.composite
def polys(draw, homogeneous=False):
    out = GradedPoly.zero()
    for _ in range(draw(st.integers(0, 3))):
        mono = GradedPoly.one()
        for g in draw(monomials):
            mono = mono * GradedPoly.gen(g)
        out = out + mono * draw(scalars)
    if homogeneous and out:
        m = sorted(out.terms)[0]
        par = sum(g.odd for g, e in m for _ in range(e)) % 2
        out = out.filter(lambda mm: sum(g.odd * e for g, e in mm) % 2 == par)
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
