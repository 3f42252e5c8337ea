"""Exact BV/BRST algebra and Peierls brackets on periodic 1+1 lattices."""
import os as _os

_t = _os.environ.get("BVFORGE_THREADS", "")
if _t.isdigit() and int(_t) > 0:
    # caps BLAS threads; must happen before numpy is imported
    for _v in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_v, _t)

from .scalar import Scalar
from .algebra import (Generator, GradedPoly, Grading, Kind, Mixed, NumPoly, grading_of,
                      left_derivative, mul, substitute)
from .lattice import Lattice, ModelSpec, build_scalar_model, build_ym_model, local_sum

__version__ = "0.1.0"
