"""Report records and their text / structured rendering.

Structured output is one JSON object per line with sorted keys and canonical
polynomial text, so two runs with the same configuration are byte-identical.
"""
from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import _Poly
from .scalar import Scalar

__all__ = ["Report", "versions", "model_summary", "canonical", "render"]


def versions() -> dict:
    import gmpy2
    import numpy
    import scipy

    from . import __version__
    return {"bvforge": __version__, "python": platform.python_version(),
            "numpy": numpy.__version__, "scipy": scipy.__version__, "gmpy2": gmpy2.version()}


def canonical(v):
    """JSON-safe canonical form of a result value."""
    if isinstance(v, _Poly):
        return {"terms": len(v), "poly": v.text()}
    if isinstance(v, Scalar):
        return v.text()
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, dict):
        return {str(k): canonical(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [canonical(x) for x in v]
    if hasattr(v, "item") and callable(v.item):     # numpy scalars
        return canonical(v.item())
    return v


def model_summary(model, path: str | None = None) -> dict:
    lat = model.lattice
    out = {"kind": model.kind, "n_t": lat.n_t, "n_x": lat.n_x, "dt": str(lat.dt),
           "dx": str(lat.dx), "path": path}
    if model.kind == "yang-mills":
        out.update(dim_g=model.dim_g, abelian=model.abelian, alpha=str(model.alpha))
    else:
        out.update(mass=str(model.mass))
    return out


@dataclass
class Report:
    """One check.  Numeric results always carry a tolerance and metadata."""
    check: str
    passed: bool
    inputs: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)
    residual: object = None
    tolerance: object = None
    caveats: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"check": self.check, "passed": self.passed, "inputs": canonical(self.inputs),
                "result": canonical(self.result), "residual": canonical(self.residual),
                "tolerance": canonical(self.tolerance), "caveats": list(self.caveats),
                "metadata": canonical(self.metadata)}

    def json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))

    def text(self, verbose: bool = False) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.check}"
        lines = [head]
        for k, v in sorted(self.result.items()):
            cv = canonical(v)
            if isinstance(cv, dict) and cv and all(isinstance(x, dict) and "poly" in x
                                                   for x in cv.values()):
                lines.append(f"    {k}:")
                lines.extend(f"        {kk} -> {_short(x, verbose)}" for kk, x in cv.items())
            else:
                lines.append(f"    {k}: {_short(cv, verbose)}")
        if self.residual is not None:
            tol = "" if self.tolerance is None else f" (tolerance {canonical(self.tolerance)})"
            lines.append(f"    residual: {_short(canonical(self.residual), verbose)}{tol}")
        for c in self.caveats:
            lines.append(f"    caveat: {c}")
        return "\n".join(lines)


def _short(v, verbose: bool) -> str:
    if isinstance(v, dict) and "poly" in v:
        s = v["poly"]
        if not verbose and len(s) > 300:
            s = s[:300] + f" ... ({v['terms']} terms)"
        return s
    if isinstance(v, dict):
        return ", ".join(f"{k}={_short(x, verbose)}" for k, x in v.items())
    return str(v)


def render(reports: list, fmt: str, header: dict | None = None, verbose: bool = False) -> str:
    if fmt == "structured":
        lines = []
        if header is not None:
            lines.append(json.dumps({"header": canonical(header)}, sort_keys=True,
                                    separators=(",", ":")))
        lines.extend(r.json() for r in reports)
        return "\n".join(lines) + "\n"
    out = []
    if header is not None:
        m = header.get("model", {})
        out.append(f"model: {m.get('kind')} on {m.get('n_t')}x{m.get('n_x')} "
                   f"(dt={m.get('dt')}, dx={m.get('dx')})")
    out.extend(r.text(verbose) for r in reports)
    ok = all(r.passed for r in reports)
    out.append(f"{'all checks passed' if ok else 'some checks FAILED'} ({len(reports)} checks)")
    return "\n".join(out) + "\n"
