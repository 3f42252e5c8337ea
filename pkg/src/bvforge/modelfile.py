"""Model files: a small sectioned ``key = value`` format.

    [lattice]        n_t, n_x, dt, dx
    [gauge]          dim, structure_constants, alpha
    [scalar]         mass
    [discretization] scheme

``structure_constants`` is "epsilon", "zero", or a list of [I, J, K, value]
entries with 1-based indices; missing entries are filled in by total
antisymmetry.  Rationals are written p or p/q.  A file with a [gauge]
section describes Yang-Mills, otherwise a scalar field.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from .lattice import (Lattice, ModelError, ModelSpec, build_scalar_model, build_ym_model,
                      check_jacobi, epsilon_constants, zero_constants)
from .scalar import parse_rational

__all__ = ["parse_model_file", "parse_model_text", "ModelFileError"]


class ModelFileError(ValueError):
    def __init__(self, msg: str, line: int | None = None, path: str = "<model>"):
        where = f"{path}:{line}: " if line else f"{path}: "
        super().__init__(where + msg)
        self.line = line


_KEYS = {
    "lattice": {"n_t", "n_x", "dt", "dx"},
    "gauge": {"dim", "structure_constants", "alpha"},
    "scalar": {"mass"},
    "discretization": {"scheme"},
}
_SECTION = re.compile(r"^\[([A-Za-z_]+)\]$")
_PAIR = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.+)$")
_BARE_RAT = re.compile(r"(?<![\"\w/])(-?\d+/\d+)(?![\w/\"])")


def _value(raw: str, line: int, path: str):
    raw = raw.split("#", 1)[0].strip()
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    if raw in ("true", "false"):
        return raw == "true"
    if raw.startswith("["):
        try:
            return json.loads(_BARE_RAT.sub(r'"\1"', raw))
        except json.JSONDecodeError as exc:
            raise ModelFileError(f"malformed list: {exc.msg}", line, path) from None
    return raw


def _rational(v, key: str, line: int, path: str) -> Fraction:
    if isinstance(v, bool):
        raise ModelFileError(f"{key}: expected a rational, got a boolean", line, path)
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        raise ModelFileError(f"{key}: floats are not allowed, write p/q", line, path)
    try:
        return parse_rational(str(v))
    except ValueError:
        raise ModelFileError(f"{key}: malformed rational {v!r}", line, path) from None


def _integer(v, key: str, line: int, path: str) -> int:
    r = _rational(v, key, line, path)
    if r.denominator != 1:
        raise ModelFileError(f"{key}: expected an integer, got {v}", line, path)
    return int(r)


def _constants(v, dim: int, line: int, path: str):
    if v == "epsilon":
        if dim != 3:
            raise ModelFileError("epsilon structure constants need dim = 3", line, path)
        return epsilon_constants(3)
    if v == "zero":
        return zero_constants(dim)
    if not isinstance(v, list):
        raise ModelFileError("structure_constants must be epsilon, zero or a list", line, path)
    f = [[[None] * dim for _ in range(dim)] for _ in range(dim)]
    perms = (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1), ((1, 0, 2), -1),
             ((0, 2, 1), -1), ((2, 1, 0), -1))
    origin = {}
    for entry in v:
        if not isinstance(entry, list) or len(entry) != 4:
            raise ModelFileError(f"structure constant entry {entry!r} is not [I, J, K, value]",
                                 line, path)
        idx = [_integer(e, "structure_constants", line, path) for e in entry[:3]]
        if any(not 1 <= k <= dim for k in idx):
            raise ModelFileError(f"index out of range in {entry!r}", line, path)
        val = _rational(entry[3], "structure_constants", line, path)
        base = tuple(k - 1 for k in idx)
        label = "".join(str(k) for k in idx)
        if len(set(idx)) < 3 and val != 0:
            raise ModelFileError(f"f^{{{label}}} = {val} has a repeated index; total "
                                 f"antisymmetry forces it to vanish", line, path)
        for perm, sgn in perms:
            a, b, c = (base[perm[0]], base[perm[1]], base[perm[2]])
            want = sgn * val
            if f[a][b][c] is not None and f[a][b][c] != want:
                other, oval = origin[(a, b, c)]
                raise ModelFileError(f"f^{{{label}}} = {val} and f^{{{other}}} = {oval} "
                                     f"violate total antisymmetry", line, path)
            f[a][b][c] = want
            origin.setdefault((a, b, c), (label, val))
    return tuple(tuple(tuple(x if x is not None else Fraction(0) for x in row) for row in mat)
                 for mat in f)


def parse_model_text(text: str, path: str = "<model>") -> ModelSpec:
    data: dict = {}
    lines: dict = {}
    section = None
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.split("#", 1)[0].strip() if not raw.strip().startswith('"') else raw.strip()
        if not s:
            continue
        m = _SECTION.match(s)
        if m:
            section = m.group(1)
            if section not in _KEYS:
                raise ModelFileError(f"unknown section [{section}]", n, path)
            if section in data:
                raise ModelFileError(f"duplicate section [{section}]", n, path)
            data[section] = {}
            lines[section] = {"__section__": n}
            continue
        m = _PAIR.match(raw.strip())
        if not m:
            raise ModelFileError(f"cannot parse line {raw.strip()!r}", n, path)
        if section is None:
            raise ModelFileError("key outside of any section", n, path)
        key = m.group(1)
        if key not in _KEYS[section]:
            raise ModelFileError(f"unknown key {key!r} in [{section}]", n, path)
        if key in data[section]:
            raise ModelFileError(f"duplicate key {key!r}", n, path)
        data[section][key] = _value(m.group(2), n, path)
        lines[section][key] = n

    if "lattice" not in data:
        raise ModelFileError("missing [lattice] section", None, path)
    lat_d, lat_l = data["lattice"], lines["lattice"]
    for key in ("n_t", "n_x"):
        if key not in lat_d:
            raise ModelFileError(f"missing {key} in [lattice]", lat_l["__section__"], path)
    try:
        lat = Lattice(_integer(lat_d["n_t"], "n_t", lat_l["n_t"], path),
                      _integer(lat_d["n_x"], "n_x", lat_l["n_x"], path),
                      _rational(lat_d.get("dt", 1), "dt", lat_l.get("dt"), path),
                      _rational(lat_d.get("dx", 1), "dx", lat_l.get("dx"), path))
    except ModelError as exc:
        raise ModelFileError(str(exc), lat_l["__section__"], path) from None

    if "discretization" in data:
        sch = data["discretization"].get("scheme", "forward")
        if sch != "forward":
            raise ModelFileError(f"unsupported scheme {sch!r} (only forward is implemented)",
                                 lines["discretization"].get("scheme"), path)

    if "gauge" in data and "scalar" in data:
        raise ModelFileError("a model has either [gauge] or [scalar], not both",
                             lines["scalar"]["__section__"], path)
    if "gauge" in data:
        g, gl = data["gauge"], lines["gauge"]
        dim = _integer(g.get("dim", 3), "dim", gl.get("dim"), path)
        sc_line = gl.get("structure_constants", gl["__section__"])
        f = _constants(g.get("structure_constants", "epsilon"), dim, sc_line, path)
        try:
            check_jacobi(f)
        except ModelError as exc:
            raise ModelFileError(str(exc), sc_line, path) from None
        alpha = _rational(g.get("alpha", 1), "alpha", gl.get("alpha"), path)
        try:
            return build_ym_model(lat, dim, alpha, f)
        except ModelError as exc:
            raise ModelFileError(str(exc), sc_line, path) from None
    sc = data.get("scalar", {})
    mass = _rational(sc.get("mass", 0), "mass", lines.get("scalar", {}).get("mass"), path)
    if mass < 0:
        raise ModelFileError("mass must be >= 0", lines["scalar"]["mass"], path)
    return build_scalar_model(lat, mass)


def parse_model_file(path) -> ModelSpec:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ModelFileError(f"cannot read model file: {exc.strerror}", None, str(p)) from None
    return parse_model_text(text, str(p))
