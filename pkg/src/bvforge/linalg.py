"""Exact sparse linear algebra over Gaussian rationals.

Matrices are stored column-wise as ``{col: {row: Scalar}}``.
"""
from __future__ import annotations

from .scalar import Scalar

__all__ = ["rank", "solve", "matmul", "is_zero_matrix", "to_rows"]


def to_rows(cols: dict) -> dict:
    rows: dict = {}
    for c, col in cols.items():
        for r, v in col.items():
            rows.setdefault(r, {})[c] = v
    return rows


def _eliminate(rows: list, aug_key=None):
    """Row-reduce a list of sparse rows in place (forward elimination only).

    Returns the list of (pivot column, row) pairs.  The augmented column, if
    any, is never chosen as a pivot.
    """
    pivots: list = []
    pivot_of: dict = {}
    for row in rows:
        row = dict(row)
        # reduce against existing pivots until the leading entry is new
        while True:
            keys = [k for k in row if k != aug_key]
            if not keys:
                break
            lead = min(keys)
            p = pivot_of.get(lead)
            if p is None:
                break
            prow = pivots[p][1]
            f = row[lead] / prow[lead]
            for k, v in prow.items():
                nv = row.get(k, Scalar(0)) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        keys = [k for k in row if k != aug_key]
        if keys:
            lead = min(keys)
            pivot_of[lead] = len(pivots)
            pivots.append((lead, row))
        elif aug_key is not None and row.get(aug_key):
            return None  # inconsistent
    return pivots


def rank(cols: dict) -> int:
    rows = to_rows(cols)
    return len(_eliminate([rows[r] for r in sorted(rows)]))


def solve(cols: dict, rhs: dict):
    """Exact x with M x = rhs (rhs as {row: Scalar}); None when inconsistent."""
    rows = to_rows(cols)
    key = ("rhs",)
    allr = set(rows) | set(rhs)
    data = []
    for r in sorted(allr, key=repr):
        row = dict(rows.get(r, {}))
        if rhs.get(r):
            row[key] = rhs[r]
        data.append(row)
    # sort keys: columns must be comparable; wrap them to keep "rhs" apart
    colkeys = sorted({k for row in data for k in row if k != key}, key=repr)
    index = {k: i for i, k in enumerate(colkeys)}
    data = [{(index[k] if k != key else -1): v for k, v in row.items()} for row in data]
    piv = _eliminate(data, aug_key=-1)
    if piv is None:
        return None
    # back substitution
    x: dict = {}
    for lead, row in reversed(piv):
        acc = row.get(-1, Scalar(0))
        for k, v in row.items():
            if k not in (-1, lead):
                acc = acc - v * x.get(k, Scalar(0))
        x[lead] = acc / row[lead]
    return {colkeys[i]: v for i, v in x.items() if v}


def matmul(a: dict, b: dict) -> dict:
    """(a @ b) with both column-wise."""
    out: dict = {}
    for c, col in b.items():
        acc: dict = {}
        for k, v in col.items():
            for r, w in a.get(k, {}).items():
                s = acc.get(r, Scalar(0)) + w * v
                if s:
                    acc[r] = s
                else:
                    acc.pop(r, None)
        if acc:
            out[c] = acc
    return out


def is_zero_matrix(m: dict) -> bool:
    return all(not v for col in m.values() for v in col.values())
