"""CSV formats for point sets (``re,im,mult``) and interpolation data (``re,im,j,c_re,c_im``)."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DomainError
from .geometry import MultiSet
from .interp import InterpolationData

__all__ = ["read_points", "write_points", "read_interp_data", "write_interp_data"]

POINT_HEADER = ["re", "im", "mult"]
DATA_HEADER = ["re", "im", "j", "c_re", "c_im"]


def _fmt(x: float) -> str:
    return repr(float(x))


def _rows(path):
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
                continue
            yield lineno, cells


def _is_header(cells, names):
    return [c.lower() for c in cells] == names[:len(cells)]


def read_points(path) -> MultiSet:
    """Read a point set; ``mult`` defaults to 1 and a header line is optional."""
    pts, mult = [], []
    for lineno, cells in _rows(path):
        if not pts and _is_header(cells, POINT_HEADER):
            continue
        if len(cells) not in (2, 3):
            raise DomainError(f"{path}:{lineno}: expected re,im[,mult], got {len(cells)} fields")
        try:
            z = complex(float(cells[0]), float(cells[1]))
            m = int(cells[2]) if len(cells) == 3 else 1
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: cannot parse {','.join(cells)!r}") from exc
        pts.append(z)
        mult.append(m)
    if not pts:
        return MultiSet.empty()
    try:
        return MultiSet(np.array(pts), np.array(mult))
    except DomainError as exc:
        raise DomainError(f"{path}: {exc}") from exc


def write_points(path, ms: MultiSet) -> None:
    """Write with round-trip exact floats."""
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(POINT_HEADER)
        for z, m in zip(ms.points, ms.mult):
            w.writerow([_fmt(z.real), _fmt(z.imag), int(m)])


def read_interp_data(path, ms: MultiSet | None = None, tol: float = 1e-12) -> InterpolationData:
    """Read targets. Points are matched to ``ms``; without ``ms`` the set is
    built from the data with multiplicity ``max j + 1``."""
    recs = []
    for lineno, cells in _rows(path):
        if not recs and _is_header(cells, DATA_HEADER):
            continue
        if len(cells) != 5:
            raise DomainError(f"{path}:{lineno}: expected re,im,j,c_re,c_im, got {len(cells)} fields")
        try:
            z = complex(float(cells[0]), float(cells[1]))
            j = int(cells[2])
            c = complex(float(cells[3]), float(cells[4]))
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: cannot parse {','.join(cells)!r}") from exc
        if j < 0:
            raise DomainError(f"{path}:{lineno}: negative derivative order {j}")
        recs.append((lineno, z, j, c))
    if ms is None:
        order = {}
        for _, z, j, _ in recs:
            order[z] = max(order.get(z, 0), j + 1)
        ms = MultiSet(np.array(list(order), dtype=complex), np.array(list(order.values()), dtype=int)) \
            if order else MultiSet.empty()
    values = {}
    for lineno, z, j, c in recs:
        i = ms.index_of(z, tol)
        if i is None:
            raise DomainError(f"{path}:{lineno}: point {z} is not in the set")
        if j >= ms.mult[i]:
            raise DomainError(f"{path}:{lineno}: order {j} at {z} exceeds declared multiplicity {ms.mult[i]}")
        values[(i, j)] = c
    return InterpolationData(ms, values)


def write_interp_data(path, data: InterpolationData) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DATA_HEADER)
        for (i, j), c in sorted(data.values.items()):
            z = data.set.points[i]
            w.writerow([_fmt(z.real), _fmt(z.imag), j, _fmt(c.real), _fmt(c.imag)])
