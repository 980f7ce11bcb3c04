"""Point sets with multiplicities and finite-radius Beurling density profiles.

Disks are open: a point at distance exactly ``r`` from the center is not
counted. Densities are reported over a finite grid of scan centers and a
finite list of radii; nothing here computes the asymptotic limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, NumericError
from .quadrature import disk_integral, resolution_for
from .weights import WeightModel

__all__ = [
    "MultiSet",
    "square_lattice",
    "separation",
    "relative_separation",
    "count_with_mult",
    "laplacian_mass",
    "ScanGrid",
    "DensityReport",
    "density_profile",
    "window_delta",
]


@dataclass(frozen=True, eq=False)
class MultiSet:
    """Finite set of distinct complex points with positive integer multiplicities."""

    points: np.ndarray
    mult: np.ndarray

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=complex)).ravel()
        mult = np.atleast_1d(np.asarray(self.mult)).ravel()
        if mult.size == 1 and pts.size != 1:
            mult = np.full(pts.size, int(mult[0]))
        if mult.size != pts.size:
            raise DomainError("points and multiplicities differ in length")
        if mult.size and (np.any(mult != np.round(mult)) or np.any(mult < 1)):
            raise DomainError("multiplicities must be integers >= 1")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points must be finite")
        if pts.size > 1:
            uniq = np.unique(np.stack([pts.real, pts.imag], axis=1), axis=0)
            if len(uniq) != pts.size:
                raise DomainError("points must be pairwise distinct")
        pts.setflags(write=False)
        mult = mult.astype(int)
        mult.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mult", mult)

    @classmethod
    def from_points(cls, points, mult=1) -> "MultiSet":
        return cls(np.asarray(points, dtype=complex), np.asarray(mult))

    @classmethod
    def empty(cls) -> "MultiSet":
        return cls(np.zeros(0, dtype=complex), np.zeros(0, dtype=int))

    def __len__(self):
        return self.points.size

    @property
    def n_max(self) -> int:
        """``sup m`` (equal to ``n_Lambda + 1``); 0 for the empty set."""
        return int(self.mult.max()) if len(self) else 0

    @property
    def mass(self) -> int:
        return int(self.mult.sum())

    def multiplicity(self, z, tol: float = 0.0) -> int:
        idx = self.index_of(z, tol)
        return 0 if idx is None else int(self.mult[idx])

    def index_of(self, z, tol: float = 0.0):
        if not len(self):
            return None
        d = np.abs(self.points - complex(z))
        i = int(np.argmin(d))
        return i if d[i] <= tol else None

    def with_mult(self, mult) -> "MultiSet":
        return MultiSet(self.points, mult)

    def rows(self):
        """(point index, derivative order) pairs in canonical row order."""
        return [(i, j) for i, m in enumerate(self.mult) for j in range(m)]

    def tree(self) -> cKDTree:
        if "_tree" not in self.__dict__:
            object.__setattr__(self, "_tree", cKDTree(np.stack([self.points.real, self.points.imag], axis=1)))
        return self.__dict__["_tree"]


def square_lattice(spacing: float, radius: float | None = None, half_width: float | None = None,
                   mult: int = 1, center: complex = 0) -> MultiSet:
    """Points of ``spacing * Z^2`` (shifted to ``center``) in an open disk or a closed box."""
    if not spacing > 0:
        raise DomainError(f"spacing must be positive, got {spacing}")
    if (radius is None) == (half_width is None):
        raise DomainError("give exactly one of radius or half_width")
    extent = radius if radius is not None else half_width
    n = int(np.floor(extent / spacing)) + 1
    g = spacing * np.arange(-n, n + 1)
    X, Y = np.meshgrid(g, g, indexing="ij")
    off = X + 1j * Y
    if radius is not None:
        keep = off.real**2 + off.imag**2 < radius**2
    else:
        keep = (np.abs(off.real) <= half_width) & (np.abs(off.imag) <= half_width)
    pts = off[keep] + center
    return MultiSet(pts, np.full(pts.size, int(mult)))


def separation(ms: MultiSet) -> float:
    """Minimum pairwise distance; ``inf`` for fewer than two points."""
    if len(ms) < 2:
        return float("inf")
    d, _ = ms.tree().query(ms.tree().data, k=2)
    return float(d[:, 1].min())


def relative_separation(ms: MultiSet) -> int:
    """Largest number of points in an open unit disk.

    Candidate centers are the points themselves and midpoints of pairs closer
    than 2. This is a heuristic: exact whenever the optimum is attained at one
    of those centers, which covers lattices and sets with ``rho > 1``.
    """
    if not len(ms):
        return 0
    tree = ms.tree()
    pairs = np.array(sorted(tree.query_pairs(2.0)), dtype=int).reshape(-1, 2)
    centers = ms.points
    if len(pairs):
        centers = np.concatenate([centers, 0.5 * (ms.points[pairs[:, 0]] + ms.points[pairs[:, 1]])])
    counts = _open_counts(ms, centers, 1.0, weighted=False)
    return int(counts.max())


def _open_counts(ms: MultiSet, centers, r: float, weighted: bool = True) -> np.ndarray:
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    out = np.zeros(centers.shape, dtype=int)
    if not len(ms):
        return out
    flat = centers.ravel()
    xy = np.stack([flat.real, flat.imag], axis=1)
    hits = ms.tree().query_ball_point(xy, r)
    r2 = r * r
    res = out.ravel()
    for i, idx in enumerate(hits):
        if not idx:
            continue
        idx = np.asarray(idx)
        diff = ms.points[idx] - flat[i]
        inside = idx[diff.real**2 + diff.imag**2 < r2]
        res[i] = ms.mult[inside].sum() if weighted else inside.size
    return res.reshape(centers.shape)


def count_with_mult(ms: MultiSet, z, r: float):
    """``N(z, r)``: multiplicities summed over points with ``|lambda - z| < r``."""
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    out = _open_counts(ms, z, r)
    return int(out[0]) if np.ndim(z) == 0 else out


def laplacian_mass(weight: WeightModel, z, r: float, n_radial: int | None = None,
                   n_angular: int | None = None):
    """Integral of ``Delta phi`` over ``B(z, r)`` by polar tensor quadrature.

    Default resolution is 64x64, raised automatically for disks spanning many
    oscillations of the weight (see ``WeightModel.bandwidth``).
    """
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    nr, na = resolution_for(r, weight.bandwidth)
    nr = n_radial or nr
    na = n_angular or na
    val = np.real(disk_integral(weight.laplacian, z, r, nr, na))
    if not np.all(np.isfinite(val)):
        raise NumericError("Laplacian mass quadrature produced non-finite values")
    return float(val) if np.ndim(z) == 0 else val


@dataclass(frozen=True)
class ScanGrid:
    """Scan-center policy for density profiles.

    ``region``:
      * ``"interior"`` -- lattice of centers on the bounding box of the set
        shrunk by ``r`` (disks stay inside the sampled region); falls back to
        the box center when the shrunk box is empty.
      * ``"inflated"`` -- bounding box inflated by ``r``.
      * ``"explicit"`` -- use ``centers`` as given, for every radius.

    Centers form a square lattice of step ``step_factor * r``.
    """

    region: str = "interior"
    step_factor: float = 0.25
    centers: tuple = field(default=())

    def centers_for(self, ms: MultiSet, r: float) -> np.ndarray:
        if self.region == "explicit":
            c = np.asarray(self.centers, dtype=complex).ravel()
            if not c.size:
                raise DomainError("empty scan grid")
            return c
        if self.region not in ("interior", "inflated"):
            raise DomainError(f"unknown scan region {self.region!r}")
        if not self.step_factor > 0:
            raise DomainError("step_factor must be positive")
        if len(ms):
            lo = np.array([ms.points.real.min(), ms.points.imag.min()])
            hi = np.array([ms.points.real.max(), ms.points.imag.max()])
        else:
            lo = hi = np.zeros(2)
        pad = r if self.region == "inflated" else -r
        lo, hi = lo - pad, hi + pad
        if np.any(hi < lo):
            mid = 0.5 * (lo + hi)
            return np.array([complex(mid[0], mid[1])])
        step = self.step_factor * r
        xs = lo[0] + step * np.arange(int(np.floor((hi[0] - lo[0]) / step + 1e-9)) + 1)
        ys = lo[1] + step * np.arange(int(np.floor((hi[1] - lo[1]) / step + 1e-9)) + 1)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return (X + 1j * Y).ravel()

    def describe(self) -> str:
        if self.region == "explicit":
            return f"explicit list of {len(self.centers)} centers"
        return f"{self.region} bounding box, center step {self.step_factor}*r (finite grid, not all of C)"


@dataclass
class DensityReport:
    radii: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    n_centers: np.ndarray
    scan: str
    headline_lower: float
    headline_upper: float

    def to_dict(self) -> dict:
        return {
            "radii": self.radii.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "n_centers": self.n_centers.tolist(),
            "scan": self.scan,
            "headline_lower": self.headline_lower,
            "headline_upper": self.headline_upper,
        }


def _extrapolate(radii, values) -> float:
    """Fit ``D + c/r`` and return ``D``; the value itself for a single radius."""
    radii = np.asarray(radii, float)
    values = np.asarray(values, float)
    if len(np.unique(radii)) < 2:
        return float(values[-1])
    A = np.stack([np.ones_like(radii), 1.0 / radii], axis=1)
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    return float(coef[0])


def density_profile(ms: MultiSet, weight: WeightModel, radii, scan: ScanGrid | None = None,
                    n_radial: int | None = None, n_angular: int | None = None) -> DensityReport:
    """Per radius, inf and sup over scan centers of ``N(z,r) / integral_{B(z,r)} Delta phi``."""
    scan = scan or ScanGrid()
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if radii.size == 0 or np.any(radii <= 0):
        raise DomainError("radii must be a nonempty list of positive numbers")
    lower = np.empty(radii.size)
    upper = np.empty(radii.size)
    ncent = np.empty(radii.size, dtype=int)
    for i, r in enumerate(radii):
        centers = scan.centers_for(ms, r)
        counts = _open_counts(ms, centers, r)
        mass = np.empty(centers.size)
        for s in range(0, centers.size, 256):
            mass[s:s + 256] = laplacian_mass(weight, centers[s:s + 256], r, n_radial, n_angular)
        ratio = counts / mass
        lower[i], upper[i], ncent[i] = ratio.min(), ratio.max(), centers.size
    return DensityReport(radii, lower, upper, ncent, scan.describe(),
                         _extrapolate(radii, lower), _extrapolate(radii, upper))


def window_delta(weight: WeightModel, r: float, eps: float) -> float:
    """Bound on ``|mass(z, r+eps) / mass(z, r) - 1|`` from ``m <= Delta phi <= M``."""
    return weight.upper / weight.lower * ((1 + eps / r) ** 2 - 1)
