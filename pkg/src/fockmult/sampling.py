"""Finite-section estimates of sampling bounds and the density phase scan.

The quadratic form ``sum_{lam,j} |dbar*^(j) f(lam)|^2 e^{-phi(lam)}`` is
compared with ``||f||^2_phi`` on polynomials of degree ``<= N``; the extreme
generalized eigenvalues are the finite-section bounds ``A_N`` and ``B_N``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np
import scipy.linalg
from scipy.special import gammainccinv, logsumexp

from .bell import complete_bell_sequence
from .errors import DomainError, NumericError
from .geometry import MultiSet, ScanGrid, density_profile, square_lattice
from .quadrature import _gauss_legendre01
from .weights import WeightModel, classical_weight

__all__ = [
    "tail_radius",
    "default_radius",
    "norm_rule",
    "monomial_scales",
    "evaluation_matrix",
    "gram_matrix",
    "SamplingReport",
    "frame_bounds",
    "ScanResult",
    "phase_scan",
]

TAIL_MASS = 1e-8
PATCH_MARGIN = 2.0
SCAN_MARGIN = 2.5
# cap on quadrature nodes times basis size (about 0.8 GB of complex128)
MAX_QUAD_ENTRIES = 5 * 10**7


def tail_radius(N: int, alpha: float, tail: float = TAIL_MASS) -> float:
    """Radius outside which the Gaussian mass of ``|z|^{2N} e^{-alpha|z|^2}`` is below ``tail``."""
    return float(np.sqrt(gammainccinv(N + 1, tail) / alpha))


def default_radius(N: int, weight: WeightModel) -> float:
    """Truncation radius for degree-``N`` sections, controlled by the weight's lower bound."""
    return tail_radius(N, weight.lower)


def norm_rule(N: int, R: float, weight: WeightModel):
    """Polar nodes and log-weights for ``integral_{B(0,R)} g e^{-phi} dA``.

    Returns ``(nodes, log_w)`` with ``log_w = log(quadrature weight) - phi``;
    sizes grow with ``N`` and with oscillation of the weight.
    """
    osc = int(np.ceil(R * weight.bandwidth))
    n_r = N + 64 + 2 * osc
    n_t = 2 * N + 32 + 4 * osc
    if n_r * n_t * (N + 1) > MAX_QUAD_ENTRIES:
        raise NumericError(f"degree N={N} on B(0, {R:.3g}) needs a {n_r}x{n_t} quadrature, beyond the "
                           "supported size; lower N or R")
    u, wu = _gauss_legendre01(n_r)
    r = R * u
    theta = 2 * np.pi * np.arange(n_t) / n_t
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    w = ((R * wu * r)[:, None] * np.full(n_t, 2 * np.pi / n_t)[None, :]).ravel()
    logw = np.log(w) - np.asarray(weight.value(nodes))
    if not np.all(np.isfinite(logw)):
        raise NumericError(f"weight is not finite on B(0, {R:.3g}); cannot form the norm")
    return nodes, logw


def monomial_scales(N: int, weight: WeightModel, R: float, rule=None) -> np.ndarray:
    """``s_k = ||z^k||_{phi, B(0,R)}`` for ``k = 0..N``, computed in log space."""
    nodes, logw = rule or norm_rule(N, R, weight)
    logr = np.log(np.abs(nodes))
    k = np.arange(N + 1)[:, None]
    return np.exp(0.5 * logsumexp(2 * k * logr[None, :] + logw[None, :], axis=1))


def _basis_values(N, nodes, logw, scales):
    # rows: u_k(z_q) * sqrt(w_q e^{-phi(z_q)})
    logr = np.log(np.abs(nodes))
    ang = np.angle(nodes)
    k = np.arange(N + 1)[:, None]
    mag = k * logr[None, :] - np.log(scales)[:, None] + 0.5 * logw[None, :]
    return np.exp(mag + 1j * k * ang[None, :])


def gram_matrix(N: int, weight: WeightModel, R: float, normalized: bool = False) -> np.ndarray:
    """``G[i, k] = integral_{B(0,R)} conj(z^i) z^k e^{-phi} dA`` (the Hermitian form of the norm).

    With ``normalized=True`` the basis is ``z^k / s_k`` and the diagonal is 1.
    Raises :class:`NumericError` when the matrix is not positive definite.
    """
    if not R > 0:
        raise DomainError(f"R must be positive, got {R}")
    if N < 0:
        raise DomainError(f"N must be nonnegative, got {N}")
    rule = norm_rule(N, R, weight)
    scales = monomial_scales(N, weight, R, rule)
    U = _basis_values(N, *rule, scales)
    G = U.conj() @ U.T
    G = 0.5 * (G + G.conj().T)
    ev = np.linalg.eigvalsh(G)
    if not np.all(np.isfinite(ev)) or ev[0] <= 1e-13 * ev[-1]:
        raise NumericError(
            f"Gram matrix lost positive definiteness (min eigenvalue {ev[0]:.2e}); "
            "use a smaller N or a larger radius/quadrature")
    if normalized:
        return G
    return G * np.outer(scales, scales)


def evaluation_matrix(ms: MultiSet, weight: WeightModel, N: int, scales=None) -> np.ndarray:
    """Rows ``(lam, j)`` in ``ms.rows()`` order; entry ``e^{-phi(lam)/2} dbar*^(j)(z^k / s_k)(lam)``.

    ``scales`` defaults to ones (plain monomials).
    """
    scales = np.ones(N + 1) if scales is None else np.asarray(scales, float)
    rows = ms.rows()
    E = np.zeros((len(rows), N + 1), dtype=complex)
    if not rows:
        return E
    jmax = ms.n_max - 1
    if jmax > weight.order:
        raise DomainError(f"multiplicity {jmax + 1} exceeds weight smoothness {weight.order}")
    lam = ms.points
    damp = np.exp(-0.5 * np.asarray(weight.value(lam)))
    bells = complete_bell_sequence(jmax, [-weight.holo_deriv(lam, k) for k in range(1, jmax + 1)])
    bells = [np.broadcast_to(b, lam.shape) for b in bells]
    k = np.arange(N + 1)
    # d^l z^k at lam, for l = 0..jmax
    dpow = []
    for l in range(jmax + 1):
        fall = np.array([factorial(kk) // factorial(kk - l) if kk >= l else 0 for kk in k], dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            pw = np.where(k[None, :] >= l, lam[:, None] ** np.maximum(k - l, 0)[None, :], 0)
        dpow.append(fall[None, :] * pw)
    row_index = {rc: r for r, rc in enumerate(rows)}
    for j in range(jmax + 1):
        val = sum(comb(j, l) * dpow[l] * bells[j - l][:, None] for l in range(j + 1))
        val = (-1) ** j * val * damp[:, None] / scales[None, :]
        for i in np.nonzero(ms.mult > j)[0]:
            E[row_index[(int(i), j)]] = val[i]
    return E


@dataclass
class SamplingReport:
    N: int
    R: float
    A: float
    B: float
    spectrum: dict
    N2: int | None = None
    A2: float | None = None
    B2: float | None = None
    stable: bool | None = None

    def to_dict(self):
        return {k: getattr(self, k) for k in ("N", "R", "A", "B", "spectrum", "N2", "A2", "B2", "stable")}


def _bounds(ms, weight, N, R):
    if len(ms) == 0:
        return 0.0, 0.0, {"min": 0.0, "max": 0.0, "median": 0.0, "size": N + 1}
    rule = norm_rule(N, R, weight)
    scales = monomial_scales(N, weight, R, rule)
    U = _basis_values(N, *rule, scales)
    G = U.conj() @ U.T
    G = 0.5 * (G + G.conj().T)
    E = evaluation_matrix(ms, weight, N, scales)
    Q = E.conj().T @ E
    Q = 0.5 * (Q + Q.conj().T)
    try:
        ev = scipy.linalg.eigh(Q, G, eigvals_only=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"generalized eigenproblem failed at N={N}, R={R:.3g}: {exc}; "
                           "lower N or enlarge R") from exc
    if not np.all(np.isfinite(ev)):
        raise NumericError("non-finite eigenvalues in frame-bound estimate")
    A = float(max(ev[0], 0.0))
    B = float(ev[-1])
    return A, B, {"min": float(ev[0]), "max": B, "median": float(np.median(ev)), "size": int(ev.size)}


def frame_bounds(ms: MultiSet, weight: WeightModel, N: int, R: float | None = None,
                 N2: int | None = None, rel_tol: float = 0.25) -> SamplingReport:
    """Finite-section sampling bounds on polynomials of degree ``<= N``.

    When ``N2`` is given the bounds are recomputed at that degree with the
    same ``R``; ``stable`` records whether ``A`` and ``B`` agree within
    ``rel_tol`` (an empirical check only).
    """
    if N < 0:
        raise DomainError(f"N must be nonnegative, got {N}")
    R = default_radius(max(N, N2 or 0), weight) if R is None else float(R)
    A, B, spectrum = _bounds(ms, weight, N, R)
    rep = SamplingReport(N, R, A, B, spectrum)
    if N2 is not None:
        A2, B2, _ = _bounds(ms, weight, N2, R)
        rep.N2, rep.A2, rep.B2 = N2, A2, B2

        def close(x, y):
            return abs(x - y) <= rel_tol * max(abs(x), abs(y), 1e-300)
        rep.stable = bool(close(A, A2) and close(B, B2))
    return rep


@dataclass
class ScanResult:
    rows: list = field(default_factory=list)
    intervals: dict = field(default_factory=dict)
    threshold: float = 0.05

    def to_csv_rows(self):
        return [(r["s"], r["density"], r["A"], r["B"], r["N"], r["R"]) for r in self.rows]

    def to_dict(self):
        return {"threshold": self.threshold,
                "intervals": {str(k): v for k, v in self.intervals.items()},
                "rows": self.rows}


def _collapse_interval(spacings, ratios, threshold):
    """Bracket ``[s_prev, s_first]`` around the first spacing whose ratio drops below ``threshold``."""
    for i, q in enumerate(ratios):
        if q < threshold:
            return (float(spacings[i - 1]) if i else None, float(spacings[i]))
    return (float(spacings[-1]), None)


def phase_scan(spacings, mult: int = 1, alpha: float = np.pi, Ns=(15, 25), R: float | None = None,
               threshold: float = 0.05, margin: float = SCAN_MARGIN, workers: int = 1,
               density_radius: float = 40.0) -> ScanResult:
    """Sweep lattice spacing and record ``A_N``, ``B_N`` for each ``N``.

    For each ``N`` the lattice patch covers ``B(0, sqrt(N/alpha) + margin)``,
    where degree-``N`` polynomials carry their mass, and ``R`` is the larger
    of the tail radius and the patch radius plus a 2-unit collar. The
    density column is the finite-radius headline for the infinite lattice.
    """
    s = np.asarray(spacings, dtype=float)
    if s.size == 0 or np.any(s <= 0) or np.any(np.diff(s) < 0):
        raise DomainError("spacings must be a nonempty, sorted list of positive numbers")
    weight = classical_weight(alpha)
    rep = ScanResult(threshold=threshold)
    density = {}
    for sv in np.unique(s):
        big = square_lattice(sv, half_width=density_radius + 2 * sv + 2, mult=mult)
        prof = density_profile(big, weight, [density_radius], ScanGrid("explicit", centers=(0j, sv / 2 + 0.3j * sv)))
        density[float(sv)] = float(prof.headline_lower)

    def task(args):
        sv, N = args
        patch_r = np.sqrt(N / alpha) + margin
        RN = R if R is not None else max(tail_radius(N, alpha), patch_r + PATCH_MARGIN)
        ms = square_lattice(sv, radius=RN - PATCH_MARGIN, mult=mult)
        A, B, _ = _bounds(ms, weight, N, RN)
        return {"s": float(sv), "density": density[float(sv)], "A": A, "B": B, "N": int(N), "R": float(RN)}

    jobs = [(sv, N) for N in Ns for sv in s]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(task, jobs))
    else:
        rows = [task(j) for j in jobs]
    rep.rows = rows
    for N in Ns:
        rs = [r for r in rows if r["N"] == N]
        ratios = [r["A"] / r["B"] if r["B"] > 0 else 0.0 for r in rs]
        rep.intervals[int(N)] = _collapse_interval([r["s"] for r in rs], ratios, threshold)
    return rep
