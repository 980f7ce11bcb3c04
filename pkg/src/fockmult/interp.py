"""Local interpolants and a finite-dimensional global interpolation solver.

Near a point ``lam`` the interpolant is ``f(z) = p(z) e^{G_lam(z)}`` with
``p(z) = sum_j (k_j / j!) (z - lam)^j``; the coefficients ``k_j`` follow from
the targets ``c_j = dbar*^(j) f(lam)`` either in closed form or by forward
recursion, and the two routes must agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .bell import complete_bell_sequence
from .errors import DomainError, SolverError
from .geometry import MultiSet
from .operator import EntireFunction, dbar_star_all, series_exp
from .potential import DiskDecomposition, riesz_decompose
from .sampling import _basis_values, evaluation_matrix, monomial_scales, norm_rule
from .weights import WeightModel

__all__ = [
    "InterpolationData",
    "coeffs_closed",
    "coeffs_recursive",
    "local_coeffs_closed",
    "local_coeffs_recursive",
    "LocalInterpolant",
    "build_local_interpolant",
    "local_constant",
    "VerifyReport",
    "verify_interpolant",
    "GlobalSolution",
    "global_interpolate_ls",
]


@dataclass(frozen=True, eq=False)
class InterpolationData:
    """Targets ``c[(i, j)]`` for point index ``i`` and order ``0 <= j < mult[i]``.

    Missing keys are zero.
    """

    set: MultiSet
    values: dict

    def __post_init__(self):
        clean = {}
        for key, v in self.values.items():
            i, j = int(key[0]), int(key[1])
            if not 0 <= i < len(self.set):
                raise DomainError(f"point index {i} out of range")
            if not 0 <= j < self.set.mult[i]:
                raise DomainError(
                    f"order {j} at point {self.set.points[i]} exceeds declared multiplicity {self.set.mult[i]}")
            clean[(i, j)] = complex(v)
        object.__setattr__(self, "values", clean)

    def vector(self) -> np.ndarray:
        return np.array([self.values.get(rc, 0j) for rc in self.set.rows()], dtype=complex)

    def at(self, i: int) -> np.ndarray:
        return np.array([self.values.get((i, j), 0j) for j in range(self.set.mult[i])], dtype=complex)

    def norm(self, weight: WeightModel) -> float:
        """``sqrt(sum |c|^2 e^{-phi(lam)})``."""
        phi = np.asarray(weight.value(self.set.points))
        rows = self.set.rows()
        return float(np.sqrt(sum(abs(self.values.get(rc, 0)) ** 2 * np.exp(-phi[rc[0]]) for rc in rows)))


def coeffs_closed(c, gap_jet) -> np.ndarray:
    """``k_j = sum_l (-1)^l C(j,l) c_l B_{j-l}(gap_jet)``; ``gap_jet`` is the jet of ``phi - G_lam``."""
    c = np.asarray(c, dtype=complex)
    m = c.size
    if len(gap_jet) < m - 1:
        raise DomainError("jet too short for the number of targets")
    B = complete_bell_sequence(m - 1, list(gap_jet)[:m - 1])
    return np.array([sum((-1) ** l * comb(j, l) * c[l] * B[j - l] for l in range(j + 1))
                     for j in range(m)], dtype=complex)


def coeffs_recursive(c, gap_jet) -> np.ndarray:
    """``k_j = (-1)^j c_j - sum_{l<j} C(j,l) k_l B_{j-l}(-gap_jet)``."""
    c = np.asarray(c, dtype=complex)
    m = c.size
    if len(gap_jet) < m - 1:
        raise DomainError("jet too short for the number of targets")
    B = complete_bell_sequence(m - 1, [-x for x in list(gap_jet)[:m - 1]])
    k = np.zeros(m, dtype=complex)
    for j in range(m):
        k[j] = (-1) ** j * c[j] - sum(comb(j, l) * k[l] * B[j - l] for l in range(j))
    return k


def _gap_jet(values, dec: DiskDecomposition, weight: WeightModel):
    m = len(values)
    if m - 1 > dec.order or m - 1 > weight.order:
        raise DomainError(f"{m} targets need derivative order {m - 1}, decomposition has {dec.order}")
    return dec.gap_jet(m - 1)


def local_coeffs_closed(values, dec: DiskDecomposition, weight: WeightModel) -> np.ndarray:
    return coeffs_closed(values, _gap_jet(values, dec, weight))


def local_coeffs_recursive(values, dec: DiskDecomposition, weight: WeightModel) -> np.ndarray:
    return coeffs_recursive(values, _gap_jet(values, dec, weight))


@dataclass(frozen=True, eq=False)
class LocalInterpolant:
    center: complex
    radius: float
    k_coeffs: np.ndarray
    values: np.ndarray
    decomposition: DiskDecomposition

    def p(self, z):
        j = np.arange(self.k_coeffs.size)
        coef = self.k_coeffs / np.array([factorial(int(i)) for i in j])
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex) - self.center, coef)

    def __call__(self, z):
        return self.p(z) * np.exp(self.decomposition.G_lambda(z))

    def as_entire(self, trunc_order: int = 20) -> tuple[EntireFunction, float]:
        """Polynomial-times-exponential surrogate and a bound on its error on the disk.

        The affine part of ``G_lam`` stays exact in the exponent; the rest
        of ``e^{G_lam}`` is replaced by its Taylor polynomial of degree
        ``trunc_order``. The surrogate's derivatives at the center are exact
        up to that order.
        """
        g = np.array(self.decomposition.holo_coeffs, dtype=complex)
        rest = g.copy()
        rest[:2] = 0
        poly_e = series_exp(rest, trunc_order)
        kp = self.k_coeffs / np.array([factorial(int(i)) for i in range(self.k_coeffs.size)])
        poly = np.convolve(kp, poly_e)
        ent = EntireFunction(poly, 0j, complex(g[1]) if g.size > 1 else 0j, self.center)
        n = np.arange(rest.size)
        gmax = float(np.sum(np.abs(rest) * self.radius ** n))
        tail, term = 0.0, 1.0
        for k in range(1, trunc_order + 60):
            term *= gmax / k
            if k > trunc_order:
                tail += term
        pmax = float(np.sum(np.abs(kp) * self.radius ** np.arange(kp.size)))
        return ent, pmax * tail * float(np.exp(abs(g[1]) * self.radius if g.size > 1 else 0.0))

    def bound_ratio(self, weight: WeightModel, n_grid: int = 12) -> float:
        """max over a polar grid in the disk of ``|f|^2 e^{-phi}`` over ``sum |c_l|^2 e^{-phi(center)}``."""
        rho = self.radius * (np.arange(n_grid + 1) / n_grid)
        theta = 2 * np.pi * np.arange(2 * n_grid) / (2 * n_grid)
        z = (self.center + rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
        num = np.abs(self(z)) ** 2 * np.exp(-np.asarray(weight.value(z)))
        den = np.sum(np.abs(self.values) ** 2) * np.exp(-float(weight.value(self.center)))
        return float(num.max() / den) if den > 0 else 0.0


def build_local_interpolant(lam: complex, eps: float, values, weight: WeightModel,
                            dec: DiskDecomposition | None = None, method: str = "closed") -> LocalInterpolant:
    """Interpolant on ``B(lam, eps)`` with ``dbar*^(j) f(lam) = values[j]``."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    values = np.atleast_1d(np.asarray(values, dtype=complex))
    if values.size - 1 > weight.order:
        raise DomainError(f"{values.size} targets exceed weight smoothness {weight.order}")
    if dec is None:
        dec = riesz_decompose(weight, lam, eps, order=max(values.size - 1, 1))
    solver = local_coeffs_closed if method == "closed" else local_coeffs_recursive
    k = solver(values, dec, weight)
    return LocalInterpolant(complex(lam), float(eps), k, values, dec)


def local_constant(lam: complex, eps: float, m: int, weight: WeightModel, n_grid: int = 12) -> float:
    """Sup over data of ``bound_ratio`` at ``lam``: the worst ``C_eps`` on a polar grid.

    The interpolant is linear in the targets, so the supremum over ``c`` of
    ``|f(z)|^2 / |c|^2`` is ``sum_l |f_l(z)|^2`` over the basis interpolants.
    """
    dec = riesz_decompose(weight, lam, eps, order=max(m - 1, 1))
    rho = eps * (np.arange(n_grid + 1) / n_grid)
    theta = 2 * np.pi * np.arange(2 * n_grid) / (2 * n_grid)
    z = (complex(lam) + rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    tot = np.zeros(z.size)
    for l in range(m):
        f = build_local_interpolant(lam, eps, np.eye(m)[l], weight, dec)
        tot += np.abs(f(z)) ** 2
    return float(np.max(tot * np.exp(float(weight.value(lam)) - np.asarray(weight.value(z)))))


@dataclass
class VerifyReport:
    residuals: np.ndarray
    truncation_bound: float
    inconclusive: bool

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0


def verify_interpolant(f: LocalInterpolant, weight: WeightModel, trunc_order: int = 20,
                       k_override=None) -> VerifyReport:
    """``|dbar*^(j) f(lam) - c_j|`` through the exact operator calculus.

    ``inconclusive`` is set when the truncation cannot represent all orders
    being checked exactly (``trunc_order < m - 1``).
    """
    if k_override is not None:
        f = LocalInterpolant(f.center, f.radius, np.asarray(k_override, complex), f.values, f.decomposition)
    m = f.values.size
    ent, bound = f.as_entire(trunc_order)
    got = np.array([complex(v) for v in dbar_star_all(ent, weight, f.center, m - 1)])
    return VerifyReport(np.abs(got - f.values), bound, trunc_order < m - 1)


@dataclass
class GlobalSolution:
    coeffs: np.ndarray
    residuals: np.ndarray
    weighted_residuals: np.ndarray
    norm: float
    feasible: bool
    overdetermined: bool
    condition: float

    def to_dict(self):
        return {
            "coeffs_re": self.coeffs.real.tolist(),
            "coeffs_im": self.coeffs.imag.tolist(),
            "residuals": self.residuals.tolist(),
            "max_residual": float(self.residuals.max()) if self.residuals.size else 0.0,
            "norm": self.norm,
            "feasible": self.feasible,
            "overdetermined": self.overdetermined,
            "condition": self.condition,
        }


def global_interpolate_ls(data: InterpolationData, weight: WeightModel, N: int, R: float | None = None,
                          tau: float = 1e-10, feas_tol: float = 1e-6) -> GlobalSolution:
    """Polynomial of degree ``<= N`` fitting all targets in weighted least squares.

    Minimizes ``sum |dbar*^(j) p(lam) - c|^2 e^{-phi(lam)} + tau_eff ||p||^2``
    with ``||p||`` the weighted norm on ``B(0, R)`` and ``tau_eff = tau``
    times the largest squared singular value of the whitened system, so the
    ridge is scale-free. Among near-minimizers this selects the smallest
    norm.
    """
    ms = data.set
    if N < 0:
        raise DomainError(f"N must be nonnegative, got {N}")
    if R is None:
        R = (float(np.abs(ms.points).max()) if len(ms) else 0.0) + 4.0
    rule = norm_rule(N, R, weight)
    scales = monomial_scales(N, weight, R, rule)
    U = _basis_values(N, *rule, scales)
    G = U.conj() @ U.T
    G = 0.5 * (G + G.conj().T)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        ev = np.linalg.eigvalsh(G)
        raise SolverError(f"Gram matrix not positive definite (eigenvalues {ev[0]:.2e}..{ev[-1]:.2e}); "
                          "lower N or enlarge R") from exc
    E = evaluation_matrix(ms, weight, N, scales)
    damp = np.exp(-0.5 * np.asarray(weight.value(ms.points)))
    rows = ms.rows()
    t = data.vector() * np.array([damp[i] for i, _ in rows])
    # whitened variable y = L^H x so that ||p||^2 = ||y||^2
    A = np.linalg.solve(L.conj(), E.T).T if E.size else np.zeros((0, N + 1), complex)
    if A.shape[0]:
        Uu, s, Vh = np.linalg.svd(A, full_matrices=False)
        if not np.all(np.isfinite(s)):
            raise SolverError("non-finite singular values in the interpolation system")
        lam2 = tau * s[0] ** 2
        filt = s / (s**2 + lam2)
        y = Vh.conj().T @ (filt * (Uu.conj().T @ t))
        cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    else:
        y = np.zeros(N + 1, complex)
        cond = 1.0
    x = np.linalg.solve(L.conj().T, y)
    wres = np.abs(E @ x - t)
    res = wres / np.array([damp[i] for i, _ in rows]) if rows else wres
    scale = 1.0 + np.linalg.norm(t)
    return GlobalSolution(x / scales, res, wres, float(np.linalg.norm(y)),
                          bool(wres.max() <= feas_tol * scale) if rows else True,
                          len(rows) > N + 1, cond)
