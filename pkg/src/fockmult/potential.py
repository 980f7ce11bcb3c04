"""Riesz decomposition of a weight on a disk.

On ``B(c, rho)`` the weight splits as ``phi = h + G[Delta phi]`` with

    G[Delta phi](z) = (2/pi) * integral_{B(c,rho)} log|w - z| Delta phi(w) dA(w)

and ``h`` harmonic. ``h = 2 Re H`` for a holomorphic ``H`` whose Taylor
coefficients about the center are recovered from Fourier samples of ``h``;
``G_lam = H - H(lam)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import DecompositionError, DomainError, NumericError
from .quadrature import _gauss_legendre01, resolution_for
from .weights import WeightModel

__all__ = [
    "disk_log_potential",
    "log_potential",
    "DiskDecomposition",
    "riesz_decompose",
    "g_lambda_derivs",
    "log_bound_constant",
    "PotentialBoundReport",
    "potential_bound_report",
]

DEFAULT_FOURIER = 64
# Fourier coefficients below this fraction of the sample scale are treated as round-off.
COEFF_FLOOR = 1e-13
RESIDUAL_TOL = 1e-6


def disk_log_potential(center, radius: float, z):
    """``integral_{B(center, radius)} log|w - z| dA(w)`` in closed form."""
    d2 = np.abs(np.asarray(z, dtype=complex) - center) ** 2
    r2 = radius * radius
    inside = np.pi * r2 * np.log(radius) - 0.5 * np.pi * (r2 - d2)
    with np.errstate(divide="ignore"):
        outside = 0.5 * np.pi * r2 * np.log(np.where(d2 > 0, d2, 1.0))
    return np.where(d2 <= r2, inside, outside)


def _polar_log_integral(func, center, radius, z, n_radial, n_angular):
    """``integral_{B(center,radius)} log|w-z| func(w) dA(w)`` in polar coordinates about ``z``.

    The radial variable is ``t = t_max u^2``, which turns ``t log t`` into a
    smooth function of ``u``.
    """
    z = np.asarray(z, dtype=complex)
    off = z - center
    d = np.abs(off)[..., None]
    psi = np.angle(off)[..., None]
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    s = np.sin(theta - psi)
    c = np.cos(theta - psi)
    tmax = -d * c + np.sqrt(np.maximum(radius**2 - (d * s) ** 2, 0.0))
    u, wu = _gauss_legendre01(n_radial)
    t = tmax[..., None] * u**2
    nodes = z[..., None, None] + t * np.exp(1j * theta)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logt = np.where(t > 0, np.log(np.where(t > 0, t, 1.0)), 0.0)
    vals = func(nodes)
    jac = t * 2 * tmax[..., None] * u * wu
    return np.sum(logt * vals * jac, axis=(-1, -2)) * (2 * np.pi / n_angular)


def log_potential(weight: WeightModel, center: complex, radius: float, z, split: bool = True,
                  n_radial: int | None = None, n_angular: int | None = None):
    """``G[Delta phi](z)`` for ``z`` in the closed disk ``B(center, radius)``.

    With ``split=True`` the kernel singularity is removed by subtracting
    ``Delta phi(z)``: the constant part uses :func:`disk_log_potential` and
    the remainder has a bounded integrand. ``split=False`` integrates the
    full product directly.
    """
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z - center) > radius * (1 + 1e-12)):
        raise DomainError("log_potential is only defined on the closed disk")
    nr, na = resolution_for(radius, weight.bandwidth)
    nr, na = n_radial or nr, n_angular or na
    if split:
        lap_z = np.asarray(weight.laplacian(z), dtype=float)
        def rest(w):
            return weight.laplacian(w) - lap_z[..., None, None]
        val = lap_z * disk_log_potential(center, radius, z)
        val = val + _polar_log_integral(rest, center, radius, z, nr, na)
    else:
        val = _polar_log_integral(weight.laplacian, center, radius, z, nr, na)
    val = (2 / np.pi) * np.real(val)
    if not np.all(np.isfinite(val)):
        raise NumericError("log potential quadrature produced non-finite values")
    return float(val) if val.ndim == 0 else val


@dataclass
class DiskDecomposition:
    """``phi = harmonic + potential`` on ``B(center, radius)``.

    ``holo_coeffs[n]`` is the Taylor coefficient of ``H`` about the center,
    with ``Im H(center) = 0``; ``order`` is the largest derivative order the
    caller asked for.
    """

    weight: WeightModel
    center: complex
    radius: float
    order: int
    holo_coeffs: np.ndarray
    sample_radius: float
    residual: float
    _cache: dict = field(default_factory=dict, repr=False)

    def potential(self, z):
        return log_potential(self.weight, self.center, self.radius, z)

    def harmonic(self, z):
        return np.asarray(self.weight.value(z)) - self.potential(z)

    def H(self, z, k: int = 0):
        """``d^k H(z)`` from the stored series."""
        a = self.holo_coeffs
        n = np.arange(k, a.size)
        if n.size == 0:
            return np.zeros(np.shape(z), dtype=complex)
        fall = np.array([factorial(int(i)) // factorial(int(i) - k) for i in n], dtype=float)
        coef = a[k:] * fall
        w = np.asarray(z, dtype=complex) - self.center
        return np.polynomial.polynomial.polyval(w, coef)

    def G_lambda(self, z, k: int = 0):
        """``d^k G_lam(z)`` with ``G_lam = H - H(center)``."""
        out = self.H(z, k)
        return out - self.holo_coeffs[0] if k == 0 else out

    def g_lambda_derivs(self, k: int) -> complex:
        self._check(k)
        return 0j if k == 0 else complex(factorial(k) * self.holo_coeffs[k])

    def potential_derivs(self, k: int) -> complex:
        """``d^k G[Delta phi](center)``."""
        self._check(k)
        phi_k = complex(self.weight.holo_deriv(self.center, k))
        if k == 0:
            return phi_k - 2 * self.holo_coeffs[0]
        return phi_k - factorial(k) * self.holo_coeffs[k]

    def potential_jet(self, n: int) -> list:
        return [self.potential_derivs(k) for k in range(1, n + 1)]

    def gap_jet(self, n: int) -> list:
        """Jet ``d^k (phi - G_lam)(center)`` for ``k = 1..n``."""
        return [complex(self.weight.holo_deriv(self.center, k)) - self.g_lambda_derivs(k)
                for k in range(1, n + 1)]

    def conjugate_residual(self, n_points: int = 32) -> float:
        """max ``|2 Re H - h|`` on the sampling circle."""
        theta = 2 * np.pi * (np.arange(n_points) + 0.5) / n_points
        z = self.center + self.sample_radius * np.exp(1j * theta)
        return float(np.max(np.abs(2 * self.H(z).real - self.harmonic(z))))

    def _check(self, k):
        if k < 0 or k > self.order:
            raise DomainError(f"derivative order {k} outside 0..{self.order}")


def riesz_decompose(weight: WeightModel, lam: complex, radius: float = 1.0, order: int = 6,
                    n_fourier: int = DEFAULT_FOURIER, tol: float = RESIDUAL_TOL) -> DiskDecomposition:
    """Decompose ``weight`` on ``B(lam, radius)`` and extract ``H`` by FFT.

    ``h`` is sampled on the circle of radius ``radius/2``. The result is
    checked against direct values of ``h`` at the center and at interior
    points; a mismatch above ``tol`` (relative to the sample scale) raises
    :class:`DecompositionError`.
    """
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    if order < 0 or order > weight.order:
        raise DomainError(f"order {order} outside 0..{weight.order}")
    if n_fourier < 2 * order + 2:
        raise DomainError("n_fourier too small for the requested order")
    lam = complex(lam)
    r0 = radius / 2
    theta = 2 * np.pi * np.arange(n_fourier) / n_fourier
    ring = lam + r0 * np.exp(1j * theta)
    h = np.asarray(weight.value(ring)) - log_potential(weight, lam, radius, ring)
    c = np.fft.fft(h) / n_fourier
    scale = 1.0 + np.max(np.abs(h))
    c[np.abs(c) < COEFF_FLOOR * scale] = 0.0
    nmax = n_fourier // 2
    a = np.zeros(nmax, dtype=complex)
    a[0] = 0.5 * c[0].real
    a[1:] = c[1:nmax] / r0 ** np.arange(1, nmax)
    dec = DiskDecomposition(weight, lam, float(radius), int(order), a, r0, 0.0)
    probes = np.concatenate([[lam], lam + 0.5 * r0 * np.exp(1j * (theta[::8] + 0.3))])
    resid = np.max(np.abs(2 * dec.H(probes).real - dec.harmonic(probes))) / scale
    dec.residual = float(resid)
    if not np.isfinite(resid) or resid > tol:
        raise DecompositionError(
            f"harmonic part failed its consistency check (residual {resid:.2e} > {tol:.1e}); "
            "increase quadrature resolution")
    return dec


def g_lambda_derivs(dec: DiskDecomposition, k: int) -> complex:
    """``d^k G_lam(lam)``; 0 for ``k = 0``."""
    return dec.g_lambda_derivs(k)


def log_bound_constant(upper: float, eps: float) -> float:
    """``(2/pi) * upper * integral_{B(0, 2 eps)} |log|w|| dA``."""
    a = 2 * eps
    if a <= 1:
        integral = np.pi * a * a * (0.5 - np.log(a))
    else:
        integral = np.pi * (1 + a * a * np.log(a) - 0.5 * a * a)
    return 2 / np.pi * upper * integral


@dataclass
class PotentialBoundReport:
    orders: list
    per_order_max: list
    per_order_min: list
    values: np.ndarray
    log_bound: list
    finite: bool
    blowup: bool

    def to_dict(self):
        return {
            "orders": self.orders,
            "per_order_max": self.per_order_max,
            "per_order_min": self.per_order_min,
            "log_bound": self.log_bound,
            "finite": self.finite,
            "blowup": self.blowup,
        }


def potential_bound_report(weight: WeightModel, probes, order: int,
                           growth_factor: float = 10.0) -> PotentialBoundReport:
    """Empirical ``max |d^k G[Delta phi](lam)|`` over probes ``(lam, eps)``.

    Each probe decomposes the weight on ``B(lam, eps)``. ``blowup`` is set
    when some order is non-finite, or its largest value exceeds
    ``growth_factor`` times the largest value at any other probe's radius
    bound.
    """
    probes = list(probes)
    if not probes:
        raise DomainError("probes must be nonempty")
    vals = np.empty((len(probes), order + 1))
    for i, (lam, eps) in enumerate(probes):
        dec = riesz_decompose(weight, lam, eps, order)
        vals[i] = [abs(dec.potential_derivs(k)) for k in range(order + 1)]
    finite = bool(np.all(np.isfinite(vals)))
    bounds = [log_bound_constant(weight.upper, e) for _, e in probes]
    vmax = vals.max(axis=0)
    blowup = (not finite) or bool(vals[:, 0].max() > growth_factor * max(bounds))
    return PotentialBoundReport(list(range(order + 1)), vmax.tolist(), vals.min(axis=0).tolist(),
                                vals, bounds, finite, blowup)
