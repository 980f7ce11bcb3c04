"""Test functions and pointwise weighted derivatives.

``dbar_star(f, weight, lam, j)`` evaluates ``(-1)^j e^{phi} d^j(f e^{-phi})``
at ``lam`` by the Leibniz rule, with ``d^k e^{-phi} / e^{-phi}`` given by
the complete Bell polynomial of the jet ``(-d phi, ..., -d^k phi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from numpy.polynomial import polynomial as P

from .bell import complete_bell_sequence
from .errors import DomainError
from .weights import WeightModel

__all__ = [
    "EntireFunction",
    "series_exp",
    "holo_derivative",
    "dbar_star",
    "dbar_star_all",
    "dbar_star_change_weight",
    "bargmann_shift",
    "weighted_feh_derivatives",
]


@dataclass(frozen=True, eq=False)
class EntireFunction:
    """``f(z) = p(z - center) * exp(a + b (z - center))``.

    ``poly`` holds the coefficients of ``p`` in increasing degree. Keeping
    the expansion point explicit lets Bargmann shifts act exactly, without
    re-expanding the polynomial.
    """

    poly: np.ndarray
    a: complex = 0j
    b: complex = 0j
    center: complex = 0j

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.poly, dtype=complex)).copy()
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise DomainError("polynomial coefficients must be a finite 1-d sequence")
        c.setflags(write=False)
        object.__setattr__(self, "poly", c)
        for name in ("a", "b", "center"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def polynomial(cls, coeffs) -> "EntireFunction":
        return cls(np.asarray(coeffs, dtype=complex))

    @classmethod
    def monomial(cls, k: int) -> "EntireFunction":
        c = np.zeros(k + 1, dtype=complex)
        c[k] = 1
        return cls(c)

    def __call__(self, z):
        w = np.asarray(z, dtype=complex) - self.center
        return P.polyval(w, self.poly) * np.exp(self.a + self.b * w)

    def derivative(self, k: int = 1) -> "EntireFunction":
        if k < 0:
            raise DomainError(f"derivative order must be nonnegative, got {k}")
        c = self.poly
        for _ in range(k):
            c = _poly_add(P.polyder(c) if c.size > 1 else np.zeros(1, complex), self.b * c)
        return EntireFunction(c, self.a, self.b, self.center)

    def derivative_values(self, z, kmax: int) -> list:
        """``[f(z), d f(z), ..., d^kmax f(z)]``."""
        w = np.asarray(z, dtype=complex) - self.center
        ex = np.exp(self.a + self.b * w)
        out, c = [], self.poly
        for _ in range(kmax + 1):
            out.append(P.polyval(w, c) * ex)
            c = _poly_add(P.polyder(c) if c.size > 1 else np.zeros(1, complex), self.b * c)
        return out

    def taylor(self, z0: complex, n: int) -> np.ndarray:
        """Taylor coefficients ``d^k f(z0) / k!`` for ``k = 0..n``."""
        vals = self.derivative_values(complex(z0), n)
        return np.array([complex(v) / factorial(k) for k, v in enumerate(vals)])

    def _same_exponent(self, other):
        return self.a == other.a and self.b == other.b and self.center == other.center

    def __add__(self, other: "EntireFunction") -> "EntireFunction":
        if not self._same_exponent(other):
            raise DomainError("sum requires a common exponential factor")
        return EntireFunction(_poly_add(self.poly, other.poly), self.a, self.b, self.center)

    def __mul__(self, s) -> "EntireFunction":
        return EntireFunction(self.poly * complex(s), self.a, self.b, self.center)

    __rmul__ = __mul__


def _poly_add(p, q):
    n = max(p.size, q.size)
    out = np.zeros(n, dtype=complex)
    out[:p.size] += p
    out[:q.size] += q
    return out


def series_exp(g, n: int) -> np.ndarray:
    """Coefficients ``0..n`` of ``exp(sum g_k w^k)`` for a power series ``g``."""
    g = np.zeros(n + 1, dtype=complex) if len(g) == 0 else np.asarray(g, dtype=complex)
    gg = np.zeros(n + 1, dtype=complex)
    gg[:min(n + 1, g.size)] = g[:n + 1]
    e = np.zeros(n + 1, dtype=complex)
    e[0] = np.exp(gg[0])
    for k in range(1, n + 1):
        i = np.arange(1, k + 1)
        e[k] = np.sum(i * gg[i] * e[k - i]) / k
    return e


def holo_derivative(f: EntireFunction, k: int) -> EntireFunction:
    return f.derivative(k)


def _neg_phi_bells(weight: WeightModel, lam, j: int) -> list:
    if j > weight.order:
        raise DomainError(f"order {j} exceeds weight smoothness {weight.order}")
    jet = [-weight.holo_deriv(lam, k) for k in range(1, j + 1)]
    return complete_bell_sequence(j, jet)


def dbar_star_all(f: EntireFunction, weight: WeightModel, lam, jmax: int) -> list:
    """``[dbar*^(0) f(lam), ..., dbar*^(jmax) f(lam)]``; ``lam`` may be an array."""
    if jmax < 0:
        raise DomainError(f"order must be nonnegative, got {jmax}")
    lam = np.asarray(lam, dtype=complex)
    bells = _neg_phi_bells(weight, lam, jmax)
    df = f.derivative_values(lam, jmax)
    out = []
    for j in range(jmax + 1):
        acc = sum(comb(j, l) * df[l] * bells[j - l] for l in range(j + 1))
        out.append((-1) ** j * acc)
    return out


def dbar_star(f: EntireFunction, weight: WeightModel, lam, j: int):
    """``dbar*_phi^(j) f(lam) = (-1)^j e^{phi} d^j(f e^{-phi})(lam)``."""
    out = dbar_star_all(f, weight, lam, j)[j]
    return complex(out) if np.ndim(out) == 0 else out


def dbar_star_change_weight(f: EntireFunction, w1: WeightModel, w2: WeightModel, lam, j: int):
    """``dbar*`` for ``w2`` assembled from ``dbar*`` values for ``w1``.

    Uses ``d^k e^{phi1 - phi2} = e^{phi1 - phi2} B_k(jet of phi1 - phi2)``,
    so the exponential factors cancel exactly.
    """
    if j > min(w1.order, w2.order):
        raise DomainError(f"order {j} exceeds the smoothness of one of the weights")
    lam = np.asarray(lam, dtype=complex)
    ds = dbar_star_all(f, w1, lam, j)
    jet = [w1.holo_deriv(lam, k) - w2.holo_deriv(lam, k) for k in range(1, j + 1)]
    bells = complete_bell_sequence(j, jet)
    out = sum(comb(j, l) * ds[l] * (-1) ** (j - l) * bells[j - l] for l in range(j + 1))
    return complex(out) if np.ndim(out) == 0 else out


def bargmann_shift(f: EntireFunction, alpha: float, w: complex) -> EntireFunction:
    """``e^{-alpha|w|^2/2 + alpha z conj(w)} f(z - w)``, exactly."""
    w = complex(w)
    c_new = f.center + w
    a = f.a - 0.5 * alpha * abs(w) ** 2 + alpha * np.conj(w) * c_new
    b = f.b + alpha * np.conj(w)
    return EntireFunction(f.poly, a, b, c_new)


def weighted_feh_derivatives(f: EntireFunction, dec, weight: WeightModel, lam: complex, k: int) -> complex:
    """``d^k (f e^{-H})(lam)`` from ``dbar*`` values and the jet of the potential at ``lam``."""
    if abs(complex(lam) - dec.center) > 1e-12 * (1 + abs(dec.center)):
        raise DomainError("lam must be the center of the decomposition")
    if k > dec.order or k > weight.order:
        raise DomainError(f"order {k} exceeds the decomposition or weight order")
    ds = dbar_star_all(f, weight, lam, k)
    bells = complete_bell_sequence(k, dec.potential_jet(k))
    eH = np.exp(-dec.H(lam))
    total = sum((-1) ** j * comb(k, j) * ds[j] * bells[k - j] for j in range(k + 1))
    return complex(total * eH)
