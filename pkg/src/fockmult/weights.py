"""Weight models with exact pointwise data.

A weight exposes its value, the holomorphic (Wirtinger) derivatives
``d^k phi`` treating ``conj(z)`` as independent, and the Laplacian
normalised as ``Delta = (1/4)(d_xx + d_yy) = d dbar``. Numeric
differentiation is only used by the tests.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError
from .quadrature import DEFAULT_ANGULAR, DEFAULT_RADIAL, disk_average

__all__ = [
    "WeightModel",
    "ClassicalWeight",
    "PerturbedWeight",
    "MollifiedWeight",
    "classical_weight",
    "perturbed_weight",
    "mollify",
    "weight_gap_check",
    "weight_from_config",
]

DEFAULT_ORDER = 16


class WeightModel(ABC):
    """Interface shared by all weights.

    Attributes
    ----------
    lower, upper : float
        Constants ``m <= Delta phi <= M``.
    order : int
        Largest ``k`` for which ``holo_deriv(z, k)`` may be requested.
    bandwidth : float
        Spatial frequency of the non-constant part of ``Delta phi``; used to
        size quadrature rules on large disks.
    """

    lower: float
    upper: float
    order: int
    bandwidth: float = 0.0

    @abstractmethod
    def value(self, z):
        """phi(z), real."""

    @abstractmethod
    def _deriv(self, z, k: int):
        ...

    @abstractmethod
    def laplacian(self, z):
        """Delta phi(z), real."""

    def holo_deriv(self, z, k: int):
        if k < 0 or k > self.order:
            raise DomainError(f"derivative order {k} outside 0..{self.order}")
        if k == 0:
            return np.asarray(self.value(z), dtype=complex)
        return self._deriv(np.asarray(z, dtype=complex), k)

    def jet(self, z, n: int) -> list:
        """``[d phi(z), ..., d^n phi(z)]``."""
        return [self.holo_deriv(z, k) for k in range(1, n + 1)]

    def __call__(self, z):
        return self.value(z)


@dataclass(frozen=True)
class ClassicalWeight(WeightModel):
    """phi(z) = alpha |z|^2."""

    alpha: float
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    @property
    def lower(self):
        return self.alpha

    @property
    def upper(self):
        return self.alpha

    def value(self, z):
        z = np.asarray(z)
        return self.alpha * (z.real**2 + z.imag**2)

    def _deriv(self, z, k):
        if k == 1:
            return self.alpha * np.conj(z)
        return np.zeros_like(z)

    def laplacian(self, z):
        return np.full(np.shape(z), float(self.alpha))


@dataclass(frozen=True)
class PerturbedWeight(WeightModel):
    """phi(z) = alpha |z|^2 + beta cos(Re z).

    ``Delta phi = alpha - (beta/4) cos(Re z)``; every ``d^k`` derivative of
    a function of ``Re z`` alone is ``2^{-k}`` times its k-th x-derivative.
    """

    alpha: float
    beta: float
    order: int = DEFAULT_ORDER
    bandwidth: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not abs(self.beta) / 4 < self.alpha:
            raise DomainError(f"|beta|/4 must be below alpha (got alpha={self.alpha}, beta={self.beta})")

    @property
    def lower(self):
        return self.alpha - abs(self.beta) / 4

    @property
    def upper(self):
        return self.alpha + abs(self.beta) / 4

    def value(self, z):
        z = np.asarray(z)
        return self.alpha * (z.real**2 + z.imag**2) + self.beta * np.cos(z.real)

    def _deriv(self, z, k):
        out = self.beta * 0.5**k * np.cos(z.real + k * np.pi / 2) + 0j
        if k == 1:
            out = out + self.alpha * np.conj(z)
        return out

    def laplacian(self, z):
        z = np.asarray(z)
        return self.alpha - 0.25 * self.beta * np.cos(z.real)


@dataclass(frozen=True)
class MollifiedWeight(WeightModel):
    """Disk average of ``base`` over ``B(z, radius)``.

    Derivatives commute with the convolution, so every query is the disk
    average of the corresponding query on ``base``.
    """

    base: WeightModel
    radius: float
    n_radial: int = DEFAULT_RADIAL
    n_angular: int = DEFAULT_ANGULAR
    order: int = field(default=-1)

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"mollifier radius must be positive, got {self.radius}")
        if self.order < 0:
            object.__setattr__(self, "order", self.base.order)
        elif self.order > self.base.order:
            raise DomainError("mollified weight cannot exceed the smoothness of its base")

    @property
    def lower(self):
        return self.base.lower

    @property
    def upper(self):
        return self.base.upper

    @property
    def bandwidth(self):
        return self.base.bandwidth

    def _avg(self, func, z):
        out = disk_average(func, z, self.radius, self.n_radial, self.n_angular)
        if not np.all(np.isfinite(out)):
            raise NumericError("mollifier quadrature produced non-finite values")
        return out

    def value(self, z):
        return self._avg(self.base.value, z).real

    def _deriv(self, z, k):
        return self._avg(lambda w: self.base.holo_deriv(w, k), z)

    def laplacian(self, z):
        return self._avg(self.base.laplacian, z).real


def classical_weight(alpha: float, order: int = DEFAULT_ORDER) -> ClassicalWeight:
    return ClassicalWeight(float(alpha), order)


def perturbed_weight(alpha: float, beta: float, order: int = DEFAULT_ORDER) -> PerturbedWeight:
    return PerturbedWeight(float(alpha), float(beta), order)


def mollify(base: WeightModel, radius: float, n_radial: int = DEFAULT_RADIAL,
            n_angular: int = DEFAULT_ANGULAR) -> MollifiedWeight:
    return MollifiedWeight(base, float(radius), n_radial, n_angular)


def weight_gap_check(base: WeightModel, tilde: WeightModel, order: int, grid) -> np.ndarray:
    """Per-order maxima ``max_grid |d^j (phi - phi_tilde)|`` for ``j = 0..order``."""
    if order > min(base.order, tilde.order):
        raise DomainError(f"order {order} exceeds weight smoothness")
    grid = np.asarray(grid, dtype=complex).ravel()
    gaps = np.empty(order + 1)
    for j in range(order + 1):
        diff = base.holo_deriv(grid, j) - tilde.holo_deriv(grid, j)
        gaps[j] = np.max(np.abs(diff))
    return gaps


def weight_from_config(kind: str = "classical", alpha: float = np.pi, beta: float = 0.0,
                       mollify_radius: float | None = None, order: int = DEFAULT_ORDER) -> WeightModel:
    """Build a weight from the flat config keys ``weight, alpha, beta, mollify_radius``."""
    if kind == "classical":
        return classical_weight(alpha, order)
    if kind == "perturbed":
        return perturbed_weight(alpha, beta, order)
    if kind == "mollified":
        if mollify_radius is None:
            raise DomainError("mollified weight needs mollify_radius")
        base = perturbed_weight(alpha, beta, order) if beta else classical_weight(alpha, order)
        return mollify(base, mollify_radius)
    raise DomainError(f"unknown weight kind {kind!r}")
