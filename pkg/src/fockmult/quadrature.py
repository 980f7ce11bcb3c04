"""Tensor quadrature on disks: Gauss-Legendre in radius, uniform in angle."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

DEFAULT_RADIAL = 64
DEFAULT_ANGULAR = 64


@lru_cache(maxsize=64)
def _gauss_legendre01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def unit_disk_rule(n_radial: int = DEFAULT_RADIAL, n_angular: int = DEFAULT_ANGULAR):
    """Nodes ``u`` and weights ``w`` with ``sum(w * g(u)) ~ integral of g over B(0,1)``.

    Weights include the polar Jacobian and sum to pi exactly.
    """
    rho, wr = _gauss_legendre01(n_radial)
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    nodes = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = ((wr * rho)[:, None] * np.full(n_angular, 2 * np.pi / n_angular)[None, :]).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def disk_rule(center, radius: float, n_radial=DEFAULT_RADIAL, n_angular=DEFAULT_ANGULAR):
    """Nodes and weights for ``B(center, radius)``.

    ``center`` may be an array; nodes then have shape ``center.shape + (q,)``.
    """
    u, w = unit_disk_rule(int(n_radial), int(n_angular))
    c = np.asarray(center, dtype=complex)
    return c[..., None] + radius * u, radius**2 * w


def disk_average(func, center, radius: float, n_radial=DEFAULT_RADIAL, n_angular=DEFAULT_ANGULAR):
    """Average of ``func`` over ``B(center, radius)``, vectorised over ``center``."""
    nodes, w = disk_rule(center, radius, n_radial, n_angular)
    vals = func(nodes)
    return np.sum(vals * w, axis=-1) / (np.pi * radius**2)


def disk_integral(func, center, radius: float, n_radial=DEFAULT_RADIAL, n_angular=DEFAULT_ANGULAR):
    nodes, w = disk_rule(center, radius, n_radial, n_angular)
    return np.sum(func(nodes) * w, axis=-1)


def resolution_for(radius: float, bandwidth: float, base: int = DEFAULT_RADIAL) -> tuple[int, int]:
    """Radial/angular node counts for an integrand oscillating at ``bandwidth``.

    Keeps at least ``base`` nodes and adds enough to resolve ``radius * bandwidth``
    oscillations across the disk.
    """
    extra = int(np.ceil(radius * bandwidth))
    return max(base, extra + 32), max(base, 2 * extra + 32)
