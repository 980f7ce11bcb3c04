"""Partial and complete exponential Bell polynomials.

Jets are sequences ``(x_1, ..., x_n)``; entries may be Python scalars or
numpy arrays of a common shape, in which case every result broadcasts
elementwise. Coefficients are exact integers.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "bell_terms",
    "partial_bell",
    "complete_bell",
    "complete_bell_sequence",
    "exp_derivative_factor",
]


def _partitions(n: int, k: int, largest: int):
    """Yield partitions of ``n`` into exactly ``k`` parts, each <= ``largest``."""
    if k == 0:
        if n == 0:
            yield ()
        return
    # the largest part must leave room for k-1 parts of size >= 1
    for part in range(min(largest, n - k + 1), 0, -1):
        if part * k < n:
            break
        for rest in _partitions(n - part, k - 1, part):
            yield (part,) + rest


@lru_cache(maxsize=None)
def bell_terms(n: int, k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Monomials of ``B_{n,k}`` as ``(exponents, coefficient)`` pairs.

    ``exponents[i]`` is the power of ``x_{i+1}``; the tuple has length
    ``n - k + 1`` (empty for ``n = k = 0``). The coefficient is
    ``n! / prod(m_i! * (i!)**m_i)``.
    """
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"partial Bell polynomial needs 0 <= k <= n, got n={n}, k={k}")
    if n == 0:
        return (((), 1),)
    width = n - k + 1
    terms = []
    for parts in _partitions(n, k, width):
        exps = [0] * width
        for p in parts:
            exps[p - 1] += 1
        denom = 1
        for i, m in enumerate(exps, start=1):
            denom *= factorial(m) * factorial(i) ** m
        terms.append((tuple(exps), factorial(n) // denom))
    return tuple(terms)


def _check_jet(jet: Sequence, needed: int) -> list:
    jet = list(jet)
    if len(jet) < needed:
        raise DomainError(f"jet of length {len(jet)} is too short, need {needed}")
    return jet


def partial_bell(n: int, k: int, jet: Sequence):
    """Partial exponential Bell polynomial ``B_{n,k}(x_1, ..., x_{n-k+1})``.

    ``B_{0,0} = 1`` and ``B_{n,0} = 0`` for ``n >= 1``.
    """
    terms = bell_terms(n, k)
    if n == 0:
        return 1.0 + 0j
    if k == 0:
        return 0j
    x = _check_jet(jet, n - k + 1)
    total = 0j
    for exps, coef in terms:
        term = coef
        for xi, m in zip(x, exps):
            if m:
                term = term * xi**m
        total = total + term
    return total


def complete_bell(n: int, jet: Sequence):
    """Complete Bell polynomial ``B_n = sum_k B_{n,k}``, with ``B_0 = 1``."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if n == 0:
        return 1.0 + 0j
    _check_jet(jet, n)
    total = 0j
    for k in range(1, n + 1):
        total = total + partial_bell(n, k, jet)
    return total


def complete_bell_sequence(n: int, jet: Sequence) -> list:
    """Return ``[B_0, ..., B_n]`` via ``B_{i+1} = sum_l C(i,l) B_{i-l} x_{l+1}``.

    Same values as :func:`complete_bell` but linear work per entry; this is
    the form the derivative formulas use in hot loops.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    x = _check_jet(jet, n)
    like = np.asarray(x[0]) if n else np.asarray(0.0)
    out = [np.ones_like(like, dtype=complex) if like.ndim else 1.0 + 0j]
    for i in range(n):
        acc = 0j
        for l in range(i + 1):
            acc = acc + comb(i, l) * out[i - l] * x[l]
        out.append(acc)
    return out


def exp_derivative_factor(n: int, jet: Sequence):
    """``d^n e^r / e^r`` given the jet ``(r', ..., r^(n))`` at a point."""
    return complete_bell(n, jet)
