import itertools
from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockmult.bell import (bell_terms, complete_bell, complete_bell_sequence, exp_derivative_factor,
                           partial_bell)
from fockmult.errors import DomainError


def brute_partial(n, k, x):
    """Sum over all multi-indices (m_1..m_{n-k+1}) with sum m = k and sum i*m_i = n."""
    if n == 0 and k == 0:
        return 1
    width = n - k + 1
    total = 0
    for ms in itertools.product(range(k + 1), repeat=width):
        if sum(ms) != k or sum((i + 1) * m for i, m in enumerate(ms)) != n:
            continue
        term = factorial(n)
        for i, m in enumerate(ms):
            term = term * x[i] ** m / (factorial(m) * factorial(i + 1) ** m)
        total += term
    return total


def rand_jet(rng, n):
    return list(rng.normal(size=n) + 1j * rng.normal(size=n))


def test_examples():
    assert partial_bell(0, 0, []) == 1
    assert partial_bell(1, 1, [2.5]) == 2.5
    x = [1.3 - 0.2j, 0.7 + 2j]
    assert partial_bell(3, 2, x) == pytest.approx(3 * x[0] * x[1], rel=1e-15)
    assert complete_bell(0, []) == 1
    assert complete_bell(2, x) == pytest.approx(x[0] ** 2 + x[1], rel=1e-15)
    assert complete_bell(4, [0, 0, 0, 0]) == 0
    assert partial_bell(4, 0, [1, 2, 3, 4, 5]) == 0


def test_exp_derivative_factor_against_finite_differences():
    a, b = 0.7, -0.4
    r = lambda t: a * t + 0.5 * b * t**2
    h = 1e-4
    d2 = (np.exp(r(h)) - 2 * np.exp(r(0)) + np.exp(r(-h))) / h**2
    assert exp_derivative_factor(1, [a]) == a
    assert exp_derivative_factor(2, [a, b]) == pytest.approx(a * a + b)
    assert exp_derivative_factor(2, [a, b]) == pytest.approx(d2, rel=1e-6)
    assert exp_derivative_factor(3, [a, 0, 0]) == pytest.approx(a**3)


def test_exact_coefficients_are_integers():
    for n in range(1, 9):
        for k in range(1, n + 1):
            for exps, coef in bell_terms(n, k):
                assert isinstance(coef, int)
                assert sum(exps) == k
                assert sum((i + 1) * m for i, m in enumerate(exps)) == n
    # B_{n,k}(1,1,...) are the Stirling numbers of the second kind
    assert sum(c for _, c in bell_terms(6, 3)) == 90


def test_invalid_orders():
    with pytest.raises(DomainError):
        partial_bell(2, 3, [1, 2])
    with pytest.raises(DomainError):
        complete_bell(-1, [])
    with pytest.raises(DomainError):
        complete_bell(3, [1, 2])


def test_partial_matches_partition_oracle_exactly(rng):
    for n in range(0, 7):
        for k in range(0, n + 1):
            x = [int(v) for v in rng.integers(-5, 6, size=max(n - k + 1, 1))]
            got = partial_bell(n, k, x)
            want = brute_partial(n, k, x) if (n, k) != (0, 0) else 1
            if n > 0 and k == 0:
                want = 0
            assert got == pytest.approx(want, abs=0, rel=1e-15)


def test_sequence_matches_definition(rng):
    for n in range(0, 9):
        x = rand_jet(rng, max(n, 1))
        seq = complete_bell_sequence(n, x[:n])
        for i in range(n + 1):
            assert seq[i] == pytest.approx(complete_bell(i, x[:i]), rel=1e-12)


def test_sequence_is_array_aware(rng):
    xs = [rng.normal(size=4) + 1j * rng.normal(size=4) for _ in range(3)]
    seq = complete_bell_sequence(3, xs)
    for p in range(4):
        assert seq[3][p] == pytest.approx(complete_bell(3, [x[p] for x in xs]), rel=1e-12)


jets = st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=8, max_size=8)


@given(jets, jets, st.integers(0, 8))
def test_binomial_identity(x, y, n):
    lhs = complete_bell(n, [a + b for a, b in zip(x, y)])
    rhs = sum(comb(n, i) * complete_bell(n - i, x) * complete_bell(i, y) for i in range(n + 1))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(rhs))


@given(jets, st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       st.integers(1, 7), st.data())
def test_homogeneity(x, t, n, data):
    k = data.draw(st.integers(1, n))
    lhs = partial_bell(n, k, [t * v for v in x])
    rhs = t**k * partial_bell(n, k, x)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
