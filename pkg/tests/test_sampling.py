from dataclasses import dataclass

import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import quad

from fockmult.errors import DomainError, NumericError
from fockmult.geometry import MultiSet, square_lattice
from fockmult.operator import EntireFunction, dbar_star
from fockmult.sampling import (default_radius, evaluation_matrix, frame_bounds, gram_matrix, monomial_scales,
                               norm_rule, phase_scan, tail_radius)
from fockmult.weights import ClassicalWeight, classical_weight, perturbed_weight


def test_evaluation_matrix_examples():
    w = classical_weight(1.0)
    E = evaluation_matrix(MultiSet.from_points([0]), w, 4)
    assert np.allclose(E, [[1, 0, 0, 0, 0]])
    E = evaluation_matrix(MultiSet.from_points([0], [2]), w, 4)
    assert np.allclose(E, [[1, 0, 0, 0, 0], [0, -1, 0, 0, 0]])
    assert evaluation_matrix(MultiSet.empty(), w, 3).shape == (0, 4)
    with pytest.raises(DomainError):
        evaluation_matrix(MultiSet.from_points([0], [4]), classical_weight(1.0, order=2), 3)


def test_evaluation_matrix_matches_operator(rng):
    w = perturbed_weight(np.pi, 1.0)
    ms = MultiSet.from_points(rng.normal(size=4) + 1j * rng.normal(size=4), [1, 3, 2, 1])
    E = evaluation_matrix(ms, w, 5)
    for r, (i, j) in enumerate(ms.rows()):
        lam = ms.points[i]
        for k in range(6):
            want = np.exp(-w(lam) / 2) * dbar_star(EntireFunction.monomial(k), w, lam, j)
            assert E[r, k] == pytest.approx(want, rel=1e-10, abs=1e-14)


def test_evaluation_matrix_scales(rng):
    w = classical_weight(2.0)
    ms = MultiSet.from_points([0.3 + 0.2j, -1], [2, 1])
    scales = rng.uniform(0.5, 2.0, size=6)
    assert np.allclose(evaluation_matrix(ms, w, 5, scales), evaluation_matrix(ms, w, 5) / scales)


def test_gram_matrix_examples():
    w = classical_weight(1.0)
    G = gram_matrix(4, w, 12.0)
    assert G[0, 0] == pytest.approx(np.pi, rel=1e-10)
    assert G[1, 1] == pytest.approx(np.pi, rel=1e-10)
    assert G[2, 2] == pytest.approx(2 * np.pi, rel=1e-10)
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() < 1e-10
    Gn = gram_matrix(4, w, 12.0, normalized=True)
    assert np.allclose(np.diag(Gn), 1)
    with pytest.raises(DomainError):
        gram_matrix(4, w, 0)


def test_gram_truncated_disk_oracle():
    w = classical_weight(1.0)
    R = 1.5
    G = gram_matrix(3, w, R)
    for k in range(4):
        want = quad(lambda r: 2 * np.pi * r ** (2 * k + 1) * np.exp(-r * r), 0, R)[0]
        assert G[k, k] == pytest.approx(want, rel=1e-10)


def test_gram_perturbed_hermitian_pd():
    G = gram_matrix(8, perturbed_weight(1.0, 1.0), 7.0)
    assert np.allclose(G, G.conj().T)
    assert np.linalg.eigvalsh(G)[0] > 0


@dataclass(frozen=True)
class _BrokenWeight(ClassicalWeight):
    def value(self, z):
        return np.where(np.abs(z) > 1, np.nan, super().value(z))


def test_numeric_error_path():
    with pytest.raises(NumericError):
        gram_matrix(4, _BrokenWeight(1.0), 3.0)
    with pytest.raises(NumericError):
        frame_bounds(MultiSet.from_points([0.5]), _BrokenWeight(1.0), 4, 3.0)


def test_radius_helpers():
    from scipy.special import gammaincc
    R = tail_radius(20, 2.0)
    assert gammaincc(21, 2.0 * R**2) == pytest.approx(1e-8, rel=1e-6)
    assert default_radius(20, classical_weight(2.0)) == pytest.approx(R)
    nodes, logw = norm_rule(5, 3.0, classical_weight(1.0))
    assert nodes.shape == logw.shape
    s = monomial_scales(3, classical_weight(1.0), 12.0)
    assert np.allclose(s**2, np.pi * np.array([1, 1, 2, 6]), rtol=1e-10)


def test_frame_bounds_empty_and_dense_grid():
    w = classical_weight(1.0)
    rep = frame_bounds(MultiSet.empty(), w, 10)
    assert rep.A == rep.B == 0
    grid = square_lattice(0.2, radius=6.0)
    rep = frame_bounds(grid, w, 15, R=8.0)
    # Riemann sum: sum |f|^2 e^{-phi} * 0.04 ~ ||f||^2
    assert rep.A > 0
    assert rep.A * 0.04 == pytest.approx(1.0, rel=0.05)
    assert rep.B * 0.04 == pytest.approx(1.0, rel=0.05)
    assert 0 <= rep.A <= rep.B


def test_doubled_rows_double_bounds():
    w = classical_weight(np.pi)
    ms = square_lattice(0.7, radius=3.0)
    N, R = 10, 6.0
    rep = frame_bounds(ms, w, N, R)
    E = evaluation_matrix(ms, w, N)
    E2 = np.vstack([E, E])
    G = gram_matrix(N, w, R)
    ev = scipy.linalg.eigh(E2.conj().T @ E2, G, eigvals_only=True)
    assert ev[-1] == pytest.approx(2 * rep.B, rel=1e-8)
    assert ev[0] == pytest.approx(2 * rep.A, rel=1e-6, abs=1e-12)


def test_second_degree_consistency_and_B_growth():
    w = classical_weight(np.pi)
    ms = square_lattice(0.8, radius=5.0)
    R = 7.0
    rep = frame_bounds(ms, w, 15, R, N2=25)
    assert rep.N2 == 25 and rep.stable is not None
    assert rep.B2 <= 2 * rep.B
    d = rep.to_dict()
    assert set(d) >= {"N", "R", "A", "B", "stable"}
    with pytest.raises(DomainError):
        frame_bounds(ms, w, -1)


def test_monotonicity_under_removal_and_multiplicity(rng):
    w = classical_weight(np.pi)
    ms = square_lattice(0.9, radius=4.0)
    N, R = 12, 6.0
    A_full = frame_bounds(ms, w, N, R).A
    keep = rng.permutation(len(ms))[: len(ms) - 5]
    sub = MultiSet(ms.points[keep], ms.mult[keep])
    assert frame_bounds(sub, w, N, R).A <= A_full * (1 + 1e-9) + 1e-12
    mult = ms.mult.copy()
    mult[::3] = 2
    assert frame_bounds(ms.with_mult(mult), w, N, R).A >= A_full * (1 - 1e-9)


def test_phase_scan_examples():
    res = phase_scan([0.8, 1.3], Ns=(15, 25))
    rows = {(r["s"], r["N"]): r for r in res.rows}
    assert rows[(0.8, 15)]["density"] == pytest.approx(1 / (np.pi * 0.64), rel=0.05)
    for N in (15, 25):
        assert rows[(0.8, N)]["A"] / rows[(0.8, N)]["B"] > 0.3
    assert rows[(1.3, 25)]["A"] / rows[(1.3, 25)]["B"] < 0.01
    assert res.intervals[25] == (0.8, 1.3)
    single = phase_scan([1.0], Ns=(10,))
    assert len(single.rows) == 1 and len(single.to_csv_rows()) == 1
    with pytest.raises(DomainError):
        phase_scan([1.0, 0.9])
    with pytest.raises(DomainError):
        phase_scan([])


def test_phase_ordering():
    s = [0.8, 0.9, 1.0, 1.1, 1.2]
    res = phase_scan(s, Ns=(15,), workers=2)
    ratio = [r["A"] / r["B"] for r in res.rows]
    for a, b in zip(ratio, ratio[1:]):
        assert b <= a * 1.05 + 1e-12
