import numpy as np
import pytest

from conftest import wirtinger_fd
from fockmult.errors import DomainError
from fockmult.geometry import MultiSet, ScanGrid, separation, square_lattice
from fockmult.interp import InterpolationData, build_local_interpolant
from fockmult.operator import EntireFunction
from fockmult.potential import riesz_decompose
from fockmult.transform import (b_lambda, correction_rounds, density_match, lift_sequence,
                                perturbation_inequality_check, preservation_report, reduce_set, taylor_residual)
from fockmult.weights import classical_weight, perturbed_weight


def random_data(rng, ms):
    return InterpolationData(ms, {rc: complex(*rng.normal(size=2)) for rc in ms.rows()})


def test_reduce_single_point():
    plan = reduce_set(MultiSet.from_points([0], [2]), 0.1)
    assert np.allclose(plan.reduced.points, [0, 0.1])
    assert list(plan.reduced.mult) == [1, 1]
    assert plan.pairing == ((0, 1),)
    assert plan.top_order == 1


def test_reduce_lattice():
    ms = square_lattice(2.0, half_width=4.0, mult=3)
    plan = reduce_set(ms, 0.2)
    red = plan.reduced
    assert len(red) == 2 * len(ms)
    assert red.n_max == 2
    assert set(red.mult[:len(ms)]) == {2} and set(red.mult[len(ms):]) == {1}
    assert separation(red) >= 0.2 * (1 - 1e-12)
    for i, s in plan.pairing:
        assert abs(red.points[s] - ms.points[i]) == pytest.approx(0.2, abs=1e-14)
        assert ms.index_of(red.points[s]) is None
    assert red.mass == ms.mass
    assert plan.to_dict()["n_satellites"] == len(ms)


def test_reduce_mixed_and_rules():
    ms = MultiSet.from_points([0, 1, 2j, 1 + 1j], [2, 1, 2, 1])
    plan = reduce_set(ms)
    assert [i for i, _ in plan.pairing] == [0, 2]
    assert plan.epsilon == pytest.approx(0.1 * 0.25)
    assert plan.reduced.mass == ms.mass
    r = reduce_set(ms, 0.1, rule="radial")
    assert r.reduced.points[-1] == pytest.approx(2.1j)
    a = reduce_set(ms, 0.1, rule="random", seed=3)
    b = reduce_set(ms, 0.1, rule="random", seed=3)
    assert np.array_equal(a.reduced.points, b.reduced.points)
    assert np.allclose(np.abs(a.directions), 1)


def test_reduce_errors():
    with pytest.raises(DomainError):
        reduce_set(square_lattice(1.0, half_width=2.0))
    ms = MultiSet.from_points([0, 0.3], [2, 2])
    with pytest.raises(DomainError):
        reduce_set(ms, 0.2)
    with pytest.raises(DomainError):
        reduce_set(ms, 0.0)
    with pytest.raises(DomainError):
        reduce_set(ms, 0.1, rule="spiral")
    with pytest.raises(DomainError):
        reduce_set(ms, 0.1, direction=0)


def test_b_lambda_zero_and_errors():
    w = classical_weight(1.0)
    dec = riesz_decompose(w, 0.5, 1.0, 2)
    assert b_lambda([0, 0], 0, 0.5, 0.6, dec, w) == 0
    with pytest.raises(DomainError):
        b_lambda([1, 1, 1], 0, 0.5, 0.6, dec, w)
    with pytest.raises(DomainError):
        b_lambda([1], 0, 0.5, 0.5, dec, w)
    with pytest.raises(DomainError):
        b_lambda([1], 0, 0.4, 0.5, dec, w)


@pytest.mark.parametrize("weight", [classical_weight(1.0), perturbed_weight(1.0, 1.0)])
def test_b_lambda_first_order_linear_solve(weight):
    # the first-order Taylor value of f e^{-H} at lam' is affine in the top target b; solve for it
    lam, eps = 0.4 + 0.3j, 0.1
    lp = lam + eps * np.exp(1j)
    dec = riesz_decompose(weight, lam, 1.0, 1)
    a0, ap = 1 + 0.5j, -0.3 + 1j

    def taylor_value(b):
        f, _ = build_local_interpolant(lam, 0.5, [a0, b], weight).as_entire()
        F = lambda z: f(z) * np.exp(-dec.H(z))
        return F(lam) + (lp - lam) * wirtinger_fd(F, lam, 1e-4)

    t0, t1 = taylor_value(0), taylor_value(1)
    want = (ap * np.exp(-dec.H(lp)) - t0) / (t1 - t0)
    assert b_lambda([a0], ap, lam, lp, dec, weight) == pytest.approx(want, rel=1e-8)


@pytest.mark.parametrize("n", [1, 2])
def test_b_lambda_growth_constant(n, rng):
    w = classical_weight(1.0)
    eps = 0.1
    K = []
    for _ in range(50):
        lam = complex(*rng.uniform(-3, 3, 2))
        lp = lam + eps * np.exp(2j * np.pi * rng.uniform())
        dec = riesz_decompose(w, lam, 1.0, n)
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        ap = complex(*rng.normal(size=2))
        b = b_lambda(a, ap, lam, lp, dec, w)
        lhs = abs(b) ** 2 * np.exp(-w(lam))
        rhs = eps ** (-2 * n) * (abs(ap) ** 2 * np.exp(-w(lp)) + np.sum(np.abs(a) ** 2) * np.exp(-w(lam)))
        K.append(lhs / rhs)
    assert np.all(np.isfinite(K))
    assert max(K) < 20


def test_lift_sequence(rng):
    w = classical_weight(1.0)
    plan = reduce_set(MultiSet.from_points([0.5], [2]), 0.1)
    zero = InterpolationData(plan.reduced, {})
    lifted, info = lift_sequence(plan, zero, w)
    assert np.allclose(lifted.vector(), 0) and info["ratio"] == 0
    data = InterpolationData(plan.reduced, {(0, 0): 1 + 1j, (1, 0): 2.0})
    lifted, _ = lift_sequence(plan, data, w)
    dec = riesz_decompose(w, 0.5, 1.0, 1)
    assert lifted.values[(0, 0)] == 1 + 1j
    assert lifted.values[(0, 1)] == pytest.approx(b_lambda([1 + 1j], 2.0, 0.5, 0.6, dec, w))
    with pytest.raises(DomainError):
        lift_sequence(plan, InterpolationData(plan.original, {}), w)


def test_lift_norm_ratio_scaling(rng):
    w = classical_weight(1.0)
    ms = square_lattice(2.0, half_width=4.0, mult=2)
    for eps in (0.1, 0.05):
        plan = reduce_set(ms, eps)
        scaled = [lift_sequence(plan, random_data(rng, plan.reduced), w)[1]["ratio_scaled"] for _ in range(10)]
        assert max(scaled) / min(scaled) < 10
        assert max(scaled) < 5


def test_taylor_residual_examples():
    w = classical_weight(1.0)
    dec = riesz_decompose(w, 0, 1.0, 4)
    f = EntireFunction.polynomial([1, 2, -1j])
    assert taylor_residual(f, dec, 0, 0.1, 2)["residual"] < 1e-13
    zero = EntireFunction.polynomial([0.0])
    assert taylor_residual(zero, dec, 0, 0.1, 1)["residual"] == 0
    with pytest.raises(DomainError):
        taylor_residual(f, dec, 0.1, 0.2, 1)


def test_taylor_residual_scaling(rng):
    w = perturbed_weight(1.0, 1.0)
    lam = 0.3 - 0.2j
    dec = riesz_decompose(w, lam, 1.0, 4)
    f = EntireFunction.polynomial(rng.normal(size=9) + 1j * rng.normal(size=9))
    u = np.exp(0.7j)
    r1 = taylor_residual(f, dec, lam, lam + 0.02 * u, 2)
    r2 = taylor_residual(f, dec, lam, lam + 0.01 * u, 2)
    assert r1["residual"] / r2["residual"] == pytest.approx(8, rel=0.3)
    assert r1["residual"] <= 10 * r1["bound"]


def test_perturbation_inequality():
    w = classical_weight(1.0)
    zero = perturbation_inequality_check(EntireFunction.polynomial([0.0]), w, 0, 0.1)
    assert zero["lhs"] == 0 and zero["constant"] == 0
    one = EntireFunction.polynomial([1.0])
    rep = perturbation_inequality_check(one, w, 0, 0.1)
    assert np.isfinite(rep["lhs"]) and rep["satellite"] + rep["lower_orders"] + rep["local_norm"] > 0
    assert rep["lhs"] <= rep["constant"] * (rep["satellite"] + rep["lower_orders"]) + rep["eps"] * rep["local_norm"] + 1e-15
    with pytest.raises(DomainError):
        perturbation_inequality_check(one, w, 0, 0.3)


def test_perturbation_constant_stable(rng):
    w = classical_weight(1.0)
    one = EntireFunction.polynomial([1.0])
    maxima = []
    for _ in range(2):
        consts = []
        for _ in range(25):
            lam = 3 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
            rep = perturbation_inequality_check(one, w, lam, lam + 0.1 * np.exp(2j * np.pi * rng.uniform()))
            consts.append(rep["constant"])
        assert np.all(np.isfinite(consts))
        maxima.append(max(consts))
    assert max(maxima) / min(maxima) < 4


def test_correction_contraction(rng):
    w = classical_weight(1.0)
    ms = square_lattice(2.0, half_width=2.0, mult=2)
    factors = []
    for eps in (0.1, 0.05, 0.025):
        plan = reduce_set(ms, eps)
        data = random_data(np.random.default_rng(5), plan.reduced)
        rep = correction_rounds(plan, data, w, 30, rounds=2)
        factors.append(rep.factors[0])
        assert len(rep.residual_norms) == 2
    # factor <= eps * K: halving eps halves the factor, within 50%
    for a, b in zip(factors, factors[1:]):
        assert 1 <= a / b <= 3
    assert factors[-1] < 1


def test_mass_and_density_preservation():
    w = classical_weight(np.pi)
    ms = square_lattice(0.6, half_width=12.0, mult=2)
    plan = reduce_set(ms, 0.05)
    assert plan.reduced.mass == ms.mass
    dm = density_match(ms, plan.reduced, w, [4.0, 6.0], 0.05, ScanGrid(step_factor=0.5))
    assert dm["ok"]
    assert len(dm["radii"]) == 2


def test_preservation_report_small():
    w = classical_weight(np.pi)
    plan = reduce_set(square_lattice(0.6, radius=3.0, mult=2), 0.05)
    rep = preservation_report(plan, w, [1.0], N=8, R=5.0)
    assert rep["mass_original"] == rep["mass_reduced"]
    assert rep["A_ratio"] is None or rep["A_ratio"] >= 0
