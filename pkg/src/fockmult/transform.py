"""Multiplicity reduction: satellite points, coefficient lifting and the estimates behind them.

Each point of top multiplicity ``n + 1`` loses one order and gains a
satellite at distance ``eps`` carrying a single value. Coefficients move
between the two sets through Taylor expansion of ``F = f e^{-H}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .bell import complete_bell_sequence
from .errors import DomainError
from .geometry import (MultiSet, ScanGrid, density_profile, separation, window_delta)
from .interp import InterpolationData, global_interpolate_ls
from .operator import EntireFunction, dbar_star_all, series_exp
from .potential import DiskDecomposition, riesz_decompose
from .quadrature import disk_integral
from .sampling import frame_bounds
from .weights import WeightModel

__all__ = [
    "ReductionPlan",
    "reduce_set",
    "b_lambda",
    "lift_sequence",
    "taylor_residual",
    "perturbation_inequality_check",
    "correction_rounds",
    "density_match",
    "preservation_report",
]


@dataclass(frozen=True, eq=False)
class ReductionPlan:
    """``reduced`` lists the original points first (same indices), then the satellites.

    ``pairing[p] = (i, s)``: original index ``i`` and satellite index ``s``
    in ``reduced``.
    """

    original: MultiSet
    epsilon: float
    directions: np.ndarray
    reduced: MultiSet
    pairing: tuple
    top_order: int

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "n_satellites": len(self.pairing),
            "top_order": self.top_order,
            "mass_original": self.original.mass,
            "mass_reduced": self.reduced.mass,
            "separation_reduced": separation(self.reduced),
        }


def _directions(ms: MultiSet, idx, rule: str, direction: complex, seed):
    if rule == "fixed":
        if direction == 0:
            raise DomainError("fixed direction must be nonzero")
        return np.full(idx.size, complex(direction) / abs(direction))
    if rule == "radial":
        p = ms.points[idx]
        out = np.ones(idx.size, dtype=complex)
        nz = np.abs(p) > 0
        out[nz] = p[nz] / np.abs(p[nz])
        return out
    if rule == "random":
        rng = np.random.default_rng(seed)
        return np.exp(2j * np.pi * rng.uniform(size=idx.size))
    raise DomainError(f"unknown direction rule {rule!r}")


def reduce_set(ms: MultiSet, eps: float | None = None, rule: str = "fixed", direction: complex = 1,
               seed: int | None = None) -> ReductionPlan:
    """Lower the top multiplicity by one, adding one satellite per top point.

    ``eps`` must lie in ``(0, min(rho/2, 1/4))`` with ``rho`` the separation;
    the default is a tenth of that bound.
    """
    top = ms.n_max
    if top < 2:
        raise DomainError("nothing to reduce: all multiplicities are 1")
    rho = separation(ms)
    cap = min(rho / 2, 0.25)
    if eps is None:
        eps = 0.1 * cap
    if not 0 < eps < cap:
        raise DomainError(f"eps={eps} outside (0, {cap:.6g}) = (0, min(rho/2, 1/4))")
    idx = np.nonzero(ms.mult == top)[0]
    u = _directions(ms, idx, rule, direction, seed)
    sat = ms.points[idx] + eps * u
    mult = ms.mult.copy()
    mult[idx] = top - 1
    reduced = MultiSet(np.concatenate([ms.points, sat]), np.concatenate([mult, np.ones(idx.size, int)]))
    if separation(reduced) < eps * (1 - 1e-9):
        raise DomainError("reduced set is not eps-separated")
    n0 = len(ms)
    pairing = tuple((int(i), n0 + p) for p, i in enumerate(idx))
    return ReductionPlan(ms, float(eps), u, reduced, pairing, top - 1)


def b_lambda(values, prime_value: complex, lam: complex, lam_prime: complex, dec: DiskDecomposition,
             weight: WeightModel | None = None) -> complex:
    """Top-order target at ``lam`` that makes the degree-``n`` Taylor value of ``f e^{-H}`` hit the satellite.

    ``values`` are the lower-order targets ``a_(lam, j)``, ``j < n``, and
    ``prime_value`` the satellite target ``a_(lam', 0)``.
    """
    values = np.atleast_1d(np.asarray(values, dtype=complex))
    n = values.size
    if n < 1:
        raise DomainError("need at least one lower-order target")
    if n > dec.order:
        raise DomainError(f"decomposition order {dec.order} below required {n}")
    if abs(complex(lam) - dec.center) > 1e-12 * (1 + abs(dec.center)):
        raise DomainError("lam must be the center of the decomposition")
    d = complex(lam_prime) - complex(lam)
    if d == 0:
        raise DomainError("lam_prime must differ from lam")
    Bg = complete_bell_sequence(n, dec.potential_jet(n))
    eH = np.exp(-complex(dec.H(lam)))
    eHp = np.exp(-complex(dec.H(lam_prime)))
    inner = complex(prime_value) * eHp
    for k in range(n):
        for j in range(k + 1):
            inner -= (-1) ** j * comb(k, j) / factorial(k) * values[j] * Bg[k - j] * eH * d**k
    rhs = factorial(n) / d**n * inner
    rhs -= sum((-1) ** j * comb(n, j) * values[j] * Bg[n - j] * eH for j in range(n))
    return complex(rhs / ((-1) ** n * eH))


def lift_sequence(plan: ReductionPlan, data: InterpolationData, weight: WeightModel,
                  radius: float = 1.0) -> tuple[InterpolationData, dict]:
    """Data on the original set: reduced-set targets plus ``b_lambda`` in each top slot."""
    if data.set is not plan.reduced and not (
            len(data.set) == len(plan.reduced)
            and np.array_equal(data.set.points, plan.reduced.points)
            and np.array_equal(data.set.mult, plan.reduced.mult)):
        raise DomainError("data must be keyed by the reduced set of the plan")
    n = plan.top_order
    out = {}
    n0 = len(plan.original)
    for (i, j), v in data.values.items():
        if i < n0:
            out[(i, j)] = v
    for i, s in plan.pairing:
        lam = plan.original.points[i]
        dec = riesz_decompose(weight, lam, radius, order=n)
        out[(i, n)] = b_lambda(data.at(i)[:n], data.values.get((s, 0), 0j), lam, plan.reduced.points[s], dec, weight)
    lifted = InterpolationData(plan.original, out)
    nt, na = data.norm(weight), lifted.norm(weight)
    return lifted, {
        "norm_reduced": nt,
        "norm_lifted": na,
        "ratio": na / nt if nt > 0 else 0.0,
        "ratio_scaled": (na / nt) * plan.epsilon**n if nt > 0 else 0.0,
    }


def _feh_taylor(f: EntireFunction, dec: DiskDecomposition, n: int) -> np.ndarray:
    tf = f.taylor(dec.center, n)
    te = series_exp(-np.asarray(dec.holo_coeffs[:n + 1]), n)
    return np.convolve(tf, te)[:n + 1]


def taylor_residual(f: EntireFunction, dec: DiskDecomposition, lam: complex, lam_prime: complex,
                    n: int, bound_radius: float = 1.0) -> dict:
    """``|F(lam') - T_n F(lam')|`` for ``F = f e^{-H}`` and the comparison value
    ``eps^{n+1} integral_{B(lam, r)} |F| dA`` with ``r = min(bound_radius, dec.radius)``.
    """
    if abs(complex(lam) - dec.center) > 1e-12 * (1 + abs(dec.center)):
        raise DomainError("lam must be the center of the decomposition")
    d = complex(lam_prime) - complex(lam)
    coeffs = _feh_taylor(f, dec, n)
    approx = np.polynomial.polynomial.polyval(d, coeffs)
    exact = complex(f(lam_prime) * np.exp(-dec.H(lam_prime)))
    r = min(bound_radius, dec.radius)
    mass = float(np.real(disk_integral(lambda z: np.abs(f(z) * np.exp(-dec.H(z))), complex(lam), r)))
    return {"residual": abs(exact - approx), "bound": abs(d) ** (n + 1) * mass, "eps": abs(d), "n": n}


def perturbation_inequality_check(f: EntireFunction, weight: WeightModel, lam: complex, lam_prime: complex,
                                  n: int = 1) -> dict:
    """Both sides of the top-order perturbation estimate.

    ``constant`` is the smallest ``C`` with
    ``lhs <= C (sat + low) + eps * local_norm``.
    """
    eps = abs(complex(lam_prime) - complex(lam))
    if not 0 < eps < 0.25:
        raise DomainError(f"|lam' - lam| = {eps} must lie in (0, 1/4)")
    phi = float(weight.value(lam))
    ds = dbar_star_all(f, weight, complex(lam), n)
    lhs = abs(complex(ds[n])) ** 2 * np.exp(-phi)
    low = sum(abs(complex(v)) ** 2 for v in ds[:n]) * np.exp(-phi)
    sat = abs(complex(f(lam_prime))) ** 2 * np.exp(-float(weight.value(lam_prime)))
    local = float(np.real(disk_integral(lambda z: np.abs(f(z)) ** 2 * np.exp(-weight.value(z)), complex(lam), 1.0)))
    excess = max(0.0, lhs - eps * local)
    denom = sat + low
    if excess == 0:
        const = 0.0
    else:
        const = excess / denom if denom > 0 else float("inf")
    return {"lhs": lhs, "satellite": sat, "lower_orders": low, "local_norm": local, "eps": eps,
            "constant": const, "ratio": lhs / (denom + eps * local) if denom + eps * local > 0 else 0.0}


@dataclass
class CorrectionReport:
    residual_norms: list = field(default_factory=list)
    factors: list = field(default_factory=list)
    data_norm: float = 0.0
    lift_ratio: float = 0.0

    def to_dict(self):
        return {"residual_norms": self.residual_norms, "factors": self.factors,
                "data_norm": self.data_norm, "lift_ratio": self.lift_ratio}


def correction_rounds(plan: ReductionPlan, data: InterpolationData, weight: WeightModel, N: int,
                      R: float | None = None, rounds: int = 1) -> CorrectionReport:
    """Finite version of the iterative correction on the satellites.

    Round ``k`` lifts the current targets, solves the lifted problem on the
    original set by least squares and measures the satellite misfit
    ``||f_k - a^(k)||`` on the satellites; that misfit becomes the next
    round's satellite data (lower-order targets set to zero).
    """
    rep = CorrectionReport(data_norm=data.norm(weight))
    cur = data
    sats = [s for _, s in plan.pairing]
    phi_s = np.asarray(weight.value(plan.reduced.points[sats])) if sats else np.zeros(0)
    for _ in range(rounds):
        lifted, info = lift_sequence(plan, cur, weight)
        if not rep.residual_norms:
            rep.lift_ratio = info["ratio"]
        sol = global_interpolate_ls(lifted, weight, N, R)
        p = EntireFunction.polynomial(sol.coeffs)
        target = np.array([cur.values.get((s, 0), 0j) for s in sats])
        miss = p(plan.reduced.points[sats]) - target
        rnorm = float(np.sqrt(np.sum(np.abs(miss) ** 2 * np.exp(-phi_s))))
        cnorm = cur.norm(weight)
        rep.residual_norms.append(rnorm)
        rep.factors.append(rnorm / cnorm if cnorm > 0 else 0.0)
        cur = InterpolationData(plan.reduced, {(s, 0): -m for s, m in zip(sats, miss)})
    return rep


def density_match(original: MultiSet, reduced: MultiSet, weight: WeightModel, radii, eps: float,
                  scan: ScanGrid | None = None) -> dict:
    """Compare finite-radius profiles of two sets over the same scan centers.

    The allowed gap at radius ``r`` is ``window_delta(weight, r, eps)`` times
    the larger profile value.
    """
    scan = scan or ScanGrid()
    out = {"radii": [], "orig_lower": [], "red_lower": [], "orig_upper": [], "red_upper": [],
           "allowed": [], "ok": True}
    for r in np.atleast_1d(radii):
        grid = ScanGrid("explicit", centers=tuple(scan.centers_for(original, float(r))))
        po = density_profile(original, weight, [r], grid)
        pr = density_profile(reduced, weight, [r], grid)
        tol = window_delta(weight, float(r), eps)
        lo_o, lo_r, up_o, up_r = po.lower[0], pr.lower[0], po.upper[0], pr.upper[0]
        ok = abs(lo_o - lo_r) <= tol * max(lo_o, lo_r) and abs(up_o - up_r) <= tol * max(up_o, up_r)
        for key, v in zip(("radii", "orig_lower", "red_lower", "orig_upper", "red_upper", "allowed"),
                          (float(r), lo_o, lo_r, up_o, up_r, tol)):
            out[key].append(float(v))
        out["ok"] = bool(out["ok"] and ok)
    return out


def preservation_report(plan: ReductionPlan, weight: WeightModel, radii, N: int = 20,
                        R: float | None = None) -> dict:
    """Density match and the finite-section lower-bound ratio ``A_N(reduced) / A_N(original)``."""
    dm = density_match(plan.original, plan.reduced, weight, radii, plan.epsilon)
    fo = frame_bounds(plan.original, weight, N, R)
    fr = frame_bounds(plan.reduced, weight, N, fo.R)
    return {
        "mass_original": plan.original.mass,
        "mass_reduced": plan.reduced.mass,
        "density_match": dm,
        "A_original": fo.A,
        "A_reduced": fr.A,
        "A_ratio": fr.A / fo.A if fo.A > 0 else None,
        "B_original": fo.B,
        "B_reduced": fr.B,
        "N": N,
        "R": fo.R,
    }
