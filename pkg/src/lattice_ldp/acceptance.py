"""
End-to-end acceptance checks
============================

Each ``criterion_N`` function runs one check at a fixed tolerance and returns
a :class:`CriterionResult`. A criterion passes only if every sub-check holds
and it finishes inside its time budget. :func:`run_all` runs them in order;
the ``verify`` CLI command and ``tests/test_acceptance.py`` both use it.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .decompose import embed
from .measures import CompactPoint, SparseMeasure, approximating_sequence, uniform, uniform_box
from .mc import estimate_log_Zt, intersection_functional, stay_probability_check
from .rate import rate_I, rate_I_tilde, sup_representation
from .testfn import metric_D
from .variational import (
    DifferencePotential,
    check_maximizer_properties,
    intersection_rate_curve,
    solve_linear_tilt,
    solve_quadratic_tilt,
)
from .walk import RateKernel, Trajectory, simulate, srw

__all__ = ["CriterionResult", "CRITERIA", "run_all", "format_table", "double_integral_oracle"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    checks: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [k for k, ok in self.checks.items() if not ok]
        extra = f"  failed: {', '.join(failed)}" if failed else ""
        return (f"[{status}] {self.number}. {self.title} "
                f"({self.seconds:.2f}s / {self.budget:g}s){extra}")


def _finish(number, title, budget, t0, checks) -> CriterionResult:
    dt = time.perf_counter() - t0
    checks = dict(checks)
    checks["runtime"] = dt < budget
    return CriterionResult(number, title, all(checks.values()), dt, budget, checks)


SRW1 = srw(1)
SRW2 = srw(2)  # nearest neighbour in d = 2, rate 1/4 per direction


def criterion_1() -> CriterionResult:
    t0 = time.perf_counter()
    checks = {"I(delta_0) == 1 exactly": rate_I(SRW1, SparseMeasure.delta(0)) == 1.0}
    for n in (2, 5, 10, 100):
        checks[f"I(U_{n}) = 1/{n}"] = abs(rate_I(SRW1, uniform(range(n))) - 1 / n) <= 1e-12
    # exact stay probability exp(-rate t) has decay rate equal to I(delta_0)
    for t in (0.5, 3.0, 20.0):
        decay = -math.log(math.exp(-SRW1.total_rate * t)) / t
        checks[f"stay decay rate t={t}"] = abs(decay - rate_I(SRW1, SparseMeasure.delta(0))) <= 1e-12
    return _finish(1, "rate function ground truth", 1.0, t0, checks)


def random_connected_measure(rng: np.random.Generator, kernel: RateKernel, radius: int,
                             max_sites: int = 40) -> SparseMeasure:
    """Random probability measure whose support is kernel-connected inside a box."""
    jumps = list(kernel.jumps)
    sites = {(0,) * kernel.dim}
    target = int(rng.integers(1, max_sites + 1))
    for _ in range(20 * target):
        if len(sites) >= target:
            break
        base = list(sites)[int(rng.integers(len(sites)))]
        z = jumps[int(rng.integers(len(jumps)))]
        y = tuple(a + b for a, b in zip(base, z))
        if max(map(abs, y)) <= radius // 2:
            sites.add(y)
    w = rng.uniform(0.05, 1.0, size=len(sites))
    w /= w.sum()
    return SparseMeasure(dict(zip(sorted(sites), w.tolist())), dim=kernel.dim)


def criterion_2() -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240602)
    checks = {}
    worst_gap = 0.0
    for kernel, name in ((SRW1, "d1"), (SRW2, "d2")):
        for i in range(10):
            mu = random_connected_measure(rng, kernel, 8)
            res = sup_representation(kernel, mu, 8)
            exact = rate_I(kernel, mu)
            worst_gap = max(worst_gap, exact - res.value)
            checks[f"{name}#{i} within 1e-3"] = abs(exact - res.value) <= 1e-3
            checks[f"{name}#{i} not above I"] = res.value <= exact + 1e-12
    checks["worst gap <= 1e-3"] = worst_gap <= 1e-3
    return _finish(2, "dual identification of I", 30.0, t0, checks)


def _tridiagonal_top(v: float, radius: int) -> float:
    n = 2 * radius + 1
    H = np.diag(np.full(n, -1.0)) + np.diag(np.full(n - 1, 0.5), 1) + np.diag(np.full(n - 1, 0.5), -1)
    H[radius, radius] += v
    return float(np.linalg.eigvalsh(H)[-1])


def criterion_3() -> CriterionResult:
    t0 = time.perf_counter()
    checks = {}
    for v in (1, 2, 4):
        closed = math.sqrt(v * v + 1) - 1
        sol = solve_linear_tilt(SRW1, {0: float(v)}, 60)
        checks[f"v={v} closed form"] = abs(sol.value - closed) <= 1e-8
        checks[f"v={v} dense brute force"] = abs(_tridiagonal_top(v, 60) - closed) <= 1e-8
    return _finish(3, "eigenvalue oracle for the linear tilt", 10.0, t0, checks)


def criterion_4() -> CriterionResult:
    t0 = time.perf_counter()
    checks = {}
    for v in (1, 2, 4):
        eig = solve_linear_tilt(SRW1, {0: float(v)}, 60)
        grad = solve_linear_tilt(SRW1, {0: float(v)}, 60, method="gradient")
        checks[f"v={v} gradient vs eigen"] = abs(grad.value - eig.value) <= 1e-6
    return _finish(4, "two-algorithm agreement", 60.0, t0, checks)


def criterion_5() -> CriterionResult:
    t0 = time.perf_counter()
    V = DifferencePotential.point(4.0)
    sol = solve_quadratic_tilt(SRW1, V, 40, n_starts=16, seed=0)
    rep = check_maximizer_properties(SRW1, V, sol.maximizer)
    checks = {
        "value in [3, 4]": 3.0 <= sol.value <= 4.0,
        "mass 1 +- 1e-8": abs(sol.maximizer.mass() - 1.0) <= 1e-8,
        "single cluster": rep.single_piece,
        "maximizer report passes": rep.passed,
        "strictly above delta_0 value 3": sol.value - 3.0 > 0.0,
    }
    return _finish(5, "quadratic tilt bracket", 60.0, t0, checks)


def criterion_6(n_samples: int = 100_000, workers: int | None = None) -> CriterionResult:
    t0 = time.perf_counter()
    V = DifferencePotential.point(4.0)
    lam_hat = solve_quadratic_tilt(SRW1, V, 40, n_starts=16, seed=0).value
    est = estimate_log_Zt(SRW1, V, 8.0, n_samples, seed=8, workers=workers)
    half_width = 0.5 * (est.ci_high - est.ci_low)
    checks = {
        "estimate >= 3 - CI": est.estimate >= 3.0 - half_width,
        "estimate <= lambda_hat + 0.3": est.estimate <= lam_hat + 0.3,
        "CI brackets estimate": est.ci_low <= est.estimate <= est.ci_high,
    }
    for j, t in enumerate((0.5, 1.0, 2.0)):
        sc = stay_probability_check(SRW1, t, n_samples, seed=100 + j, workers=workers)
        checks[f"stay t={t} within 4 sigma"] = sc.passed
    return _finish(6, "Monte Carlo consistency", 300.0, t0, checks)


def random_compact_point(rng: np.random.Generator, dim: int = 1, max_orbits: int = 3,
                         radius: int = 3) -> CompactPoint:
    k = int(rng.integers(0, max_orbits + 1))
    masses = rng.dirichlet(np.ones(k + 1))[:k] if k else []
    orbits = []
    for m in masses:
        n_sites = int(rng.integers(1, 5))
        pts = {tuple(int(c) for c in rng.integers(-radius, radius + 1, size=dim))
               for _ in range(n_sites)}
        w = rng.uniform(0.1, 1.0, size=len(pts))
        w *= m / w.sum()
        orbits.append(SparseMeasure(dict(zip(sorted(pts), w.tolist())), dim=dim))
    return CompactPoint(orbits, dim=dim)


def two_bump_sequence(n: int) -> SparseMeasure:
    """1/2 U{n-1,n,n+1} + 1/3 U{-n-1,-n,-n+1} + 1/6 U{-n..n}."""
    return (uniform([n - 1, n, n + 1], 0.5) + uniform([-n - 1, -n, -n + 1], 1 / 3)
            + uniform(range(-n, n + 1), 1 / 6))


def criterion_7() -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    R = 48
    tol = 2.0**-R + 1e-12
    sym = tri = inv = True
    for _ in range(500):
        a, b, c = (random_compact_point(rng) for _ in range(3))
        ab = metric_D(a, b, R).value
        sym &= ab == metric_D(b, a, R).value
        tri &= metric_D(a, c, R).value <= ab + metric_D(b, c, R).value + tol
        # orbit invariance: shifting representatives changes nothing
        shifted = CompactPoint([o.rep.shift(tuple(int(v) for v in rng.integers(-50, 51, 1)))
                                for o in a.orbits], dim=1)
        inv &= shifted == a and metric_D(shifted, b, R).value == ab
    target = CompactPoint([uniform([0, 1, 2], 0.5), uniform([0, 1, 2], 1 / 3)])
    seq = [metric_D(embed(two_bump_sequence(n)), target, R).value for n in (20, 50, 100, 200)]
    checks = {
        "symmetry exact": sym,
        "triangle inequality": tri,
        "orbit invariance exact": inv,
        "example sequence nonincreasing": all(x >= y for x, y in zip(seq, seq[1:])),
        "example sequence decreases overall": seq[-1] < seq[0],
    }
    return _finish(7, "metric and compactification properties", 60.0, t0, checks)


def criterion_8() -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    trans = homog = subadd = True
    for _ in range(1000):
        kernel = SRW1 if rng.random() < 0.5 else SRW2
        mu = random_connected_measure(rng, kernel, 10, max_sites=15)
        mu = mu.scale(float(rng.uniform(0.2, 1.0)))
        x = tuple(int(v) for v in rng.integers(-100, 101, size=kernel.dim))
        base = rate_I(kernel, mu)
        trans &= rate_I(kernel, mu.shift(x)) == base
        for lam in (0.0, 0.25, 0.5, 1.0):
            homog &= abs(rate_I(kernel, mu.scale(lam)) - lam * base) <= 1e-12
        nu = random_connected_measure(rng, kernel, 10, max_sites=15)
        nu = nu.shift(tuple(int(v) for v in rng.integers(-3, 4, size=kernel.dim)))
        p = float(rng.uniform(0.05, 0.5))
        mu2, nu2 = mu.scale(p), nu.scale(float(rng.uniform(0.05, 1 - p)))
        subadd &= rate_I(kernel, mu2 + nu2) <= rate_I(kernel, mu2) + rate_I(kernel, nu2) + 1e-12
    approx = nu_ok = True
    xi = CompactPoint([uniform([0, 1, 2], 0.5), uniform([0, 1], 0.25)])
    deficit = 1.0 - xi.mass()
    for n in (1, 2, 5, 10, 50):
        i_nu = rate_I(SRW1, uniform_box(n))
        nu_ok &= abs(i_nu - 1 / (2 * n + 1)) <= 1e-12
        mu_n = approximating_sequence(xi, n, 10)
        approx &= rate_I(SRW1, mu_n) <= rate_I_tilde(SRW1, xi) + deficit * i_nu + 1e-12
    checks = {
        "translation invariance exact": trans,
        "homogeneity 1e-12": homog,
        "sub-additivity 1e-12": subadd,
        "I(nu_n) = 1/(2n+1)": nu_ok,
        "approximating sequence bound": approx,
    }
    return _finish(8, "rate function properties", 120.0, t0, checks)


def double_integral_oracle(traj: Trajectory, V: DifferencePotential) -> float:
    """``t^-2 int_0^t int_0^t V(X_s - X_u) ds du`` summed segment by segment."""
    states = [tuple(s) for s in traj.states().tolist()]
    dur = traj.durations().tolist()
    total = 0.0
    for si, di in zip(states, dur):
        for sj, dj in zip(states, dur):
            z = tuple(a - b for a, b in zip(si, sj))
            total += V.values.get(z, 0.0) * di * dj
    return total / traj.horizon**2


def theta_grid() -> list[float]:
    return [0.0] + np.logspace(-1, 6, 19).tolist()


def criterion_9() -> CriterionResult:
    t0 = time.perf_counter()
    R = 60
    n_box = 2 * R + 1
    curve = intersection_rate_curve(SRW1, theta_grid(), R)
    first, last = curve[0], curve[-1]
    V = DifferencePotential.point(1.0)
    oracle_ok = True
    for i in range(100):
        traj = simulate(SRW1, float(1 + i % 10), seed=99, replicate=i)
        oracle_ok &= abs(intersection_functional(traj, V) - double_integral_oracle(traj, V)) <= 1e-12
    checks = {
        "20 grid points": len(curve) == 20,
        "I' <= y + 1e-6": all(p.I_prime <= p.y + 1e-6 for p in curve),
        # the theta = 0 optimizer must do at least as well as U_{2R+1}
        "theta=0: y in [1/(2R+1), 2/(2R+1)]": 1 / n_box - 1e-12 <= first.y <= 2 / n_box,
        "theta=0: I' <= 1/(2R+1)": first.I_prime <= 1 / n_box + 1e-6,
        "top theta: (1, 1) to 1e-6": abs(last.y - 1) <= 1e-6 and abs(last.I_prime - 1) <= 1e-6,
        "intersection functional vs double integral": oracle_ok,
    }
    return _finish(9, "intersection-rate curve", 60.0, t0, checks)


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


def run_all(only=None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    results = []
    for n, fn in CRITERIA.items():
        if only and n not in only:
            continue
        res = fn()
        if echo:
            echo(res.line())
        results.append(res)
    return results


def format_table(results) -> str:
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines)
