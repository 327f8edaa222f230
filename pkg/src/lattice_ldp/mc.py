"""
Monte Carlo checks against the variational predictions
======================================================

Plain Monte Carlo over exactly simulated trajectories. Replicate ``i`` of a
run with master seed ``s`` always uses the stream ``stream_rng(s, i)``, and
per-sample results are reduced in replicate order, so outputs do not depend
on the number of workers.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from .decompose import DEFAULT_LINK_RADIUS, DEFAULT_MASS_FLOOR, embed
from .measures import CompactPoint, SparseMeasure
from .testfn import DEFAULT_R, metric_D
from .variational import DifferencePotential
from .walk import RateKernel, Trajectory, occupation_times, simulate, splitmix64, stream_rng

__all__ = [
    "ZtEstimate",
    "StayCheck",
    "HeavyTailWarning",
    "intersection_functional",
    "estimate_log_Zt",
    "stay_probability_check",
    "ball_decay_estimate",
]

N_BOOT = 1000
HEAVY_SHARE = 0.5


class HeavyTailWarning(RuntimeWarning):
    """A single sample dominates the exponential average."""


class ZtEstimate(NamedTuple):
    estimate: float
    ci_low: float
    ci_high: float
    n: int
    heavy_tail: bool
    top_share: float
    t: float


class StayCheck(NamedTuple):
    empirical: float
    exact: float
    sigma: float
    passed: bool


def _pair_sum(occ: dict, V: DifferencePotential, t: float) -> float:
    total = []
    for z, vz in V.values.items():
        for x, s in occ.items():
            other = occ.get(tuple(a - b for a, b in zip(x, z)))
            if other is not None:
                total.append(vz * s * other)
    return math.fsum(total) / (t * t)


def intersection_functional(traj: Trajectory, V: DifferencePotential) -> float:
    """``sum_{x,y} V(x - y) L_t(x) L_t(y)`` from exact occupation times."""
    return _pair_sum(occupation_times(traj), V, traj.horizon)


def _functionals(kernel: RateKernel, V: DifferencePotential, t: float, seed: int,
                 lo: int, hi: int) -> np.ndarray:
    return np.array([intersection_functional(simulate(kernel, t, seed=seed, replicate=i), V)
                     for i in range(lo, hi)])


def _map_replicates(fn, args: tuple, n: int, workers: int | None) -> np.ndarray:
    if not workers or workers <= 1:
        return fn(*args, 0, n)
    bounds = np.linspace(0, n, workers + 1).astype(int)
    with ProcessPoolExecutor(workers) as pool:
        futs = [pool.submit(fn, *args, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        return np.concatenate([f.result() for f in futs])


def estimate_log_Zt(kernel: RateKernel, V: DifferencePotential, t: float, n_samples: int,
                    seed: int = 0, n_boot: int = N_BOOT, workers: int | None = None,
                    ) -> ZtEstimate:
    """``(1/t) log E_0[exp(t * sum V(x-y) L_t(x) L_t(y))]`` by log-sum-exp.

    The 95% interval is a percentile bootstrap over ``n_boot`` resamples.
    A :class:`HeavyTailWarning` is issued when the largest sample carries more
    than half of the total exponential weight.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    vals = _map_replicates(_functionals, (kernel, V, t, seed), n_samples, workers)
    x = t * vals
    log_n = math.log(n_samples)
    lse = logsumexp(x)
    estimate = (lse - log_n) / t
    top_share = math.exp(float(x.max()) - lse)
    rng = stream_rng(splitmix64(seed ^ 0xB007), 0)
    boots = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n_samples, size=n_samples)
        boots[b] = (logsumexp(x[idx]) - log_n) / t
    lo, hi = np.percentile(boots, [2.5, 97.5])
    heavy = top_share > HEAVY_SHARE
    if heavy:
        warnings.warn(f"top sample carries {top_share:.0%} of the weight", HeavyTailWarning,
                      stacklevel=2)
    return ZtEstimate(float(estimate), float(lo), float(hi), n_samples, heavy, top_share, t)


def _stays(kernel: RateKernel, t: float, seed: int, lo: int, hi: int) -> np.ndarray:
    return np.array([simulate(kernel, t, seed=seed, replicate=i).n_jumps == 0
                     for i in range(lo, hi)])


def stay_probability_check(kernel: RateKernel, t: float, n_samples: int, seed: int = 0,
                           n_sigma: float = 4.0, workers: int | None = None) -> StayCheck:
    """Frequency of jump-free paths on ``[0, t]`` against ``exp(-total_rate * t)``."""
    stays = _map_replicates(_stays, (kernel, t, seed), n_samples, workers)
    emp = float(stays.mean())
    exact = math.exp(-kernel.total_rate * t)
    sigma = math.sqrt(exact * (1 - exact) / n_samples)
    return StayCheck(emp, exact, sigma, abs(emp - exact) < n_sigma * sigma)


def _ball_hits(kernel: RateKernel, target: CompactPoint, delta: float, t: float, seed: int,
               R: int, link_radius: int, mass_floor: float, lo: int, hi: int) -> np.ndarray:
    out = np.zeros(hi - lo, dtype=bool)
    for k, i in enumerate(range(lo, hi)):
        traj = simulate(kernel, t, seed=seed, replicate=i)
        occ = occupation_times(traj)
        L = SparseMeasure({x: s / t for x, s in occ.items()}, dim=kernel.dim)
        xi = embed(L, link_radius, mass_floor)
        out[k] = metric_D(xi, target, R).value < delta
    return out


def ball_decay_estimate(kernel: RateKernel, xi_target: CompactPoint, delta: float,
                        t_grid: Sequence[float], n_samples: int, seed: int = 0,
                        R: int = DEFAULT_R, link_radius: int = DEFAULT_LINK_RADIUS,
                        mass_floor: float = DEFAULT_MASS_FLOOR,
                        workers: int | None = None) -> list[tuple[float, float]]:
    """Empirical decay rates ``-(1/t) log P(D(embed(L_t), target) < delta)``.

    Grid point ``j`` uses master seed ``splitmix64(seed + j)``; a grid point
    with no hits reports NaN.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    out = []
    for j, t in enumerate(t_grid):
        s = splitmix64(seed + j)
        hits = _map_replicates(_ball_hits, (kernel, xi_target, delta, float(t), s, R,
                                            link_radius, mass_floor), n_samples, workers)
        p = float(hits.mean())
        out.append((float(t), -math.log(p) / t if p > 0 else math.nan))
    return out
