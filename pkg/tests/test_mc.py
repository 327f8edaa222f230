import math
import warnings

import numpy as np
import pytest

from lattice_ldp.measures import CompactPoint, SparseMeasure
from lattice_ldp.mc import (
    HeavyTailWarning,
    ball_decay_estimate,
    estimate_log_Zt,
    intersection_functional,
    stay_probability_check,
)
from lattice_ldp.variational import DifferencePotential, pair_energy
from lattice_ldp.walk import Trajectory, occupation_measure, simulate, splitmix64, srw

SRW1 = srw(1)
V4 = DifferencePotential.point(4.0)


def test_intersection_functional_examples():
    still = Trajectory((0,), np.array([]), np.zeros((0, 1), dtype=np.int64), 3.0)
    assert intersection_functional(still, V4) == 4.0
    half = Trajectory((0,), np.array([1.0]), np.array([[1]]), 2.0)
    assert intersection_functional(half, V4) == 2.0
    W = DifferencePotential({0: 1.0, 1: 1.0})
    assert intersection_functional(half, W) == 1.0


def test_intersection_functional_matches_pair_energy():
    W = DifferencePotential({0: 2.0, 1: 1.0, 3: 0.5})
    for i in range(50):
        traj = simulate(SRW1, 7.0, seed=3, replicate=i)
        assert intersection_functional(traj, W) == pytest.approx(
            pair_energy(W, occupation_measure(traj)), rel=1e-12)


def test_zero_potential_gives_zero():
    est = estimate_log_Zt(SRW1, DifferencePotential({}, dim=1), 4.0, 200, seed=1)
    assert est.estimate == 0.0 and est.ci_low == 0.0 and est.ci_high == 0.0
    assert not est.heavy_tail


def test_estimate_lower_bounds_and_reproducibility():
    t, n = 4.0, 5000
    est = estimate_log_Zt(SRW1, V4, t, n, seed=2)
    assert est.ci_low <= est.estimate <= est.ci_high
    again = estimate_log_Zt(SRW1, V4, t, n, seed=2, workers=2)
    assert again == est
    vals = np.array([intersection_functional(simulate(SRW1, t, seed=2, replicate=i), V4)
                     for i in range(n)])
    # Jensen: the log-mean-exp dominates the mean
    assert est.estimate >= vals.mean() - 1e-12
    # paths that never jump alone contribute exp(t * V(0)) each
    stays = int((vals == 4.0).sum())
    assert est.estimate >= (math.log(stays / n) + t * 4.0) / t - 1e-12
    assert est.estimate <= 4.0


def test_estimate_rejects_bad_arguments():
    with pytest.raises(ValueError):
        estimate_log_Zt(SRW1, V4, 0.0, 1000)
    with pytest.raises(ValueError):
        estimate_log_Zt(SRW1, V4, 1.0, 10)


def test_heavy_tail_flag():
    # a huge potential makes the rare jump-free path dominate the average
    with pytest.warns(HeavyTailWarning):
        est = estimate_log_Zt(SRW1, DifferencePotential.point(50.0), 12.0, 200, seed=0)
    assert est.heavy_tail and est.top_share > 0.5


def test_stay_probability():
    sc = stay_probability_check(SRW1, 1.0, 20_000, seed=4)
    assert sc.exact == math.exp(-1.0)
    assert sc.passed
    assert stay_probability_check(SRW1, 1.0, 20_000, seed=4, workers=3) == sc


def test_ball_decay_at_point_mass():
    target = CompactPoint([SparseMeasure.delta(0)])
    t_grid, n, seed = [0.5, 1.0, 2.0], 2000, 9
    out = ball_decay_estimate(SRW1, target, 0.01, t_grid, n, seed=seed)
    for j, (t, rate) in enumerate(out):
        # jump-free paths always land in the ball, so the rate cannot exceed theirs
        s = splitmix64(seed + j)
        stays = sum(simulate(SRW1, t, seed=s, replicate=i).n_jumps == 0 for i in range(n))
        assert rate <= -math.log(stays / n) / t + 1e-12
        assert rate <= SRW1.total_rate + 0.2


def test_ball_decay_trivial_radius():
    target = CompactPoint([SparseMeasure.delta(0)])
    out = ball_decay_estimate(SRW1, target, 1.0, [1.0, 3.0], 300, seed=1)
    assert all(rate == 0.0 for _, rate in out)
    with pytest.raises(ValueError):
        ball_decay_estimate(SRW1, target, 0.0, [1.0], 300)


def test_ball_decay_no_hits_is_nan():
    far = CompactPoint([SparseMeasure({0: 0.5, 1: 0.5})])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        out = ball_decay_estimate(SRW1, far, 1e-12, [5.0], 100, seed=2)
    assert math.isnan(out[0][1])


def test_stay_examples():
    sc = stay_probability_check(SRW1, 0.01, 5000, seed=1)
    assert sc.exact == pytest.approx(0.99005, abs=1e-5) and sc.passed
    sc = stay_probability_check(srw(1, total_rate=2.0), 1.0, 20_000, seed=2)
    assert sc.exact == math.exp(-2.0) and sc.passed


def test_intersection_functional_bounds():
    V = DifferencePotential({0: 3.0, 1: 1.0})
    for i in range(200):
        traj = simulate(SRW1, 3.0, seed=21, replicate=i)
        val = intersection_functional(traj, V)
        assert 0.0 < val <= V.v0 + 1e-12
        single = len(occupation_measure(traj)) == 1
        assert (abs(val - V.v0) <= 1e-12) == single


def test_ball_rates_nonnegative():
    target = CompactPoint([SparseMeasure.delta(0)])
    for _, rate in ball_decay_estimate(SRW1, target, 0.05, [0.5, 1.0, 2.0], 500, seed=5):
        assert math.isnan(rate) or rate >= 0.0
