import math
import warnings
from itertools import product

import numpy as np
import pytest

from lattice_ldp.measures import SparseMeasure
from lattice_ldp.rate import rate_I
from lattice_ldp.variational import (
    Box,
    BoxTooSmallWarning,
    DifferencePotential,
    PreconditionError,
    check_maximizer_properties,
    intersection_rate_curve,
    pair_energy,
    solve_linear_tilt,
    solve_quadratic_tilt,
)
from lattice_ldp.walk import srw

SRW1 = srw(1)
SRW2 = srw(2)


@pytest.fixture(scope="module")
def v4():
    return solve_quadratic_tilt(SRW1, DifferencePotential.point(4.0), 40)


def test_potential_validation():
    V = DifferencePotential({0: 2.0, 1: 1.0})
    assert V.values == {(-1,): 1.0, (0,): 2.0, (1,): 1.0}
    assert V.diameter() == 2
    with pytest.raises(ValueError):
        DifferencePotential({0: 1.0, 1: 2.0})
    with pytest.raises(ValueError):
        DifferencePotential({1: 1.0, -1: 0.5, 0: 2.0})
    with pytest.raises(ValueError):
        DifferencePotential({0: -1.0})


def test_pair_energy_examples():
    V = DifferencePotential.point(3.0)
    assert pair_energy(V, SparseMeasure.delta(0)) == 3.0
    assert pair_energy(V, SparseMeasure({0: 0.5, 1: 0.5})) == 1.5
    W = DifferencePotential({0: 1.0, 1: 1.0})
    assert pair_energy(W, SparseMeasure({0: 0.5, 1: 0.5})) == 1.0


def test_box_operators():
    box = Box(3, 1)
    assert box.n == 7
    negL = box.neg_generator(SRW1)
    negL = negL.toarray() if hasattr(negL, "toarray") else negL
    assert np.allclose(negL, negL.T)
    assert np.allclose(np.diag(negL), 1.0)
    mu = SparseMeasure({-1: 0.25, 2: 0.75})
    assert box.to_measure(box.from_measure(mu)) == mu


@pytest.mark.parametrize("v", [0.5, 1.0, 4.0, 10.0])
@pytest.mark.parametrize("method", ["eigen", "gradient"])
def test_linear_tilt_closed_form(v, method):
    sol = solve_linear_tilt(SRW1, {(0,): v}, 60, method=method)
    exact = math.sqrt(v * v + 1) - 1
    assert sol.value == pytest.approx(exact, abs=1e-8)
    mu = sol.maximizer
    assert mu.mass() == pytest.approx(1.0, abs=1e-10)
    assert v * mu.get((0,), 0.0) - rate_I(SRW1, mu) == pytest.approx(sol.value, abs=1e-8)


def test_linear_tilt_zero_potential_warns():
    with pytest.warns(BoxTooSmallWarning):
        small = solve_linear_tilt(SRW1, {}, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoxTooSmallWarning)
        large = solve_linear_tilt(SRW1, {}, 200)
    assert small.value < large.value <= 0.0
    assert large.value > -1e-4


def test_linear_tilt_constant_potential():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoxTooSmallWarning)
        V = {(x,): 2.5 for x in range(-200, 201)}
        sol = solve_linear_tilt(SRW1, V, 200)
    assert abs(sol.value - 2.5) < 1e-3


def test_linear_tilt_two_dimensions():
    sol = solve_linear_tilt(SRW2, {(0, 0): 4.0}, 12)
    assert 4.0 - 1.0 < sol.value < 4.0


def test_quadratic_precondition():
    with pytest.raises(PreconditionError):
        solve_quadratic_tilt(SRW1, DifferencePotential.point(1.0), 20)
    with pytest.raises(ValueError):
        solve_quadratic_tilt(SRW2, DifferencePotential.point(4.0), 20)


def test_quadratic_v4(v4):
    assert v4.converged and v4.gradient_norm <= 1e-9
    assert 3.0 <= v4.value <= 4.0
    mu = v4.maximizer
    V = DifferencePotential.point(4.0)
    assert pair_energy(V, mu) - rate_I(SRW1, mu) == pytest.approx(v4.value, abs=1e-10)


def grid_objective(v, levels=11, width=5):
    """Brute-force max of v sum phi^4 - I(phi^2) over profiles on {-2..2}."""
    grid = np.array(list(product(np.linspace(0, 1, levels), repeat=width)))[1:]
    phi = grid / np.linalg.norm(grid, axis=1, keepdims=True)
    padded = np.pad(phi, ((0, 0), (1, 1)))
    energy = 0.5 * (np.diff(padded, axis=1) ** 2).sum(axis=1)
    return float((v * (phi**4).sum(axis=1) - energy).max())


def test_quadratic_beats_grid_search(v4):
    assert v4.value >= grid_objective(4.0) - 1e-12


def test_quadratic_large_v_two_site_oracle():
    # the maximizer is nearly a point mass; compare against the two-site family
    v = 100.0
    sol = solve_quadratic_tilt(SRW1, DifferencePotential.point(v), 10)
    th = np.linspace(0, math.pi / 2, 200_001)
    c, s = np.cos(th), np.sin(th)
    two_site = (v * (c**4 + s**4) - 0.5 * (c - s) ** 2 - 0.5).max()
    assert sol.value >= two_site - 1e-12
    assert abs(sol.value - (v - 1.0)) <= 0.02


def test_quadratic_translation_invariance(v4):
    V = DifferencePotential.point(4.0)
    base = pair_energy(V, v4.maximizer) - rate_I(SRW1, v4.maximizer)
    for x in (-7, 3, 1000):
        moved = v4.maximizer.shift(x)
        assert pair_energy(V, moved) - rate_I(SRW1, moved) == base


def test_quadratic_monotone_in_v():
    vals = [solve_quadratic_tilt(SRW1, DifferencePotential.point(v), 30,
                                 check_precondition=False, boundary_tol=None).value
            for v in (1.0, 2.0, 4.0, 8.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_quadratic_box_stable(v4):
    small = solve_quadratic_tilt(SRW1, DifferencePotential.point(4.0), 20)
    assert small.value == pytest.approx(v4.value, abs=1e-9)


def test_quadratic_reproducible_and_worker_free(v4):
    again = solve_quadratic_tilt(SRW1, DifferencePotential.point(4.0), 40, workers=4)
    assert again.value == v4.value
    assert again.maximizer == v4.maximizer


def test_quadratic_extended_potential():
    V = DifferencePotential({0: 3.0, 1: 1.0})
    sol = solve_quadratic_tilt(SRW1, V, 20)
    assert V.v0 - 1.0 <= sol.value <= V.v0
    assert check_maximizer_properties(SRW1, V, sol.maximizer).passed


def test_maximizer_properties(v4):
    V = DifferencePotential.point(4.0)
    assert check_maximizer_properties(SRW1, V, v4.maximizer).passed
    rep = check_maximizer_properties(SRW1, V, SparseMeasure.delta(0))
    assert rep.passed and rep.merge_gains == ()
    split = SparseMeasure({0: 0.5, 100: 0.5})
    rep = check_maximizer_properties(SRW1, V, split)
    assert not rep.passed and rep.n_pieces == 2
    assert rep.merging_improves and rep.merge_gains[0] > 0
    assert not check_maximizer_properties(SRW1, V, SparseMeasure.delta(0, weight=0.5)).mass_ok


def test_intersection_curve():
    R = 30
    pts = intersection_rate_curve(SRW1, [0.0, 0.5, 2.0, 10.0, math.inf], R)
    assert [p.theta for p in pts] == [0.0, 0.5, 2.0, 10.0, math.inf]
    first = pts[0]
    assert 1 / (2 * R + 1) <= first.y <= 2 / (2 * R + 1)
    assert first.I_prime <= 1 / (2 * R + 1)
    assert pts[-1].y == 1.0 and pts[-1].I_prime == 1.0
    ys = [p.y for p in pts]
    assert all(a <= b + 1e-12 for a, b in zip(ys, ys[1:]))
    for p in pts:
        assert 0.0 <= p.y <= 1.0 and 0.0 <= p.I_prime <= 1.0 + 1e-12
    with pytest.raises(ValueError):
        intersection_rate_curve(SRW1, [-1.0], R)


@pytest.mark.parametrize("v", [1.0, 2.0, 4.0])
def test_linear_gradient_matches_eigen(v):
    eig = solve_linear_tilt(SRW1, {(0,): v}, 60, method="eigen").value
    grad = solve_linear_tilt(SRW1, {(0,): v}, 60, method="gradient").value
    assert abs(eig - grad) <= 1e-6


def test_curve_feasibility():
    grid = [0.0, 0.05, 0.2, 0.5, 1.0, 3.0, 1e3]
    for p in intersection_rate_curve(SRW1, grid, 30):
        assert p.I_prime <= p.y + 1e-6
        assert 0.0 < p.y <= 1.0


def test_solution_fields(v4):
    assert v4.maximizer.mass() == pytest.approx(1.0, abs=1e-10)
    assert all(w > 0 for _, w in v4.maximizer.items())
    assert v4.box_radius == 40 and v4.starts_used == 17
