import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_ldp.decompose import UnionFind, cluster_decompose, embed, wide_separation_stat
from lattice_ldp.measures import CompactPoint, SparseMeasure, approximating_sequence, uniform
from lattice_ldp.testfn import metric_D

from .conftest import measures


def brute_components(mu, link_radius):
    """Connected components by repeated merging on all pairs."""
    pts = list(mu.support)
    comps = [{p} for p in pts]
    merged = True
    while merged:
        merged = False
        for a, b in itertools.combinations(range(len(comps)), 2):
            if any(sum(abs(x - y) for x, y in zip(p, q)) <= link_radius
                   for p in comps[a] for q in comps[b]):
                comps[a] |= comps.pop(b)
                merged = True
                break
    return sorted(sorted(c) for c in comps)


def test_union_find():
    uf = UnionFind(5)
    uf.union(0, 1)
    uf.union(3, 4)
    uf.union(1, 0)
    assert sorted(map(sorted, uf.groups())) == [[0, 1], [2], [3, 4]]


def test_decompose_examples():
    d0 = SparseMeasure.delta(0)
    pieces, res = cluster_decompose(d0)
    assert pieces == [d0] and res.mass() == 0.0
    mu = SparseMeasure({0: 0.5, 100: 0.5})
    pieces, res = cluster_decompose(mu)
    assert len(pieces) == 2
    assert embed(mu) == CompactPoint([SparseMeasure.delta(0, weight=0.5)] * 2)
    nu = uniform(range(-50, 51), 1.0)
    assert embed(nu) == CompactPoint([nu])
    # with gaps wider than the link radius every site is its own light cluster
    sparse = uniform(range(-50, 51, 10), 1.0)
    xi, res = embed(sparse, link_radius=5, mass_floor=0.2, keep_residual=True)
    assert len(xi) == 0 and res == sparse
    assert len(embed(sparse, link_radius=10)) == 1


@settings(max_examples=200, deadline=None)
@given(measures(dim=2, max_sites=12, radius=10), st.integers(0, 6), st.floats(0.0, 0.5))
def test_decompose_partitions_mass(mu, link_radius, floor):
    pieces, res = cluster_decompose(mu, link_radius, floor)
    total = res
    for p in pieces:
        assert p.mass() >= floor
        total = total + p
    assert total == mu
    expected = brute_components(mu, link_radius)
    got = [sorted(p.support) for p in pieces]
    got += [c for c in expected if set(c) <= set(res.support)]
    assert sorted(got) == expected
    masses = [p.mass() for p in pieces]
    assert masses == sorted(masses, reverse=True)


def test_embed_shift_invariant():
    mu = SparseMeasure({0: 0.3, 1: 0.2, 50: 0.4})
    assert embed(mu.shift(17)) == embed(mu)


def test_separated_bumps_decompose_exactly():
    target = CompactPoint([uniform([0, 1, 2], 0.5), uniform([0, 1, 2], 1 / 3)])
    for n in (5, 20, 60):
        mu = uniform([n, n + 1, n + 2], 0.5) + uniform([-n, -n + 1, -n + 2], 1 / 3)
        assert embed(mu, link_radius=3) == target


def test_bumps_with_background_converge():
    # the uniform background links the bumps, yet the distance to the limit shrinks
    target = CompactPoint([uniform([0, 1, 2], 0.5), uniform([0, 1, 2], 1 / 3)])
    vals = []
    for n in (20, 50, 100, 200):
        mu = approximating_sequence(target, n, 10)
        vals.append(metric_D(embed(mu, link_radius=3), target).value)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-3


def test_wide_separation_stat():
    W = {0: 1.0, 1: 0.5, -1: 0.5}
    a = SparseMeasure({0: 0.5})
    assert wide_separation_stat(a, SparseMeasure({1: 0.5}), W) == 0.125
    assert wide_separation_stat(a, SparseMeasure({10: 0.5}), W) == 0.0
    with pytest.raises(ValueError):
        wide_separation_stat(a, SparseMeasure({(0, 0): 0.5}), W)


def test_decompose_floor_examples():
    mu = SparseMeasure({0: 0.5, 100: 0.5})
    pieces, res = cluster_decompose(mu, link_radius=5, mass_floor=0.1)
    assert pieces == [SparseMeasure({0: 0.5}), SparseMeasure({100: 0.5})]
    assert res.mass() == 0.0
    nu = uniform(range(-50, 51))
    pieces, res = cluster_decompose(nu, link_radius=1, mass_floor=0.2)
    assert pieces == [nu] and res.mass() == 0.0
    pieces, res = cluster_decompose(nu, link_radius=1, mass_floor=1.5)
    assert pieces == [] and res == nu
    assert embed(SparseMeasure.delta(0)) == CompactPoint([SparseMeasure.delta(0)])


@settings(max_examples=200, deadline=None)
@given(measures(dim=1, max_sites=12, radius=30), st.integers(0, 6))
def test_pieces_are_separated(mu, link_radius):
    pieces, _ = cluster_decompose(mu, link_radius, 0.0)
    for a, b in itertools.combinations(pieces, 2):
        gap = min(abs(x[0] - y[0]) for x in a.support for y in b.support)
        assert gap > link_radius
    W = {z: 1.0 for z in range(-link_radius, link_radius + 1)}
    for a, b in itertools.combinations(pieces, 2):
        assert wide_separation_stat(a, b, W) == 0.0


def test_wide_separation_examples():
    d0 = SparseMeasure.delta(0)
    assert wide_separation_stat(d0, d0, {0: 1.0}) == 1.0
    assert wide_separation_stat(d0, SparseMeasure.delta(7), {0: 1.0, 3: 1.0}) == 0.0
