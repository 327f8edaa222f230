"""
Orbits and the metric between compact points
============================================

Measures are identified up to translation. A compact point is a collection
of such orbits with total mass at most one; the metric compares integrals of
translation invariant test functions.
"""

from lattice_ldp import CompactPoint, SparseMeasure, metric_D
from lattice_ldp.decompose import embed
from lattice_ldp.measures import approximating_sequence, uniform
from lattice_ldp.testfn import enumerate_testfn

for r in range(1, 6):
    f = enumerate_testfn(r)
    print(r, "arity", f.k, "offsets", f.offsets)

a = CompactPoint([SparseMeasure.delta(0)])
b = CompactPoint([SparseMeasure.delta(123)])
print("D(delta_0, delta_123) =", metric_D(a, b).value)

# Two bumps drifting apart on a thin background: the embedded measures
# approach the pair of bumps in the metric.
target = CompactPoint([uniform([0, 1, 2], 0.5), uniform([0, 1, 2], 1 / 3)])
for n in (5, 20, 80, 320):
    mu = approximating_sequence(target, n, spacing=10)
    print(f"n={n:>3}  D={metric_D(embed(mu, link_radius=3), target).value:.2e}")
