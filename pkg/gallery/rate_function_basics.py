"""
Rate function of the occupation measure
=======================================

The rate is the Dirichlet energy of the square root of the measure. A point
mass costs exactly the total jump rate, and spreading mass evenly over n
sites costs 1/n for the nearest-neighbour walk.
"""

import numpy as np

from lattice_ldp import SparseMeasure, rate_I, srw
from lattice_ldp.measures import uniform
from lattice_ldp.rate import sup_representation

kernel = srw(1)
print("I(delta_0) =", rate_I(kernel, SparseMeasure.delta(0)))

for n in (1, 2, 5, 10, 50):
    print(f"I(uniform on {n:>2} sites) = {rate_I(kernel, uniform(range(n))):.6f}")

# A lumpy measure: the dual representation climbs to the same value from below.
mu = SparseMeasure({0: 0.3, 1: 0.1, 4: 0.4})
res = sup_representation(kernel, mu, box_radius=10)
print("direct I =", rate_I(kernel, mu), " dual bound =", res.value, " gap =", res.gap)

# Along a straight line between two measures the rate stays below the chord.
nu = uniform(range(-3, 4))
for s in np.linspace(0, 1, 5):
    mix = mu.scale(1 - s) + nu.scale(s)
    print(f"s={s:.2f}  I={rate_I(kernel, mix):.5f}")
