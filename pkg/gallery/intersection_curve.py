"""
Trading spread for self-intersection
====================================

Minimizing I(mu) - theta * sum mu(x)^2 over a box traces pairs
(sum mu^2, I(mu)). Small theta favours flat profiles, large theta a point mass.
"""

import math

from lattice_ldp import srw
from lattice_ldp.variational import intersection_rate_curve

grid = [0.0, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0, math.inf]
for p in intersection_rate_curve(srw(1), grid, 40):
    print(f"theta={p.theta:<6} y={p.y:.5f} I={p.I_prime:.5f}")
