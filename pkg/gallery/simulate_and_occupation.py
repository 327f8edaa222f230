"""
Simulating the walk and its occupation measure
==============================================

Trajectories are simulated exactly. Replicate i under master seed s uses its
own counter-based stream, so any subset of replicates can be regenerated.
"""

import numpy as np

from lattice_ldp import simulate, srw
from lattice_ldp.walk import check_assumptions, max_displacement, occupation_measure

kernel = srw(2)
print(check_assumptions(kernel))

traj = simulate(kernel, 25.0, seed=42, replicate=0)
print("jumps:", traj.n_jumps, " furthest excursion:", round(max_displacement(traj), 3))

L = occupation_measure(traj)
top = sorted(L.items(), key=lambda kv: -kv[1])[:5]
for x, w in top:
    print(x, round(w, 4))

# same (seed, replicate) gives the same path
assert simulate(kernel, 25.0, seed=42, replicate=0) == traj

counts = [simulate(kernel, 10.0, seed=7, replicate=i).n_jumps for i in range(2000)]
print("mean jump count at t=10:", np.mean(counts))
