"""
Principal eigenvalue for a site potential
=========================================

For V = v at the origin the supremum of <V, mu> - I(mu) equals
sqrt(v^2 + 1) - 1 for the rate-one walk on Z. Both solvers recover it.
"""

import math

from lattice_ldp import solve_linear_tilt, srw

kernel = srw(1)
for v in (0.5, 1.0, 2.0, 4.0, 8.0):
    eig = solve_linear_tilt(kernel, {(0,): v}, 60, method="eigen").value
    grad = solve_linear_tilt(kernel, {(0,): v}, 60, method="gradient").value
    print(f"v={v:<4} eigen={eig:.10f} gradient={grad:.10f} closed={math.sqrt(v*v+1)-1:.10f}")
