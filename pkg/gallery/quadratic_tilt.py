"""
Self-attracting tilt: the quadratic variational problem
=======================================================

Maximize sum V(x-y) mu(x) mu(y) - I(mu). The answer sits between
V(0) - total rate and V(0), and the maximizer is a single bump.
"""

from lattice_ldp import DifferencePotential, solve_quadratic_tilt, srw
from lattice_ldp.variational import check_maximizer_properties

kernel = srw(1)
for v in (2.0, 4.0, 8.0, 16.0):
    V = DifferencePotential.point(v)
    sol = solve_quadratic_tilt(kernel, V, 40)
    rep = check_maximizer_properties(kernel, V, sol.maximizer)
    peak = max(w for _, w in sol.maximizer.items())
    print(f"v={v:<5} value={sol.value:.6f} peak mass={peak:.4f} single bump={rep.single_piece}")

V = DifferencePotential({0: 3.0, 1: 1.0, 2: 0.5})
sol = solve_quadratic_tilt(kernel, V, 30)
print("extended potential:", round(sol.value, 6))
