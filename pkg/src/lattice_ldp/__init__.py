"""Large deviations of occupation measures for random walks on Z^d.

Measures are handled up to translation and compared with an orbit metric.
On top of exact walk simulation sit the Dirichlet-form rate function and
solvers for the linear and quadratic tilt variational problems.
"""
from .decompose import cluster_decompose, embed, wide_separation_stat
from .measures import (
    CompactPoint,
    Orbit,
    SparseMeasure,
    approximating_sequence,
    canonicalize,
    mass,
    prune,
    shift,
    uniform,
    uniform_box,
)
from .mc import (
    ball_decay_estimate,
    estimate_log_Zt,
    intersection_functional,
    stay_probability_check,
)
from .rate import (
    TestPotentialU,
    dirichlet_sum_ordered,
    dual_integrand,
    lambda_tilde,
    rate_I,
    rate_I_tilde,
    sup_representation,
)
from .testfn import enumerate_testfn, lambda_functional, metric_D
from .variational import (
    DifferencePotential,
    check_maximizer_properties,
    intersection_rate_curve,
    pair_energy,
    solve_linear_tilt,
    solve_quadratic_tilt,
)
from .walk import (
    RateKernel,
    Trajectory,
    apply_generator,
    check_assumptions,
    max_displacement,
    occupation_measure,
    simulate,
    srw,
)

__version__ = "0.1.0"
