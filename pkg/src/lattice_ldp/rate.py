"""
Rate functions
==============

For a symmetric kernel the occupation-measure rate function is the Dirichlet
energy of the square root of the measure,

    I(mu) = <sqrt(mu), (-L) sqrt(mu)> = sum over unordered edges {x, x+z} of
            a(z) (sqrt(mu(x)) - sqrt(mu(x+z)))^2,

which is half the sum over ordered pairs (see :func:`dirichlet_sum_ordered`).
With this normalization ``I(delta_0)`` equals the total jump rate, the exact
exponential decay rate of the probability of never leaving the origin.

On compactified points the rate is the sum over orbits. Both admit dual
representations as suprema of ``int (-L u)/u dmu`` over positive ``u``, which
:func:`sup_representation` and :func:`lambda_tilde` evaluate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .measures import CompactPoint, SparseMeasure, as_point
from .walk import RateKernel

__all__ = [
    "TestPotentialU",
    "SupResult",
    "rate_I",
    "dirichlet_sum_ordered",
    "rate_I_tilde",
    "dual_integrand",
    "sup_representation",
    "lambda_tilde",
]


def _check(kernel: RateKernel, mu) -> None:
    if kernel.dim != mu.dim:
        raise ValueError(f"dimension mismatch: kernel {kernel.dim} vs measure {mu.dim}")


def _add(x, z):
    return tuple(a + b for a, b in zip(x, z))


def rate_I(kernel: RateKernel, mu: SparseMeasure) -> float:
    """Dirichlet energy ``<sqrt(mu), (-L) sqrt(mu)>``."""
    _check(kernel, mu)
    total = 0.0
    for x, w in mu.items():
        phi = math.sqrt(w)
        for z, a in kernel.jumps.items():
            y = _add(x, z)
            v = mu.get(y, 0.0)
            if v == 0.0:
                total += a * w
            elif x < y:
                diff = phi - math.sqrt(v)
                total += a * diff * diff
    return total


def dirichlet_sum_ordered(kernel: RateKernel, mu: SparseMeasure) -> float:
    """``sum_{x,y} a_{x,y} (sqrt(mu)(x) - sqrt(mu)(y))^2`` over ordered pairs (= 2 I)."""
    return 2.0 * rate_I(kernel, mu)


def rate_I_tilde(kernel: RateKernel, xi: CompactPoint) -> float:
    _check(kernel, xi)
    return math.fsum(rate_I(kernel, o.rep) for o in xi.orbits)


@dataclass(frozen=True)
class TestPotentialU:
    """Positive test function ``u = c + v`` with ``v >= 0`` finitely supported."""

    c: float
    v: Mapping

    __test__ = False

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("floor c must be positive")
        if any(val < 0 for val in self.v.values()):
            raise ValueError("v must be nonnegative")

    def __call__(self, x) -> float:
        return self.c + self.v.get(x, 0.0)


def _neg_generator(kernel: RateKernel, v: Mapping, x) -> float:
    # (-L u)(x) for u = c + v; the constant drops out
    vx = v.get(x, 0.0)
    return math.fsum(a * (vx - v.get(_add(x, z), 0.0)) for z, a in kernel.jumps.items())


def dual_integrand(kernel: RateKernel, u: TestPotentialU, mu: SparseMeasure) -> float:
    """``sum_x mu(x) (-L u)(x) / u(x)``; never exceeds ``rate_I(kernel, mu)``."""
    _check(kernel, mu)
    return math.fsum(w * _neg_generator(kernel, u.v, x) / u(x) for x, w in mu.items())


@dataclass(frozen=True)
class SupResult:
    value: float
    gap: float
    c: float
    sweeps: int


def _box_around(mu: SparseMeasure, radius: int):
    lo, hi = mu.bounding_box()
    center = tuple((l + h) // 2 for l, h in zip(lo, hi))
    for l, h, c in zip(lo, hi, center):
        if l < c - radius or h > c + radius:
            raise ValueError(f"box of radius {radius} cannot contain the support of mu")
    return center


def sup_representation(kernel: RateKernel, mu: SparseMeasure, box_radius: int,
                       iterations: int = 40, sweeps: int = 3,
                       c0: float = 1.0) -> SupResult:
    """Lower bound for ``rate_I`` from the dual ``sup_{c, v} int (-L u)/(c + v) dmu``.

    ``v`` lives on the cube of radius ``box_radius`` centred on the support of
    ``mu``. Starting from ``v = sqrt(mu)``, the floor ``c`` is halved
    ``iterations`` times and after each halving ``sweeps`` rounds of exact
    coordinate maximization are run over the support of ``mu``. Off the
    support the coordinate optimum is always ``v = 0``.
    """
    _check(kernel, mu)
    if not mu:
        raise ValueError("mu must be nonempty")
    _box_around(mu, box_radius)
    support = mu.sorted_items()
    jumps = list(kernel.jumps.items())

    v = {x: math.sqrt(w) for x, w in support}
    c = c0
    best = -math.inf
    n_sweeps = 0
    for _ in range(iterations):
        c *= 0.5
        u = {x: c + vx for x, vx in v.items()}
        for _ in range(sweeps):
            for y, wy in support:
                # objective in u_y is const - A/u_y - B*u_y
                A = wy * sum(a * u.get(_add(y, z), c) for z, a in jumps)
                B = sum(a * mu.get(_add(y, z), 0.0) / u.get(_add(y, z), c) for z, a in jumps)
                uy = math.sqrt(A / B) if B > 0 else math.inf
                u[y] = min(max(uy, c), 1e300)
            n_sweeps += 1
        v = {x: ux - c for x, ux in u.items()}
        val = dual_integrand(kernel, TestPotentialU(c, v), mu)
        best = max(best, val)
    exact = rate_I(kernel, mu)
    return SupResult(value=best, gap=exact - best, c=c, sweeps=n_sweeps)


def lambda_tilde(kernel: RateKernel, xi: CompactPoint, c: float,
                 us: Sequence[Mapping]) -> float:
    """Best assignment of ``len(us)`` distinct orbits and shifts to the test functions.

    For test function ``u_i`` and orbit ``alpha`` the score is the supremum over
    shifts ``b`` of ``sum_x alpha(x + b) (-L u_i)(x) / (c + u_i(x))``. The
    integrand vanishes more than one jump away from ``supp u_i``, so only the
    finitely many shifts that bring ``supp alpha`` into that neighbourhood are
    scored and the supremum includes the value 0 of far-away shifts.
    """
    _check(kernel, xi)
    if not c > 0:
        raise ValueError("c must be positive")
    k = len(us)
    if k > len(xi):
        raise ValueError(f"{k} test functions but only {len(xi)} orbits")
    if k == 0:
        return 0.0
    score = np.zeros((k, len(xi)))
    for i, u in enumerate(us):
        u = {as_point(x, kernel.dim): float(val) for x, val in u.items() if val != 0}
        if any(val < 0 for val in u.values()):
            raise ValueError("test functions must be nonnegative")
        if not u:
            continue
        hood = set(u)
        for y in list(u):
            hood.update(_add(y, z) for z in kernel.jumps)
        integrand = {}
        for x in hood:
            g = _neg_generator(kernel, u, x)
            if g != 0.0:
                integrand[x] = g / (c + u.get(x, 0.0))
        for j, o in enumerate(xi.orbits):
            shifts = {tuple(q - p for q, p in zip(x, y)) for x in integrand for y in o.rep}
            best = 0.0
            for s in shifts:
                val = math.fsum(w * integrand.get(_add(y, s), 0.0) for y, w in o.rep.items())
                best = max(best, val)
            score[i, j] = best
    rows, cols = linear_sum_assignment(score, maximize=True)
    return float(math.fsum(score[rows, cols]))
