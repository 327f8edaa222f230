"""
Variational problems on a truncation box
========================================

Measures are parametrized as ``mu = phi**2`` with ``phi >= 0`` and
``||phi||_2 = 1`` on the cube ``[-R, R]^d``, with ``phi = 0`` outside. Then
``I(mu) = <phi, (-L) phi>`` exactly, where ``L`` is the generator restricted to
the box with absorbing boundary, so every objective below is smooth.

* linear tilt:     sup_mu { sum_x V(x) mu(x) - I(mu) }
  (top eigenvalue of ``L + diag V``; also solvable by gradient ascent)
* quadratic tilt:  sup_mu { sum_{x,y} V(x-y) mu(x) mu(y) - I(mu) }
* intersection-rate curve: minimizers of ``I(mu) - theta * sum_x mu(x)^2``
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Mapping, NamedTuple, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .decompose import cluster_decompose
from .measures import SparseMeasure, as_point
from .rate import rate_I
from .walk import RateKernel, stream_rng

__all__ = [
    "DifferencePotential",
    "VariationalSolution",
    "CurvePoint",
    "MaximizerReport",
    "BoxTooSmallWarning",
    "PreconditionError",
    "Box",
    "pair_energy",
    "solve_linear_tilt",
    "solve_quadratic_tilt",
    "intersection_rate_curve",
    "check_maximizer_properties",
]

ARMIJO = 1e-4
GRAD_TOL = 1e-9
MAX_ITER = 50_000
DENSE_SITES = 1500
N_STARTS = 16


class BoxTooSmallWarning(UserWarning):
    """The optimizer carries non-negligible mass on the box boundary."""


class PreconditionError(ValueError):
    pass


class DifferencePotential:
    """Symmetric nonnegative pair potential ``V(x, y) = V(x - y)`` with finite support.

    Missing ``-z`` entries are filled in from ``z``; inconsistent pairs and a
    maximum away from the origin are rejected.
    """

    def __init__(self, values: Mapping, dim: int | None = None):
        vals: dict[tuple[int, ...], float] = {}
        for z, v in values.items():
            z = as_point(z, dim)
            dim = len(z) if dim is None else dim
            v = float(v)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"V{z} must be finite and nonnegative")
            if v > 0:
                vals[z] = v
        if dim is None:
            raise ValueError("dimension of an empty potential must be given")
        for z, v in list(vals.items()):
            mz = tuple(-c for c in z)
            if mz in vals and vals[mz] != v:
                raise ValueError(f"asymmetric potential at {z}: {v} vs {vals[mz]}")
            vals[mz] = v
        self.dim = dim
        self.values = dict(sorted(vals.items()))
        zero = (0,) * dim
        self.v0 = self.values.get(zero, 0.0)
        if self.values and max(self.values.values()) > self.v0:
            raise ValueError("V must take its maximum at the origin")

    @classmethod
    def point(cls, v: float, dim: int = 1) -> "DifferencePotential":
        """``v`` times the indicator of ``x == y``."""
        return cls({(0,) * dim: v}, dim=dim)

    def diameter(self) -> int:
        """Largest l1 distance between two points of the support."""
        pts = list(self.values)
        return max((sum(abs(a - b) for a, b in zip(p, q)) for p in pts for q in pts), default=0)

    def __repr__(self) -> str:
        return f"DifferencePotential({self.values}, dim={self.dim})"


def pair_energy(V: DifferencePotential, mu: SparseMeasure) -> float:
    """``sum_{x,y} V(x - y) mu(x) mu(y)``."""
    total = []
    for z, vz in V.values.items():
        for x, w in mu.items():
            other = mu.get(tuple(a - b for a, b in zip(x, z)), 0.0)
            if other:
                total.append(vz * w * other)
    return math.fsum(total)


class Box:
    """Sites of ``[-radius, radius]^dim`` with generator and pair operators."""

    def __init__(self, radius: int, dim: int):
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        self.radius = radius
        self.dim = dim
        side = range(-radius, radius + 1)
        self.sites = [tuple(p) for p in product(side, repeat=dim)]
        self.index = {p: i for i, p in enumerate(self.sites)}
        self.n = len(self.sites)
        self.center = self.index[(0,) * dim]
        self.boundary = np.array([max(map(abs, p), default=0) == radius for p in self.sites])

    def _shift_matrix(self, weights: Mapping) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for i, p in enumerate(self.sites):
            for z, w in weights.items():
                j = self.index.get(tuple(a + b for a, b in zip(p, z)))
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(w)
        M = sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))
        return M.toarray() if self.n <= DENSE_SITES else M

    def neg_generator(self, kernel: RateKernel) -> sp.csr_matrix:
        """``-L`` with absorbing boundary: jumps leaving the box still cost rate."""
        A = self._shift_matrix(kernel.jumps)
        if isinstance(A, np.ndarray):
            return kernel.total_rate * np.eye(self.n) - A
        return (sp.identity(self.n, format="csr") * kernel.total_rate - A).tocsr()

    def pair_matrix(self, V: DifferencePotential) -> sp.csr_matrix:
        return self._shift_matrix(V.values)

    def site_vector(self, V: Mapping) -> np.ndarray:
        out = np.zeros(self.n)
        for x, v in V.items():
            x = as_point(x, self.dim)
            j = self.index.get(x)
            if j is None:
                raise ValueError(f"site potential at {x} lies outside the box")
            out[j] = float(v)
        return out

    def to_measure(self, mu: np.ndarray) -> SparseMeasure:
        return SparseMeasure({self.sites[i]: float(mu[i]) for i in np.flatnonzero(mu)},
                             dim=self.dim)

    def from_measure(self, mu: SparseMeasure) -> np.ndarray:
        out = np.zeros(self.n)
        for x, w in mu.items():
            out[self.index[x]] = w
        return out


@dataclass(frozen=True)
class VariationalSolution:
    value: float
    maximizer: SparseMeasure
    box_radius: int
    starts_used: int
    gradient_norm: float
    converged: bool = True
    boundary_mass: float = 0.0


def _project(phi: np.ndarray) -> np.ndarray:
    phi = np.maximum(phi, 0.0)
    nrm = np.linalg.norm(phi)
    if nrm == 0:
        raise FloatingPointError("projection of the zero vector")
    return phi / nrm


def _projected_grad_norm(phi: np.ndarray, g: np.ndarray) -> float:
    gt = g - (g @ phi) * phi
    # at phi_i = 0 only the outward (positive) direction is feasible
    gt = np.where((phi > 0) | (gt > 0), gt, 0.0)
    return float(np.linalg.norm(gt))


def _sphere_ascent(fun_grad, phi0: np.ndarray, tol: float = GRAD_TOL,
                   max_iter: int = MAX_ITER):
    """Projected gradient ascent on the nonnegative unit sphere.

    Backtracking with the Armijo condition (constant ``ARMIJO``, shrink 1/2).
    Stops when the projected gradient norm drops below ``tol``, when
    ``max_iter`` steps are used, or when no step improves the objective in
    floating point. Returns ``(phi, value, grad_norm, converged)``.
    """
    phi = _project(phi0)
    f, g = fun_grad(phi)
    step = 1.0
    gn = _projected_grad_norm(phi, g)
    for _ in range(max_iter):
        if gn < tol:
            return phi, f, gn, True
        s = step
        while True:
            cand = _project(phi + s * g)
            fc, gc = fun_grad(cand)
            # relative slack lets the iteration run below the rounding level of f
            slack = 4e-16 * max(1.0, abs(f))
            if fc >= f + ARMIJO * max(float(g @ (cand - phi)), 0.0) - slack:
                break
            s *= 0.5
            if s < 1e-14:
                # no representable improvement left
                return phi, f, gn, gn < math.sqrt(tol)
        phi, f, g = cand, fc, gc
        gn = _projected_grad_norm(phi, g)
        step = min(2.0 * s, 1e3)
    return phi, f, gn, gn < tol


def _boundary_mass(box: Box, mu: np.ndarray) -> float:
    return float(mu[box.boundary].sum())


def _warn_boundary(bm: float, tol: float | None, what: str) -> None:
    if tol is not None and bm > tol:
        warnings.warn(f"{what}: boundary mass {bm:.3g} exceeds {tol:g}; enlarge the box",
                      BoxTooSmallWarning, stacklevel=3)


def _top_eigpair(H, dense_limit: int = 2000, tol: float = 1e-13, max_iter: int = 200_000,
                 shift: float = 0.0):
    n = H.shape[0]
    if n <= dense_limit:
        dense = H if isinstance(H, np.ndarray) else H.toarray()
        w, vecs = scipy.linalg.eigh(dense, subset_by_index=[n - 1, n - 1])
        return float(w[0]), np.abs(vecs[:, 0])
    # shifted power iteration: H + shift*I is nonnegative definite
    x = np.ones(n) / math.sqrt(n)
    lam = -math.inf
    for _ in range(max_iter):
        y = H @ x + shift * x
        lam_new = float(x @ y) - shift
        x = y / np.linalg.norm(y)
        if abs(lam_new - lam) < tol * max(1.0, abs(lam_new)):
            lam = lam_new
            break
        lam = lam_new
    return float(x @ (H @ x)), np.abs(x)


def solve_linear_tilt(kernel: RateKernel, V: Mapping, box_radius: int,
                      method: str = "eigen", boundary_tol: float | None = 1e-6,
                      tol: float = GRAD_TOL, max_iter: int = MAX_ITER) -> VariationalSolution:
    """``sup { sum_x V(x) mu(x) - I(mu) }`` over probability measures on the box.

    ``method="eigen"`` takes the top eigenpair of ``L + diag V`` (dense
    symmetric solver up to 2000 sites, shifted power iteration above);
    ``method="gradient"`` runs projected gradient ascent from ``delta_0``
    instead. The maximizer is the squared Perron vector. A
    :class:`BoxTooSmallWarning` is issued when the maximizer puts more than
    ``boundary_tol`` mass on the box boundary.
    """
    box = Box(box_radius, kernel.dim)
    v = box.site_vector(V)
    negL = box.neg_generator(kernel)
    if method == "eigen":
        H = np.diag(v) - negL if isinstance(negL, np.ndarray) else (sp.diags(v) - negL).tocsr()
        value, phi = _top_eigpair(H, shift=2 * kernel.total_rate)
        phi = phi / np.linalg.norm(phi)
        gn, conv = _projected_grad_norm(phi, 2 * (v * phi - negL @ phi)), True
    elif method == "gradient":
        def fg(phi):
            Lphi = negL @ phi
            return float(v @ phi**2 - phi @ Lphi), 2 * (v * phi - Lphi)
        phi0 = np.zeros(box.n)
        phi0[box.center] = 1.0
        phi, value, gn, conv = _sphere_ascent(fg, phi0, tol, max_iter)
    else:
        raise ValueError(f"unknown method {method!r}")
    mu = phi**2
    bm = _boundary_mass(box, mu)
    _warn_boundary(bm, boundary_tol, "solve_linear_tilt")
    return VariationalSolution(value, box.to_measure(mu), box_radius, 1, gn, conv, bm)


def _quadratic_objective(negL, K):
    def fg(phi):
        psi = phi * phi
        Kpsi = K @ psi
        Lphi = negL @ phi
        return float(psi @ Kpsi - phi @ Lphi), 4 * phi * Kpsi - 2 * Lphi
    return fg


def _random_start(box: Box, rng: np.random.Generator) -> np.ndarray:
    sites = np.array(box.sites, dtype=float)
    center = rng.integers(-(box.radius // 2), box.radius // 2 + 1, size=box.dim)
    width = rng.uniform(0.5, max(1.0, box.radius / 4))
    dist = np.abs(sites - center).sum(axis=1)
    return rng.random(box.n) * np.exp(-dist / width) + 1e-300


def solve_quadratic_tilt(kernel: RateKernel, V: DifferencePotential, box_radius: int,
                         n_starts: int = N_STARTS, seed: int = 0, tol: float = GRAD_TOL,
                         max_iter: int = MAX_ITER, workers: int | None = None,
                         check_precondition: bool = True,
                         boundary_tol: float | None = 1e-6) -> VariationalSolution:
    """Maximize ``sum V(x-y) mu(x) mu(y) - I(mu)`` over probability measures on the box.

    Runs projected gradient ascent from ``delta_0`` and from ``n_starts``
    random localized profiles (start ``i`` seeded by ``(seed, i)``) and keeps
    the best value; ties go to the lexicographically smaller maximizer.
    The result always satisfies ``V(0) - total_rate <= value <= V(0)``.
    """
    if V.dim != kernel.dim:
        raise ValueError("dimension mismatch between kernel and potential")
    lam = kernel.total_rate
    if check_precondition and not V.v0 > lam:
        raise PreconditionError(f"need V(0) = {V.v0} > total jump rate {lam}")
    box = Box(box_radius, kernel.dim)
    fg = _quadratic_objective(box.neg_generator(kernel), box.pair_matrix(V))

    starts = []
    phi0 = np.zeros(box.n)
    phi0[box.center] = 1.0
    starts.append(phi0)
    for i in range(n_starts):
        starts.append(_random_start(box, stream_rng(seed, i)))

    def run(p):
        return _sphere_ascent(fg, p, tol, max_iter)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(p) for p in starts]
    phi, value, gn, conv = min(results, key=lambda r: (-r[1], tuple(r[0])))
    if not conv:
        warnings.warn(f"solve_quadratic_tilt: gradient norm {gn:.3g} above tolerance",
                      RuntimeWarning, stacklevel=2)
    if not (V.v0 - lam - 1e-12 <= value <= V.v0 + 1e-12):
        raise AssertionError(f"value {value} outside [V(0) - rate, V(0)]")
    mu = phi**2
    bm = _boundary_mass(box, mu)
    _warn_boundary(bm, boundary_tol, "solve_quadratic_tilt")
    return VariationalSolution(value, box.to_measure(mu), box_radius, len(starts), gn, conv, bm)


class CurvePoint(NamedTuple):
    theta: float
    y: float
    I_prime: float


def intersection_rate_curve(kernel: RateKernel, theta_grid: Sequence[float], box_radius: int,
                            tol: float = GRAD_TOL, max_iter: int = 5000) -> list[CurvePoint]:
    """Trace ``(sum mu^2, I(mu))`` along minimizers of ``I(mu) - theta * sum mu^2``.

    Each emitted pair is realized by an explicit probability measure, so the
    points upper-bound the intersection rate curve restricted to single
    orbits. Starts: the uniform measure on the box, ``delta_0`` and the
    previous grid point's optimizer. ``theta = inf`` yields ``delta_0``.
    """
    box = Box(box_radius, kernel.dim)
    negL = box.neg_generator(kernel)
    K = np.eye(box.n) if box.n <= DENSE_SITES else sp.identity(box.n, format="csr")
    out = []
    prev = None
    for theta in theta_grid:
        theta = float(theta)
        if theta < 0:
            raise ValueError("theta must be nonnegative")
        if math.isinf(theta):
            delta = SparseMeasure.delta((0,) * kernel.dim)
            out.append(CurvePoint(theta, 1.0, rate_I(kernel, delta)))
            continue
        fg = _quadratic_objective(negL, theta * K)
        delta = np.zeros(box.n)
        delta[box.center] = 1.0
        starts = [np.ones(box.n), delta] + ([prev] if prev is not None else [])
        results = [_sphere_ascent(fg, p, tol, max_iter) for p in starts]
        phi = max(results, key=lambda r: r[1])[0]
        prev = phi
        mu = box.to_measure(phi**2)
        y = math.fsum(w * w for _, w in mu.items())
        out.append(CurvePoint(theta, y, rate_I(kernel, mu)))
    return out


@dataclass(frozen=True)
class MaximizerReport:
    mass: float
    mass_ok: bool
    n_pieces: int
    single_piece: bool
    merge_gains: tuple[float, ...]
    merging_improves: bool
    passed: bool


def _best_merge(V: DifferencePotential, kernel: RateKernel, a: SparseMeasure, b: SparseMeasure):
    # shifts of b giving positive cross-interaction with a
    shifts = {tuple(p - z - q for p, z, q in zip(x, zz, y))
              for x in a for y in b for zz in V.values}
    base = pair_energy(V, a) - rate_I(kernel, a) + pair_energy(V, b) - rate_I(kernel, b)
    best = None
    for s in sorted(shifts):
        merged = a + b.shift(s)
        gain = pair_energy(V, merged) - rate_I(kernel, merged) - base
        if best is None or gain > best:
            best = gain
    return best


def check_maximizer_properties(kernel: RateKernel, V: DifferencePotential,
                               mu: SparseMeasure) -> MaximizerReport:
    """Check that a candidate maximizer is a single-cluster probability measure.

    Clusters use link radius ``diam(supp V) + 1`` and mass floor 1e-6. For
    every pair of clusters the best gain from translating one onto the other
    is reported; for a true maximizer with positive cross-interaction it is
    strictly positive.
    """
    m = mu.mass()
    pieces, _ = cluster_decompose(mu, V.diameter() + 1, 1e-6)
    gains = []
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            pi, pj = pieces[i], pieces[j]
            if pi.mass() + pj.mass() <= 1.0 + 1e-12:
                gains.append(_best_merge(V, kernel, pi, pj))
    mass_ok = abs(m - 1.0) <= 1e-8
    single = len(pieces) == 1
    improves = all(g > 0 for g in gains)
    return MaximizerReport(m, mass_ok, len(pieces), single, tuple(gains), improves,
                           mass_ok and single)
