"""
Translation-invariant random walks on Z^d
=========================================

A continuous-time walk jumps from ``x`` to ``x + z`` at rate ``a(z)``. The
rate kernel has finite support and is symmetric, ``a(z) = a(-z)``.

Simulation is exact (Gillespie): holding times are Exponential with the total
rate and displacements are drawn proportionally to ``a``. Each trajectory owns
its random stream, a Philox-4x64 counter-based generator keyed by a splitmix64
hash of ``(seed, replicate)``, so a trajectory depends only on those two
integers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping

import numpy as np

from .measures import SparseMeasure, as_point

__all__ = [
    "RateKernel",
    "Trajectory",
    "AssumptionReport",
    "srw",
    "splitmix64",
    "stream_rng",
    "check_assumptions",
    "integer_span_is_full",
    "apply_generator",
    "simulate",
    "occupation_measure",
    "occupation_times",
    "max_displacement",
]

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer (Steele, Lea and Flood)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def stream_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for replicate ``index`` under master ``seed``."""
    lo = splitmix64((seed & _MASK64) ^ splitmix64(index & _MASK64))
    hi = splitmix64(lo ^ 0xD1B54A32D192ED03)
    return np.random.Generator(np.random.Philox(key=lo | (hi << 64)))


class RateKernel:
    """Symmetric finite-range jump rates ``z -> a(z)`` on ``Z^dim``.

    Parameters
    ----------
    jumps : mapping from displacement to rate
        Every displacement must be nonzero with a positive rate, and the
        mapping must already be symmetric. Use :meth:`from_dict` to complete
        a one-sided specification.
    dim : int, optional
        Inferred from the displacements when omitted.
    """

    def __init__(self, jumps: Mapping, dim: int | None = None):
        rates: dict[tuple[int, ...], float] = {}
        for z, a in jumps.items():
            z = as_point(z, dim)
            dim = len(z) if dim is None else dim
            if not any(z):
                raise ValueError("zero displacement is not a jump")
            a = float(a)
            if not (a > 0 and math.isfinite(a)):
                raise ValueError(f"rate at {z} must be positive and finite, got {a}")
            rates[z] = a
        if not rates:
            raise ValueError("kernel needs at least one jump")
        for z, a in rates.items():
            mz = tuple(-c for c in z)
            if rates.get(mz) != a:
                raise ValueError(f"asymmetric rates: a{z}={a}, a{mz}={rates.get(mz)}")
        self.dim: int = dim
        self.jumps: dict[tuple[int, ...], float] = dict(sorted(rates.items()))
        self.total_rate: float = math.fsum(self.jumps.values())
        self.max_range: float = max(math.hypot(*z) for z in self.jumps)
        self._disp = np.array(list(self.jumps), dtype=np.int64)
        self._cum = np.cumsum(np.array(list(self.jumps.values()))) / self.total_rate

    def __repr__(self) -> str:
        return f"RateKernel({self.jumps}, dim={self.dim})"

    def __eq__(self, other) -> bool:
        return isinstance(other, RateKernel) and self.jumps == other.jumps

    def __hash__(self) -> int:
        return hash(tuple(self.jumps.items()))

    @classmethod
    def from_dict(cls, data: Mapping) -> "RateKernel":
        """Build from ``{"dim": d, "jumps": [[z, rate], ...]}``, completing symmetry."""
        dim = int(data["dim"])
        given: dict[tuple[int, ...], float] = {}
        for z, a in data["jumps"]:
            z = as_point(z, dim)
            if z in given and given[z] != float(a):
                raise ValueError(f"displacement {z} listed twice with different rates")
            given[z] = float(a)
        rates = dict(given)
        for z, a in given.items():
            mz = tuple(-c for c in z)
            if mz in given:
                if given[mz] != a:
                    raise ValueError(f"inconsistent rates for {z} and {mz}: {a} vs {given[mz]}")
            else:
                rates[mz] = a
        return cls(rates, dim=dim)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "jumps": [[list(z), a] for z, a in self.jumps.items()]}

    @classmethod
    def from_json(cls, text: str) -> "RateKernel":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def srw(dim: int = 1, total_rate: float = 1.0) -> RateKernel:
    """Nearest-neighbour simple random walk with the given total jump rate."""
    each = total_rate / (2 * dim)
    jumps = {}
    for i in range(dim):
        e = [0] * dim
        e[i] = 1
        jumps[tuple(e)] = each
        e[i] = -1
        jumps[tuple(e)] = each
    return RateKernel(jumps, dim=dim)


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of :func:`check_assumptions`.

    ``a5_certificate`` holds the displacement scale ``u_t``, its description
    and ``(1/t) log`` of the Poisson-Chernoff bound on
    ``P(sup_{s<=t} |X_s| >= u_t)`` at ``t = 1, 10, 100``. A1 (Feller) and
    A4 (translation invariance) hold by construction for bounded
    translation-invariant kernels and are not computed.
    """

    a2_total_rate: float
    a3_irreducible: bool
    a6_symmetric: bool
    a5_certificate: dict = field(default_factory=dict)


def integer_span_is_full(vectors, dim: int) -> bool:
    """Whether the integer vectors generate ``Z^dim`` as a group.

    Uses the determinant-gcd test: the span is all of ``Z^dim`` iff the gcd
    of the ``dim x dim`` minors of the generator matrix is 1.
    """
    vecs = [tuple(int(c) for c in v) for v in vectors]
    if len(vecs) < dim:
        return False
    g = 0
    for rows in combinations(vecs, dim):
        det = _int_det([list(r) for r in rows])
        g = math.gcd(g, det)
        if g == 1:
            return True
    return g == 1


def _int_det(m: list[list[int]]) -> int:
    # Bareiss fraction-free elimination; exact on ints.
    n = len(m)
    m = [row[:] for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _chernoff_exponent(total_rate: float, max_range: float, t: float) -> tuple[float, float]:
    u_t = math.e * max_range * total_rate * t * math.log(math.e + t)
    m = math.ceil(u_t / max_range)
    lt = total_rate * t
    log_bound = -lt + m * math.log(math.e * lt / m)
    return u_t, log_bound / t


def check_assumptions(kernel: RateKernel) -> AssumptionReport:
    cert = {
        "u_t": "e * R_max * total_rate * t * ln(e + t)",
        "bound": "P(N_t >= m) <= exp(-total_rate*t) (e*total_rate*t/m)^m, m = ceil(u_t/R_max)",
    }
    for t in (1, 10, 100):
        u_t, expo = _chernoff_exponent(kernel.total_rate, kernel.max_range, t)
        cert[t] = {"u_t": u_t, "exponent_per_t": expo}
    symmetric = all(kernel.jumps.get(tuple(-c for c in z)) == a for z, a in kernel.jumps.items())
    return AssumptionReport(
        a2_total_rate=kernel.total_rate,
        a3_irreducible=integer_span_is_full(kernel.jumps, kernel.dim),
        a6_symmetric=symmetric,
        a5_certificate=cert,
    )


def apply_generator(kernel: RateKernel, f: Mapping, x) -> float:
    """``(L f)(x) = sum_z a(z) [f(x+z) - f(x)]`` for finitely supported ``f``."""
    x = as_point(x, kernel.dim)
    fx = f.get(x, 0.0)
    return math.fsum(
        a * (f.get(tuple(p + q for p, q in zip(x, z)), 0.0) - fx)
        for z, a in kernel.jumps.items()
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Jump skeleton of a path on ``[0, horizon]``.

    ``jump_targets[i]`` is the state entered at ``jump_times[i]``.
    """

    start: tuple[int, ...]
    jump_times: np.ndarray
    jump_targets: np.ndarray
    horizon: float

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if len(self.jump_times) != len(self.jump_targets):
            raise ValueError("jump times and targets differ in length")
        if len(self.jump_times):
            if np.any(np.diff(self.jump_times) <= 0):
                raise ValueError("jump times must be strictly increasing")
            if self.jump_times[0] <= 0 or self.jump_times[-1] > self.horizon:
                raise ValueError("jump times must lie in (0, horizon]")

    @property
    def n_jumps(self) -> int:
        return len(self.jump_times)

    @property
    def dim(self) -> int:
        return len(self.start)

    def states(self) -> np.ndarray:
        """Visited states in order, starting state first; shape (n_jumps + 1, dim)."""
        return np.vstack([np.array(self.start, dtype=np.int64)[None, :],
                          self.jump_targets.reshape(-1, self.dim)])

    def durations(self) -> np.ndarray:
        times = np.concatenate([[0.0], self.jump_times, [self.horizon]])
        return np.diff(times)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (self.start == other.start and self.horizon == other.horizon
                and np.array_equal(self.jump_times, other.jump_times)
                and np.array_equal(self.jump_targets, other.jump_targets))


def simulate(kernel: RateKernel, t: float, start=None, seed: int = 0,
             replicate: int = 0) -> Trajectory:
    """Exact simulation of the walk on ``[0, t]`` from ``start``."""
    if not t > 0:
        raise ValueError("horizon t must be positive")
    start = (0,) * kernel.dim if start is None else as_point(start, kernel.dim)
    rng = stream_rng(seed, replicate)
    lam = kernel.total_rate
    # draw in batches sized to cover the Poisson count with high probability
    batch = int(lam * t + 4.0 * math.sqrt(lam * t) + 8)
    times = []
    choices = []
    clock = 0.0
    while True:
        hold = rng.standard_exponential(batch) / lam
        pick = rng.random(batch)
        arrive = clock + np.cumsum(hold)
        n = int(np.searchsorted(arrive, t, side="right"))
        times.append(arrive[:n])
        choices.append(pick[:n])
        if n < batch:
            break
        clock = arrive[-1]
    jt = np.concatenate(times)
    idx = np.searchsorted(kernel._cum, np.concatenate(choices), side="right")
    idx = np.minimum(idx, len(kernel._cum) - 1)
    steps = kernel._disp[idx]
    targets = np.cumsum(steps, axis=0) + np.array(start, dtype=np.int64)
    return Trajectory(start, jt, targets.reshape(-1, kernel.dim), float(t))


def occupation_times(traj: Trajectory) -> dict[tuple[int, ...], float]:
    """Total time spent at each visited site, final partial interval included."""
    states = traj.states()
    dur = traj.durations()
    out: dict[tuple[int, ...], float] = {}
    for s, d in zip(map(tuple, states.tolist()), dur.tolist()):
        out[s] = out.get(s, 0.0) + d
    return out


def occupation_measure(traj: Trajectory) -> SparseMeasure:
    """Normalized occupation measure ``L_t`` of the trajectory."""
    occ = occupation_times(traj)
    total = math.fsum(occ.values())
    return SparseMeasure({x: v / total for x, v in occ.items()}, dim=traj.dim)


def max_displacement(traj: Trajectory) -> float:
    """Largest Euclidean distance from the start over visited states."""
    if traj.n_jumps == 0:
        return 0.0
    diff = traj.jump_targets - np.array(traj.start, dtype=np.int64)
    return float(np.sqrt((diff.astype(float) ** 2).sum(axis=1)).max())
