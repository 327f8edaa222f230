"""
Translation-invariant test functions and the orbit metric
=========================================================

The countable family used here consists of difference indicators

    f(u_1, ..., u_k) = prod_{i=2..k} 1{u_i - u_1 = z_i},

indexed by an arity ``k >= 2`` and an offset tuple ``(z_2, ..., z_k)``.
Each one is diagonally translation invariant with sup-norm one. For a
finitely supported measure

    Lambda(f, mu) = sum_x mu(x) prod_i mu(x + z_i)

is a finite sum over the support.

Enumeration order
-----------------
Functions come in shells ``s = 0, 1, 2, ...``. Shell ``s`` holds the blocks
``(k, rho)`` with ``(k - 2) + rho = s`` for ``k = 2, ..., s + 2``; block
``(k, rho)`` lists, in lexicographic order, every offset tuple whose largest
coordinate in absolute value is exactly ``rho``. Index 1 is therefore the
self-pair indicator ``k = 2, z_2 = 0``.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from itertools import product
from typing import Iterator

from .measures import CompactPoint, SparseMeasure

DEFAULT_R = 48

__all__ = [
    "DEFAULT_R",
    "TestFunction",
    "MetricResult",
    "enumerate_testfn",
    "block_size",
    "lambda_functional",
    "lambda_sum",
    "metric_D",
]


@dataclass(frozen=True)
class TestFunction:
    k: int
    offsets: tuple[tuple[int, ...], ...]
    index: int

    __test__ = False  # keep pytest from collecting this class

    @property
    def sup_norm(self) -> float:
        return 1.0

    def __call__(self, *u) -> float:
        if len(u) != self.k:
            raise ValueError(f"expected {self.k} arguments, got {len(u)}")
        base = u[0]
        for z, ui in zip(self.offsets, u[1:]):
            if any(b + c != a for a, b, c in zip(ui, base, z)):
                return 0.0
        return 1.0


@dataclass(frozen=True)
class MetricResult:
    value: float
    truncation_error: float


def block_size(k: int, rho: int, dim: int) -> int:
    """Number of offset tuples of arity ``k`` with sup-norm exactly ``rho``."""
    m = dim * (k - 1)
    if rho == 0:
        return 1
    return (2 * rho + 1) ** m - (2 * rho - 1) ** m


def _blocks() -> Iterator[tuple[int, int]]:
    s = 0
    while True:
        for k in range(2, s + 3):
            yield k, s - (k - 2)
        s += 1


def _block_tuples(k: int, rho: int, dim: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    m = dim * (k - 1)
    for flat in product(range(-rho, rho + 1), repeat=m):
        if max(map(abs, flat), default=0) == rho:
            yield tuple(flat[i:i + dim] for i in range(0, m, dim))


class _Enumeration:
    def __init__(self, dim: int):
        self.dim = dim
        self.starts: list[int] = []  # 0-based index of each block's first function
        self.keys: list[tuple[int, int]] = []
        self.total = 0
        self.cache: dict[int, list[TestFunction]] = {}
        self._blocks = _blocks()

    def get(self, r: int) -> TestFunction:
        while self.total < r:
            k, rho = next(self._blocks)
            self.starts.append(self.total)
            self.keys.append((k, rho))
            self.total += block_size(k, rho, self.dim)
        b = bisect_right(self.starts, r - 1) - 1
        if b not in self.cache:
            k, rho = self.keys[b]
            lo = self.starts[b]
            self.cache[b] = [
                TestFunction(k, offs, lo + j + 1)
                for j, offs in enumerate(_block_tuples(k, rho, self.dim))
            ]
        return self.cache[b][r - 1 - self.starts[b]]


_ENUMS: dict[int, _Enumeration] = {}


def enumerate_testfn(r: int, dim: int = 1) -> TestFunction:
    """The ``r``-th test function (1-based) on ``Z^dim``."""
    if r < 1:
        raise ValueError("index must be >= 1")
    if dim not in _ENUMS:
        _ENUMS[dim] = _Enumeration(dim)
    return _ENUMS[dim].get(r)


def lambda_functional(f: TestFunction, mu: SparseMeasure) -> float:
    """Integral of ``f`` against the ``k``-fold product of ``mu``."""
    if f.offsets and len(f.offsets[0]) != mu.dim:
        raise ValueError(f"dimension mismatch: {len(f.offsets[0])} vs {mu.dim}")
    total = 0.0
    get = mu.get
    for x, w in mu.items():
        prod = w
        for z in f.offsets:
            v = get(tuple(a + b for a, b in zip(x, z)), 0.0)
            if v == 0.0:
                prod = 0.0
                break
            prod *= v
        total += prod
    return total


def lambda_sum(f: TestFunction, xi: CompactPoint) -> float:
    """Sum of ``lambda_functional`` over the orbits of ``xi``."""
    return math.fsum(lambda_functional(f, o.rep) for o in xi.orbits)


def metric_D(xi1: CompactPoint, xi2: CompactPoint, R: int = DEFAULT_R) -> MetricResult:
    """Truncated orbit metric; the untruncated value lies in ``[value, value + 2**-R]``."""
    if xi1.dim != xi2.dim:
        raise ValueError(f"dimension mismatch: {xi1.dim} vs {xi2.dim}")
    if R < 1:
        raise ValueError("R must be >= 1")
    terms = []
    for r in range(1, R + 1):
        f = enumerate_testfn(r, xi1.dim)
        diff = abs(lambda_sum(f, xi1) - lambda_sum(f, xi2))
        terms.append(math.ldexp(diff, -r) / (1.0 + f.sup_norm))
    return MetricResult(math.fsum(terms), math.ldexp(1.0, -R))
