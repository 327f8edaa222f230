"""
Sparse sub-probability measures on Z^d
======================================

A :class:`SparseMeasure` is a finitely supported nonnegative weight map on the
integer lattice with total mass at most one. Lattice points are plain tuples of
ints. Translation classes are represented by :class:`Orbit` (a measure shifted
so that its lexicographically smallest support point sits at the origin) and
points of the compactified orbit space by :class:`CompactPoint`, a finite
collection of orbits with total mass at most one.

All objects are immutable once built.
"""
from __future__ import annotations

import json
import math
import operator
from itertools import product
from typing import Iterable, Mapping, Sequence

MASS_EPS = 1e-12
WEIGHT_EPS = 1e-15

__all__ = [
    "MASS_EPS",
    "WEIGHT_EPS",
    "as_point",
    "SparseMeasure",
    "Orbit",
    "CompactPoint",
    "mass",
    "shift",
    "canonicalize",
    "prune",
    "uniform",
    "uniform_box",
    "approximating_sequence",
]


def as_point(x, dim: int | None = None) -> tuple[int, ...]:
    """Coerce an int or a sequence of ints into a lattice point tuple."""
    if isinstance(x, tuple):
        pt = x if all(type(c) is int for c in x) else tuple(int(c) for c in x)
    elif hasattr(x, "__len__"):
        pt = tuple(int(c) for c in x)
    else:
        pt = (operator.index(x),)
    if dim is not None and len(pt) != dim:
        raise ValueError(f"point {pt} has dimension {len(pt)}, expected {dim}")
    return pt


def _add(x: tuple[int, ...], y: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(a + b for a, b in zip(x, y))


class SparseMeasure:
    """Finitely supported nonnegative measure on Z^d with mass <= 1.

    Parameters
    ----------
    entries : mapping or iterable of (point, weight)
        Weights per lattice point. Points may be ints when ``dim == 1``.
        Weights below ``WEIGHT_EPS`` are dropped; repeated points are summed.
    dim : int, optional
        Lattice dimension. Inferred from the first entry when omitted.
    """

    __slots__ = ("_dim", "_w", "_mass", "_hash")

    def __init__(self, entries=(), dim: int | None = None):
        items = entries.items() if isinstance(entries, Mapping) else entries
        w: dict[tuple[int, ...], float] = {}
        for x, weight in items:
            pt = as_point(x, dim)
            if dim is None:
                dim = len(pt)
            weight = float(weight)
            if not weight >= 0.0 or math.isinf(weight):
                raise ValueError(f"invalid weight {weight!r} at {pt}")
            w[pt] = w.get(pt, 0.0) + weight
        if dim is None:
            raise ValueError("dimension of an empty measure must be given")
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self._dim = dim
        self._w = {x: v for x, v in w.items() if v >= WEIGHT_EPS}
        self._mass = math.fsum(self._w.values())
        if self._mass > 1.0 + MASS_EPS:
            raise ValueError(f"total mass {self._mass!r} exceeds 1")
        self._hash = None

    @classmethod
    def _trusted(cls, w: dict, dim: int) -> "SparseMeasure":
        # Caller guarantees pruned positive weights and valid points.
        obj = cls.__new__(cls)
        obj._dim = dim
        obj._w = w
        obj._mass = math.fsum(w.values())
        if obj._mass > 1.0 + MASS_EPS:
            raise ValueError(f"total mass {obj._mass!r} exceeds 1")
        obj._hash = None
        return obj

    @classmethod
    def delta(cls, x=0, dim: int | None = None, weight: float = 1.0) -> "SparseMeasure":
        pt = as_point(x, dim)
        return cls({pt: weight}, dim=len(pt))

    @classmethod
    def empty(cls, dim: int) -> "SparseMeasure":
        return cls((), dim=dim)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def support(self) -> list[tuple[int, ...]]:
        return list(self._w)

    def items(self):
        return self._w.items()

    def __getitem__(self, x) -> float:
        return self._w.get(as_point(x), 0.0)

    def get(self, x, default: float = 0.0) -> float:
        return self._w.get(x, default)

    def __contains__(self, x) -> bool:
        return as_point(x) in self._w

    def __len__(self) -> int:
        return len(self._w)

    def __iter__(self):
        return iter(self._w)

    def __bool__(self) -> bool:
        return bool(self._w)

    def mass(self) -> float:
        return self._mass

    def shift(self, x) -> "SparseMeasure":
        pt = as_point(x, self._dim)
        return SparseMeasure._trusted({_add(y, pt): v for y, v in self._w.items()}, self._dim)

    def scale(self, factor: float) -> "SparseMeasure":
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        return SparseMeasure(((x, factor * v) for x, v in self._w.items()), dim=self._dim)

    def __add__(self, other: "SparseMeasure") -> "SparseMeasure":
        _check_dims(self, other)
        w = dict(self._w)
        for x, v in other._w.items():
            w[x] = w.get(x, 0.0) + v
        return SparseMeasure(w, dim=self._dim)

    def __mul__(self, factor: float) -> "SparseMeasure":
        return self.scale(factor)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMeasure):
            return NotImplemented
        return self._dim == other._dim and self._w == other._w

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._dim, frozenset(self._w.items())))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{x}: {v:.6g}" for x, v in self.sorted_items())
        return f"SparseMeasure({{{body}}}, dim={self._dim})"

    def sorted_items(self) -> list[tuple[tuple[int, ...], float]]:
        return sorted(self._w.items())

    def bounding_box(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if not self._w:
            raise ValueError("empty measure has no bounding box")
        pts = list(self._w)
        lo = tuple(min(p[i] for p in pts) for i in range(self._dim))
        hi = tuple(max(p[i] for p in pts) for i in range(self._dim))
        return lo, hi

    def diameter(self) -> int:
        """Largest sup-norm distance between two support points."""
        if not self._w:
            return 0
        lo, hi = self.bounding_box()
        return max(h - l for l, h in zip(lo, hi))

    def to_dict(self) -> dict:
        return {"dim": self._dim, "entries": [[list(x), v] for x, v in self.sorted_items()]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SparseMeasure":
        dim = int(data["dim"])
        return cls(((tuple(x), w) for x, w in data["entries"]), dim=dim)

    def to_json(self) -> str:
        # json uses repr() for floats: shortest round-trip decimal
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SparseMeasure":
        return cls.from_dict(json.loads(text))


def _check_dims(a, b) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def mass(mu: SparseMeasure) -> float:
    return mu.mass()


def shift(mu: SparseMeasure, x) -> SparseMeasure:
    """Translate ``mu`` by the lattice vector ``x`` (convolution with a point mass)."""
    return mu.shift(x)


def prune(mu: SparseMeasure, eps: float) -> SparseMeasure:
    """Drop entries with weight strictly below ``eps``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return SparseMeasure._trusted({x: v for x, v in mu.items() if v >= eps}, mu.dim)


class Orbit:
    """Translation class of a nonempty measure, stored in canonical position."""

    __slots__ = ("rep",)

    def __init__(self, mu: SparseMeasure):
        if not mu:
            raise ValueError("cannot canonicalize the empty measure")
        anchor = min(mu.support)
        if any(anchor):
            mu = mu.shift(tuple(-c for c in anchor))
        # fixed insertion order makes downstream float sums representative-independent
        self.rep = SparseMeasure._trusted(dict(mu.sorted_items()), mu.dim)

    @property
    def dim(self) -> int:
        return self.rep.dim

    def mass(self) -> float:
        return self.rep.mass()

    def sort_key(self):
        return (-self.rep.mass(), tuple(self.rep.sorted_items()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Orbit):
            return NotImplemented
        return self.rep == other.rep

    def __hash__(self) -> int:
        return hash(self.rep)

    def __repr__(self) -> str:
        return f"Orbit({self.rep!r})"


def canonicalize(mu: SparseMeasure) -> Orbit:
    """Orbit of ``mu``: the shift with lexicographically smallest support point at 0."""
    return Orbit(mu)


class CompactPoint:
    """Finite collection of orbits with total mass <= 1.

    Accepts orbits or raw measures; measures are canonicalized and empty ones
    are ignored. The stored order is (mass descending, canonical support).
    """

    __slots__ = ("orbits", "dim")

    def __init__(self, orbits: Iterable[Orbit | SparseMeasure] = (), dim: int | None = None):
        out = []
        for o in orbits:
            if isinstance(o, SparseMeasure):
                if not o:
                    continue
                o = Orbit(o)
            if dim is None:
                dim = o.dim
            elif o.dim != dim:
                raise ValueError(f"dimension mismatch: {o.dim} vs {dim}")
            out.append(o)
        if dim is None:
            raise ValueError("dimension of an empty CompactPoint must be given")
        total = math.fsum(o.mass() for o in out)
        if total > 1.0 + MASS_EPS:
            raise ValueError(f"total orbit mass {total!r} exceeds 1")
        out.sort(key=Orbit.sort_key)
        self.orbits: tuple[Orbit, ...] = tuple(out)
        self.dim = dim

    def mass(self) -> float:
        return math.fsum(o.mass() for o in self.orbits)

    def __len__(self) -> int:
        return len(self.orbits)

    def __iter__(self):
        return iter(self.orbits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompactPoint):
            return NotImplemented
        return self.dim == other.dim and self.orbits == other.orbits

    def __hash__(self) -> int:
        return hash((self.dim, self.orbits))

    def __repr__(self) -> str:
        return f"CompactPoint({list(self.orbits)!r})"

    def to_dict(self) -> dict:
        return {"dim": self.dim, "orbits": [o.rep.to_dict() for o in self.orbits]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "CompactPoint":
        dim = int(data["dim"])
        return cls((SparseMeasure.from_dict(m) for m in data["orbits"]), dim=dim)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CompactPoint":
        return cls.from_dict(json.loads(text))


def uniform(points: Sequence, weight: float = 1.0, dim: int | None = None) -> SparseMeasure:
    """``weight`` times the uniform distribution on a finite set of points."""
    pts = [as_point(p, dim) for p in points]
    if not pts:
        raise ValueError("need at least one point")
    return SparseMeasure({p: weight / len(pts) for p in pts}, dim=len(pts[0]))


def uniform_box(n: int, dim: int = 1, weight: float = 1.0) -> SparseMeasure:
    """``weight`` times the uniform distribution on ``[-n, n]^dim``."""
    side = range(-n, n + 1)
    return uniform(list(product(side, repeat=dim)), weight=weight)


def approximating_sequence(xi: CompactPoint, n: int, spacing: int) -> SparseMeasure:
    """Probability measure whose orbit approaches ``xi`` as ``n`` grows.

    Orbit representatives are placed along the first axis at centers
    ``i * spacing * n`` and the missing mass is spread uniformly over
    ``[-n, n]^d``.
    """
    if n < 1 or spacing < 1:
        raise ValueError("n and spacing must be positive")
    gap = spacing * n
    widest = max((o.rep.diameter() for o in xi.orbits), default=0)
    if len(xi) > 1 and gap <= 2 * widest:
        raise ValueError(f"spacing*n = {gap} too small for orbit supports of diameter {widest}")
    d = xi.dim
    w: dict[tuple[int, ...], float] = {}
    for i, o in enumerate(xi.orbits):
        center = (i * gap,) + (0,) * (d - 1)
        for x, v in o.rep.items():
            y = _add(x, center)
            w[y] = w.get(y, 0.0) + v
    deficit = 1.0 - xi.mass()
    if deficit > 0:
        side = range(-n, n + 1)
        each = deficit / (2 * n + 1) ** d
        for x in product(side, repeat=d):
            w[x] = w.get(x, 0.0) + each
    return SparseMeasure(w, dim=d)
