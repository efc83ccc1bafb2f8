"""Stratified well-ordered domains.

A depth-``k`` canonical scaffold is the set of ``(k+1)``-tuples of naturals
under lexicographic order. Every strict initial segment below a point ``x``
is infinite for ``k >= 1``, but it injects into the depth-``(k-1)`` scaffold
by Cantor-pairing the two leading coordinates. That injection is what lets
the ladder compression recurse one level down.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

from .errors import ArityMismatch, ConfigError, DepthUnsupported, NotAPredecessor

Point = tuple  # tuple[int, ...]

LESS, EQUAL, GREATER = -1, 0, 1


def cantor_pair(a: int, b: int) -> int:
    """Cantor pairing ``(a+b)(a+b+1)/2 + b``."""
    s = a + b
    return s * (s + 1) // 2 + b


def cantor_unpair(z: int) -> tuple[int, int]:
    """Inverse of :func:`cantor_pair`."""
    w = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


@dataclass(frozen=True)
class Scaffold:
    depth: int = 0

    def __post_init__(self):
        if not isinstance(self.depth, int) or self.depth < 0:
            raise ConfigError(f"scaffold depth must be a natural, got {self.depth!r}", field="depth")

    @property
    def arity(self) -> int:
        return self.depth + 1

    def lower(self) -> "Scaffold":
        if self.depth == 0:
            raise DepthUnsupported("depth-0 scaffold has no lower stratum")
        return Scaffold(self.depth - 1)

    def check(self, x) -> Point:
        if not isinstance(x, tuple) or len(x) != self.arity:
            raise ArityMismatch(
                f"expected a {self.arity}-tuple for depth {self.depth}, got {x!r}"
            )
        for c in x:
            if not isinstance(c, int) or isinstance(c, bool) or c < 0:
                raise ArityMismatch(f"coordinates must be naturals, got {x!r}")
        return x

    def compare(self, x: Point, y: Point) -> int:
        return compare(self, x, y)

    def predecessors(self, x: Point) -> frozenset:
        return predecessors(self, x)

    def segment_index(self, x: Point, y: Point) -> Point:
        return segment_index(self, x, y)

    def segment_point(self, x: Point, idx: Point):
        return segment_point(self, x, idx)

    def to_json(self) -> dict:
        return {"depth": self.depth}

    @classmethod
    def from_json(cls, obj) -> "Scaffold":
        if not isinstance(obj, dict) or "depth" not in obj:
            raise ConfigError("expected an object with a 'depth' key", field="scaffold")
        depth = obj["depth"]
        if not isinstance(depth, int) or depth < 0:
            raise ConfigError(f"depth must be a natural, got {depth!r}", field="depth")
        return cls(depth)


def compare(s: Scaffold, x: Point, y: Point) -> int:
    """Three-way lexicographic comparison; returns LESS, EQUAL or GREATER."""
    s.check(x)
    s.check(y)
    if x == y:
        return EQUAL
    return LESS if x < y else GREATER


def predecessors(s: Scaffold, x: Point) -> frozenset:
    """All points strictly below ``x``; only defined at depth 0."""
    if s.depth != 0:
        raise DepthUnsupported(
            f"initial segments are infinite at depth {s.depth}; use segment_index"
        )
    s.check(x)
    return frozenset((i,) for i in range(x[0]))


def segment_index(s: Scaffold, x: Point, y: Point) -> Point:
    """Re-index predecessor ``y`` of ``x`` into the depth-(k-1) scaffold.

    The map pairs the two leading coordinates,
    ``(y0, y1, y2, ..., yk) -> (pair(y0, y1), y2, ..., yk)``, which is
    injective on all of the depth-k scaffold and hence on each segment.
    """
    if s.depth == 0:
        raise DepthUnsupported("segment_index needs depth >= 1")
    if compare(s, y, x) != LESS:
        raise NotAPredecessor(f"{y!r} is not below {x!r}")
    return (cantor_pair(y[0], y[1]),) + y[2:]


def segment_point(s: Scaffold, x: Point, idx: Point):
    """Inverse of :func:`segment_index` for a fixed ``x``.

    Returns the predecessor of ``x`` with the given index, or ``None`` when
    the index decodes to a point that is not below ``x``.
    """
    if s.depth == 0:
        raise DepthUnsupported("segment_point needs depth >= 1")
    s.lower().check(idx)
    a, b = cantor_unpair(idx[0])
    y = (a, b) + idx[1:]
    return y if y < x else None


def iter_points(s: Scaffold, bound: int) -> Iterator[Point]:
    """Points whose coordinates all lie in ``range(bound)``, in scaffold order."""
    return itertools.product(range(bound), repeat=s.arity)


def point_from_json(obj, arity: int | None = None) -> Point:
    if isinstance(obj, int) and not isinstance(obj, bool):
        obj = [obj]
    if not isinstance(obj, (list, tuple)) or not all(
        isinstance(c, int) and not isinstance(c, bool) and c >= 0 for c in obj
    ):
        raise ConfigError(f"a point must be a JSON array of naturals, got {obj!r}")
    if arity is not None and len(obj) != arity:
        raise ConfigError(f"expected {arity} coordinates, got {obj!r}")
    return tuple(obj)


def sample_from_json(obj, arity: int | None = None) -> tuple:
    if not isinstance(obj, (list, tuple)):
        raise ConfigError(f"a sample must be a JSON array of points, got {obj!r}")
    return tuple(point_from_json(p, arity) for p in obj)


def point_to_json(x) -> list | int:
    return list(x) if isinstance(x, tuple) else x
