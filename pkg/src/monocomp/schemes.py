"""Monotone compression schemes.

A scheme is a compressor ``sigma`` that keeps a bounded sub-multiset of the
input sample (plus optional side information) and a reconstructor ``eta``
that maps the kept elements back to a finite set which must contain every
element of the original sample.

Samples are tuples of hashable points; scaffold points are tuples of
naturals. Reconstructions are finite sets. For ladder schemes they are lazy
:class:`collections.abc.Set` objects so membership can be decided without
materialising large initial segments.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from collections.abc import Set
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import (
    CapExceeded,
    ConfigError,
    ContractError,
    InvalidSideInfo,
    SampleNotTabulated,
    SampleTooLarge,
)
from .scaffold import Scaffold, cantor_pair, cantor_unpair, point_from_json, point_to_json

log = logging.getLogger(__name__)

DEFAULT_CAP = 250_000
EMPTY = frozenset()


@dataclass(frozen=True)
class SideInfo:
    value: int = 0
    bit_budget: int = 0

    def __post_init__(self):
        if self.value < 0 or self.bit_budget < 0 or self.value >= 1 << self.bit_budget:
            raise InvalidSideInfo(
                f"side value {self.value} does not fit in {self.bit_budget} bits"
            )

    @classmethod
    def encode(cls, value: int) -> "SideInfo":
        """Binary encoding with the budget equal to the bit length of ``value``."""
        return cls(value, value.bit_length())


NO_SIDE = SideInfo()


# -- reconstructions -------------------------------------------------------


@dataclass(frozen=True)
class OmegaRegion(Set):
    """``{(0,), (1,), ..., (top,)}``: everything up to a depth-0 point."""

    top: int

    def __contains__(self, y):
        return (
            isinstance(y, tuple)
            and len(y) == 1
            and isinstance(y[0], int)
            and 0 <= y[0] <= self.top
        )

    def __iter__(self):
        return ((i,) for i in range(self.top + 1))

    def __len__(self):
        return self.top + 1


@dataclass(frozen=True)
class LadderRegion(Set):
    """``{top}`` plus the predecessors of ``top`` whose segment index lies in
    ``lower`` (a finite set one stratum down)."""

    top: tuple
    lower: Set

    def __contains__(self, y):
        if not isinstance(y, tuple) or len(y) != len(self.top):
            return False
        if y == self.top:
            return True
        if not y < self.top:
            return False
        return ((cantor_pair(y[0], y[1]),) + y[2:]) in self.lower

    def __iter__(self):
        yield self.top
        for u in self.lower:
            a, b = cantor_unpair(u[0])
            y = (a, b) + u[1:]
            if y < self.top:
                yield y

    def __len__(self):
        return sum(1 for _ in self)


# -- the scheme record -----------------------------------------------------

Sigma = Callable[[tuple], "tuple[tuple, SideInfo]"]
Eta = Callable[[tuple, SideInfo], Set]


@dataclass(frozen=True)
class MonotoneScheme:
    """Compressor/reconstructor pair of size ``d``.

    ``max_input`` is ``None`` for uniform schemes. ``cover`` optionally
    computes the union of ``eta`` over all subsamples of size at most ``d``
    in closed form; learners fall back to enumeration when it is absent.
    ``descriptor`` holds the JSON form when the scheme is serialisable.
    """

    d: int
    sigma: Sigma
    eta: Eta
    max_input: int | None = None
    name: str = "scheme"
    side_bits: int = 0
    descriptor: dict | None = field(default=None, compare=False)
    cover: Callable[[tuple], Set] | None = field(default=None, compare=False)

    @property
    def uniform(self) -> bool:
        return self.max_input is None

    def compress(self, sample) -> tuple[tuple, SideInfo]:
        return compress(self, sample)

    def reconstruct(self, kept, side: SideInfo = NO_SIDE) -> Set:
        return reconstruct(self, kept, side)


def compress(scheme: MonotoneScheme, sample) -> tuple[tuple, SideInfo]:
    sample = tuple(sample)
    if scheme.max_input is not None and len(sample) > scheme.max_input:
        raise SampleTooLarge(
            f"{scheme.name} handles samples of size <= {scheme.max_input}, got {len(sample)}"
        )
    kept, side = scheme.sigma(sample)
    return tuple(kept), side


def reconstruct(scheme: MonotoneScheme, kept, side: SideInfo = NO_SIDE) -> Set:
    if not isinstance(side, SideInfo):
        side = SideInfo(*side)
    return scheme.eta(tuple(kept), side)


def is_submultiset(small: Sequence, big: Sequence) -> bool:
    return not (Counter(small) - Counter(big))


def diagnose(scheme: MonotoneScheme, sample) -> str | None:
    """Why ``scheme`` fails on ``sample``, or ``None`` when it succeeds."""
    sample = tuple(sample)
    try:
        kept, side = compress(scheme, sample)
    except ContractError as exc:
        return f"compress raised {type(exc).__name__}: {exc}"
    if not is_submultiset(kept, sample):
        return f"compression {kept!r} is not a subsequence of the sample"
    if len(kept) > scheme.d:
        return f"compression has size {len(kept)} > d={scheme.d}"
    try:
        region = reconstruct(scheme, kept, side)
    except ContractError as exc:
        return f"reconstruct raised {type(exc).__name__}: {exc}"
    for x in sample:
        if x not in region:
            return f"reconstruction misses {x!r}"
    return None


def validate(scheme: MonotoneScheme, sample) -> bool:
    reason = diagnose(scheme, sample)
    if reason is not None:
        log.debug("%s fails on %r: %s", scheme.name, sample, reason)
    return reason is None


def exhaustive_counterexample(scheme, pool, p: int, cap: int = DEFAULT_CAP):
    """First size-``p`` subset of ``pool`` (in pool order) the scheme fails on."""
    pool = list(pool)
    if math.comb(len(pool), p) > cap:
        raise CapExceeded(f"C({len(pool)}, {p}) exceeds the enumeration cap {cap}")
    for sample in itertools.combinations(pool, p):
        if not validate(scheme, sample):
            return sample
    return None


def exhaustive_validate(scheme, pool, p: int, cap: int = DEFAULT_CAP) -> bool:
    return exhaustive_counterexample(scheme, pool, p, cap) is None


# -- ladder ----------------------------------------------------------------


def _ladder_pick(depth: int, pts: list) -> list[int]:
    if not pts:
        return []
    top = max(pts)
    i_top = pts.index(top)
    if depth == 0:
        return [i_top]
    rest = [i for i, p in enumerate(pts) if p != top]
    lowered = [(cantor_pair(pts[i][0], pts[i][1]),) + pts[i][2:] for i in rest]
    picked = _ladder_pick(depth - 1, lowered)
    return sorted([i_top] + [rest[j] for j in picked])


def _ladder_region(depth: int, pts: list) -> Set:
    if not pts:
        return EMPTY
    top = max(pts)
    if depth == 0:
        return OmegaRegion(top[0])
    lowered = [(cantor_pair(p[0], p[1]),) + p[2:] for p in pts if p < top]
    return LadderRegion(top, _ladder_region(depth - 1, lowered))


def ladder_scheme(s: Scaffold) -> MonotoneScheme:
    """Uniform ``(depth+1)``-size scheme over the canonical scaffold ``s``.

    Keeps the maximum ``x`` of the sample and recursively compresses the
    rest after re-indexing it into the stratum below ``x``. Kept elements are
    returned in input order.
    """
    depth = s.depth

    def sigma(sample):
        for x in sample:
            s.check(x)
        return tuple(sample[i] for i in _ladder_pick(depth, list(sample))), NO_SIDE

    def eta(kept, side):
        for x in kept:
            s.check(x)
        return _ladder_region(depth, list(kept))

    cover = None
    if depth == 0:
        # eta((x,)) grows with x, so the union over singletons is eta of the max
        def cover(sample):
            return OmegaRegion(max(sample)[0]) if sample else EMPTY

    return MonotoneScheme(
        d=depth + 1,
        sigma=sigma,
        eta=eta,
        name="omega" if depth == 0 else f"ladder[{depth}]",
        descriptor={"kind": "ladder", "depth": depth},
        cover=cover,
    )


def omega_scheme() -> MonotoneScheme:
    return ladder_scheme(Scaffold(0))


# -- finite schemes --------------------------------------------------------


def constant_scheme(pool: Iterable) -> MonotoneScheme:
    """Size-0 scheme reconstructing the whole (finite) pool from nothing."""
    pool = frozenset(pool)
    return MonotoneScheme(
        d=0,
        sigma=lambda sample: ((), NO_SIDE),
        eta=lambda kept, side: pool,
        name="constant",
    )


def class_scheme(concepts: Sequence[frozenset], d: int, name="class") -> MonotoneScheme:
    """Brute-force scheme for a finite class.

    ``eta(T)`` is the first concept containing ``T``; ``sigma`` keeps the
    shortest (then index-least) subsample whose reconstruction covers the
    sample. Samples no concept can cover are compressed to their first ``d``
    elements and will fail validation.
    """
    concepts = [frozenset(c) for c in concepts]

    def eta(kept, side):
        need = set(kept)
        for c in concepts:
            if need <= c:
                return c
        return EMPTY

    def sigma(sample):
        need = set(sample)
        for size in range(min(d, len(sample)) + 1):
            for idx in itertools.combinations(range(len(sample)), size):
                kept = tuple(sample[i] for i in idx)
                if need <= eta(kept, NO_SIDE):
                    return kept, NO_SIDE
        return tuple(sample[:d]), NO_SIDE

    return MonotoneScheme(d=d, sigma=sigma, eta=eta, name=name)


def extensional_scheme(
    d: int,
    sigma_table: dict,
    eta_table: dict,
    side_bits: int = 0,
    max_input: int | None = None,
    name: str = "extensional",
) -> MonotoneScheme:
    """Lookup-table scheme.

    ``sigma_table`` maps samples to ``(kept, side_value)``; ``eta_table``
    maps ``(kept, side_value)`` to a set. A sample missing from the table is
    looked up by its sorted distinct elements; a missing reconstruction is
    the empty set.
    """
    sigma_table = {tuple(k): (tuple(v[0]), int(v[1])) for k, v in sigma_table.items()}
    eta_table = {(tuple(k[0]), int(k[1])): frozenset(v) for k, v in eta_table.items()}

    def sigma(sample):
        hit = sigma_table.get(sample)
        if hit is None:
            hit = sigma_table.get(tuple(sorted(set(sample))))
        if hit is None:
            raise SampleNotTabulated(f"no table entry for {sample!r}")
        kept, value = hit
        return kept, SideInfo(value, side_bits)

    def eta(kept, side):
        if side.bit_budget > side_bits:
            raise InvalidSideInfo(f"side info exceeds the {side_bits}-bit budget")
        return eta_table.get((kept, side.value), EMPTY)

    descriptor = {
        "d": d,
        "sigma": [
            [_sample_json(k), _sample_json(v[0])] + ([v[1]] if side_bits else [])
            for k, v in sigma_table.items()
        ],
        "eta": [
            [_sample_json(k[0])]
            + ([k[1]] if side_bits else [])
            + [_sample_json(sorted(v))]
            for k, v in eta_table.items()
        ],
    }
    if side_bits:
        descriptor["side_bits"] = side_bits
    if max_input is not None:
        descriptor["max_input"] = max_input
    return MonotoneScheme(
        d=d,
        sigma=sigma,
        eta=eta,
        max_input=max_input,
        name=name,
        side_bits=side_bits,
        descriptor=descriptor,
    )


def tabulate(scheme: MonotoneScheme, pool: Iterable, p: int, cap: int = DEFAULT_CAP):
    """Freeze ``scheme`` on every subset of ``pool`` of size at most ``p``."""
    pool = list(pool)
    total = sum(math.comb(len(pool), i) for i in range(p + 1))
    if total > cap:
        raise CapExceeded(f"{total} samples exceed the enumeration cap {cap}")
    sigma_table, eta_table = {}, {}
    for size in range(p + 1):
        for sample in itertools.combinations(pool, size):
            kept, side = compress(scheme, sample)
            sigma_table[sample] = (kept, side.value)
            key = (kept, side.value)
            if key not in eta_table:
                eta_table[key] = frozenset(reconstruct(scheme, kept, side))
    return extensional_scheme(
        scheme.d,
        sigma_table,
        eta_table,
        side_bits=max((k[1].bit_length() for k in eta_table), default=0),
        max_input=p,
        name=f"{scheme.name}@table",
    )


def _sample_json(sample) -> list:
    return [point_to_json(x) for x in sample]


def scheme_to_json(scheme: MonotoneScheme) -> dict:
    if scheme.descriptor is None:
        raise ConfigError(f"scheme {scheme.name!r} has no JSON form; tabulate it first")
    return scheme.descriptor


def scheme_from_json(obj) -> MonotoneScheme:
    if not isinstance(obj, dict):
        raise ConfigError("a scheme must be a JSON object", field="scheme")
    kind = obj.get("kind", "extensional")
    if kind == "omega":
        return omega_scheme()
    if kind == "ladder":
        return ladder_scheme(Scaffold.from_json(obj))
    if kind != "extensional":
        raise ConfigError(f"unknown scheme kind {kind!r}", field="kind")
    for key in ("d", "sigma", "eta"):
        if key not in obj:
            raise ConfigError("missing key", field=key)
    side_bits = obj.get("side_bits", 0)
    sigma_table, eta_table = {}, {}
    try:
        for entry in obj["sigma"]:
            value = entry[2] if side_bits else 0
            sigma_table[_sample(entry[0])] = (_sample(entry[1]), value)
        for entry in obj["eta"]:
            if side_bits:
                kept, value, out = entry
            else:
                (kept, out), value = entry, 0
            eta_table[(_sample(kept), value)] = frozenset(_sample(out))
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"malformed table entry: {exc}", field="sigma/eta") from exc
    return extensional_scheme(
        obj["d"], sigma_table, eta_table, side_bits=side_bits, max_input=obj.get("max_input")
    )


def _sample(obj) -> tuple:
    return tuple(point_from_json(p) for p in obj)
