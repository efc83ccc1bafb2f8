"""Scheme-to-scheme reductions.

* :func:`uniformize` merges a family of per-sample-size schemes into one
  uniform scheme that also sends the sample size (coarsened through a growth
  function) as side information.
* :func:`decrease_size` turns a ``(k+1) -> k`` scheme on a pool into a
  ``k -> (k-1)`` scheme on a subpool, using a point never reconstructed from
  the subpool as a marker.
* :func:`imperfect_to_perfect` turns a ``(p -> q -> q+1)`` compression into
  a ``(p -> p-1 -> p)`` one.
* :func:`labeled_lift` encodes a binary class as sets of labelled points, so
  monotone schemes for the lift become proper schemes for the class.
"""

from __future__ import annotations

import itertools
from collections.abc import Set
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .emx import ConceptClass
from .errors import (
    ConfigError,
    ContractViolated,
    FamilyGap,
    NoFreshElement,
    NotInClass,
)
from .schemes import (
    DEFAULT_CAP,
    NO_SIDE,
    MonotoneScheme,
    SideInfo,
    compress,
    exhaustive_counterexample,
    reconstruct,
)
from .search import PqrCertificate, PqrInstance

# -- uniformization --------------------------------------------------------

GROWTH_KINDS = ("identity", "power", "tower")


@dataclass(frozen=True)
class GrowthFunction:
    """Non-decreasing ``f: N -> N`` tending to infinity, from a fixed menu:
    ``identity``; ``power`` (``base ** n``); ``tower`` (``1, base, base**base, ...``)."""

    kind: str = "identity"
    base: int = 2

    def __post_init__(self):
        if self.kind not in GROWTH_KINDS:
            raise ConfigError(f"unknown growth function {self.kind!r}", field="growth")
        if self.kind != "identity" and self.base < 2:
            raise ConfigError("base must be >= 2", field="base")

    def __call__(self, n: int) -> int:
        if self.kind == "identity":
            return n
        if self.kind == "power":
            return self.base**n
        value = 1
        for _ in range(n):
            value = self.base**value
        return value

    def inverse(self, m: int) -> int:
        """Least ``n`` with ``f(n) >= m``."""
        n = 0
        while self(n) < m:
            n += 1
        return n

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind != "identity":
            out["base"] = self.base
        return out

    @classmethod
    def from_json(cls, obj) -> "GrowthFunction":
        if isinstance(obj, str):
            return cls(obj)
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ConfigError("expected {'kind': ..., 'base': ...}", field="growth")
        return cls(obj["kind"], int(obj.get("base", 2)))


@dataclass(frozen=True)
class SchemeFamily:
    """Non-uniform scheme: one member per sample size. The member stored
    under ``m`` must handle every sample of size at most ``m``."""

    per_m: Mapping[int, MonotoneScheme]

    @property
    def d(self) -> int:
        return max((s.d for s in self.per_m.values()), default=0)

    def member(self, m: int) -> MonotoneScheme:
        try:
            return self.per_m[m]
        except KeyError:
            raise FamilyGap(f"the family has no member for sample size {m}") from None


def uniformize(fam: SchemeFamily, f: GrowthFunction) -> MonotoneScheme:
    """One uniform scheme; a sample of size ``m`` is compressed by the member
    for ``f(m')``, with ``m' = f^{-1}(m)`` sent in binary as side information."""

    def sigma(sample):
        m_prime = f.inverse(len(sample))
        kept, side = fam.member(f(m_prime)).compress(sample)
        if side.bit_budget:
            raise ContractViolated("family members must not use side information")
        return kept, SideInfo.encode(m_prime)

    def eta(kept, side):
        return fam.member(f(side.value)).reconstruct(kept, NO_SIDE)

    return MonotoneScheme(d=fam.d, sigma=sigma, eta=eta, name=f"uniform[{f.kind}]")


# -- DecreaseSize ----------------------------------------------------------


def decrease_size(
    scheme: MonotoneScheme,
    pool: Iterable,
    subpool: Iterable,
    k: int,
    check: bool = True,
    cap: int = DEFAULT_CAP,
) -> MonotoneScheme:
    """``k -> (k-1)`` scheme on ``subpool`` from a ``(k+1) -> k`` scheme on ``pool``.

    The marker ``x*`` is the first pool point outside ``Y``, the union of
    ``eta`` over every arrangement of at most ``k`` subpool points. Then the
    compression of ``S + (x*,)`` must keep ``x*``; dropping it gives the new
    compression, and the new reconstruction re-inserts ``x*`` at every
    position and intersects with the subpool.
    """
    pool = list(pool)
    sub = list(subpool)
    if k < 1:
        raise ConfigError("k must be >= 1", field="k")
    if scheme.d > k:
        raise ContractViolated(f"scheme size {scheme.d} exceeds k={k}")
    if not set(sub) <= set(pool):
        raise ConfigError("the subpool must lie inside the pool", field="subpool")
    if check:
        bad = exhaustive_counterexample(scheme, pool, k + 1, cap)
        if bad is not None:
            raise ContractViolated(f"scheme fails on the (k+1)-sample {bad!r}")

    marker = find_marker(scheme, pool, sub, k)

    def sigma(sample):
        kept, side = compress(scheme, tuple(sample) + (marker,))
        if marker not in kept:
            raise ContractViolated(f"compression of {sample!r} + marker dropped the marker")
        i = kept.index(marker)
        return kept[:i] + kept[i + 1 :], side

    def eta(kept, side):
        out = set()
        for i in range(len(kept) + 1):
            region = reconstruct(scheme, kept[:i] + (marker,) + kept[i:], side)
            out.update(x for x in sub if x in region)
        return frozenset(out)

    return MonotoneScheme(
        d=k - 1, sigma=sigma, eta=eta, max_input=k, name=f"decreased[{scheme.name}]"
    )


def find_marker(scheme: MonotoneScheme, pool: Iterable, subpool: Iterable, k: int):
    """First pool point outside the subpool that no arrangement of at most
    ``k`` subpool points reconstructs to."""
    pool, sub = list(pool), list(subpool)
    reached = set(sub)
    for size in range(k + 1):
        for arrangement in itertools.permutations(sub, size):
            region = reconstruct(scheme, arrangement, NO_SIDE)
            reached.update(x for x in pool if x in region)
    for x in pool:
        if x not in reached:
            return x
    raise NoFreshElement("every pool point is reconstructed from some subpool sample")


# -- imperfect to perfect --------------------------------------------------


@dataclass(frozen=True)
class PqrCompression:
    """A (p -> q -> r) compression on an ordered finite pool, as callables on
    frozensets."""

    sigma: Callable[[frozenset], frozenset]
    eta: Callable[[frozenset], frozenset]
    pool: tuple
    p: int
    q: int
    r: int
    name: str = field(default="pqr", compare=False)

    def holds_on(self, S: frozenset) -> bool:
        T = self.sigma(S)
        return T <= S and len(T) == self.q and len(self.eta(T) & S) >= self.r

    def counterexample(self):
        for c in itertools.combinations(self.pool, self.p):
            if not self.holds_on(frozenset(c)):
                return frozenset(c)
        return None

    def as_scheme(self) -> MonotoneScheme:
        """Monotone-scheme view on samples of ``p`` distinct pool points."""

        def sigma(sample):
            kept = self.sigma(frozenset(sample))
            return tuple(x for x in sample if x in kept), NO_SIDE

        def eta(kept, side):
            return self.eta(frozenset(kept))

        return MonotoneScheme(d=self.q, sigma=sigma, eta=eta, max_input=self.p, name=self.name)

    def to_certificate(self) -> PqrCertificate:
        sigma, eta = {}, {}
        for c in itertools.combinations(self.pool, self.p):
            S = frozenset(c)
            T = self.sigma(S)
            sigma[S] = T
            if T not in eta:
                eta[T] = frozenset(self.eta(T))
        return PqrCertificate(sigma, eta)

    @classmethod
    def from_certificate(cls, inst: PqrInstance, cert: PqrCertificate) -> "PqrCompression":
        def eta(T):
            return cert.eta.get(T, frozenset())

        return cls(
            sigma=cert.sigma.__getitem__,
            eta=eta,
            pool=tuple(range(inst.n)),
            p=inst.p,
            q=inst.q,
            r=inst.r,
            name="certificate",
        )


def imperfect_to_perfect(comp: PqrCompression) -> PqrCompression:
    """Perfect ``(p -> p-1 -> p)`` compression from a ``(p -> q -> q+1)`` one.

    ``alpha_S`` is the first pool point of ``S`` reconstructed from
    ``sigma(S)`` but not in it; ``sigma'(S) = S - {alpha_S}`` and
    ``eta'(U) = U | union of eta(T) over q-subsets T of U``.
    """
    if comp.r != comp.q + 1:
        raise ContractViolated(f"need r = q + 1, got q={comp.q} r={comp.r}")
    rank = {x: i for i, x in enumerate(comp.pool)}

    def sigma(S):
        T = comp.sigma(S)
        extra = (comp.eta(T) - T) & S
        if not extra:
            raise ContractViolated(f"sigma({sorted(S, key=rank.get)}) has no spare point")
        alpha = min(extra, key=rank.__getitem__)
        return S - {alpha}

    def eta(U):
        out = set(U)
        for T in itertools.combinations(sorted(U, key=rank.__getitem__), comp.q):
            out |= comp.eta(frozenset(T))
        return frozenset(out)

    return PqrCompression(
        sigma, eta, comp.pool, comp.p, comp.p - 1, comp.p, name=f"perfect[{comp.name}]"
    )


# -- labelled lift ---------------------------------------------------------


def _lift(x, label: int):
    return x + (label,) if isinstance(x, tuple) else (x, label)


def labeled_lift(H: ConceptClass) -> ConceptClass:
    """``h -> {(x, h(x)) : x in pool}`` for every concept of ``H``."""
    if not H.is_extensional:
        raise ConfigError("labeled_lift needs an extensional class", field="class")
    pool = [_lift(x, b) for x in H.pool for b in (0, 1)]
    concepts = [frozenset(_lift(x, int(x in h)) for x in H.pool) for h in H.concepts]
    return ConceptClass.extensional(pool, concepts)


@dataclass(frozen=True)
class ProperAdapter:
    """Proper compression for ``H`` from a monotone scheme for its lift.

    Labelled examples are lifted points ``x + (label,)``. The reconstruction
    is projected to the first concept whose lift contains it.
    """

    scheme: MonotoneScheme
    H: ConceptClass

    def compress(self, labeled_sample):
        return compress(self.scheme, labeled_sample)

    def reconstruct(self, kept, side: SideInfo = NO_SIDE) -> frozenset:
        region = frozenset(reconstruct(self.scheme, kept, side))
        for h in self.H.concepts:
            lifted = frozenset(_lift(x, int(x in h)) for x in self.H.pool)
            if region <= lifted:
                return h
        raise NotInClass("the reconstruction is consistent with no concept")

    def consistent(self, labeled_sample) -> bool:
        """Compress, reconstruct, and check the concept agrees with every label."""
        kept, side = self.compress(labeled_sample)
        h = self.reconstruct(kept, side)
        lifted = frozenset(_lift(x, int(x in h)) for x in self.H.pool)
        return all(pt in lifted for pt in labeled_sample)


def vc_dimension(concepts: Iterable[Set], domain: Iterable) -> int:
    """Brute-force VC dimension; -1 for the empty class."""
    domain = list(domain)
    concepts = [frozenset(c) for c in concepts]
    if not concepts:
        return -1
    best = 0
    for size in range(1, len(domain) + 1):
        found = False
        for subset in itertools.combinations(domain, size):
            traces = {frozenset(x for x in subset if x in c) for c in concepts}
            if len(traces) == 1 << size:
                found = True
                break
        if not found:
            break
        best = size
    return best
