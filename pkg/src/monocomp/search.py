"""Exact search for bounded (p -> q -> r) compressions of a finite pool.

The pool is ``{0, ..., n-1}``. A compression assigns to every ``p``-subset
``S`` a ``q``-subset ``sigma(S)`` of ``S`` and to every used ``q``-subset
``T`` a set ``eta(T)`` of at most ``B`` points, such that
``|eta(sigma(S)) & S| >= r``. Without the budget ``B`` every finite instance
is trivially feasible (take ``eta`` constant equal to the pool).

Subsets are bitmasks internally; enumeration is colexicographic, which for
fixed-size subsets coincides with increasing mask value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import CapExceeded, ConfigError, RNotP

DEFAULT_CAP = 100_000


@dataclass(frozen=True)
class PqrInstance:
    n: int
    p: int
    q: int
    r: int
    budget: int

    def __post_init__(self):
        n, p, q, r, b = self.n, self.p, self.q, self.r, self.budget
        if not (p >= r >= q > 0):
            raise ConfigError(f"need p >= r >= q > 0, got p={p} q={q} r={r}", field="p/q/r")
        if p > n:
            raise ConfigError(f"p={p} exceeds the pool size n={n}", field="p")
        if not (q <= b <= n):
            raise ConfigError(f"need q <= budget <= n, got budget={b}", field="budget")

    def to_json(self) -> dict:
        return {"n": self.n, "p": self.p, "q": self.q, "r": self.r, "budget": self.budget}


@dataclass(frozen=True)
class PqrCertificate:
    sigma: dict  # frozenset (p-subset) -> frozenset (q-subset)
    eta: dict  # frozenset (q-subset) -> frozenset

    def to_json(self) -> dict:
        return {
            "sigma": [[sorted(s), sorted(t)] for s, t in _colex_items(self.sigma)],
            "eta": [[sorted(t), sorted(e)] for t, e in _colex_items(self.eta)],
        }

    @classmethod
    def from_json(cls, obj) -> "PqrCertificate":
        try:
            sigma = {frozenset(s): frozenset(t) for s, t in obj["sigma"]}
            eta = {frozenset(t): frozenset(e) for t, e in obj["eta"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed certificate: {exc}", field="certificate") from exc
        return cls(sigma, eta)


@dataclass(frozen=True)
class SearchResult:
    feasible: bool
    certificate: PqrCertificate | None = None
    nodes: int = 0
    pruned_by: str | None = None

    @property
    def verdict(self) -> str:
        return "feasible" if self.feasible else "infeasible"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "nodes": self.nodes, "pruned_by": self.pruned_by}
        out["certificate"] = self.certificate.to_json() if self.certificate else None
        return out


def colex_key(s) -> tuple:
    return tuple(sorted(s, reverse=True))


def _colex_items(table: dict):
    return sorted(table.items(), key=lambda kv: colex_key(kv[0]))


def _masks(n: int, k: int) -> list[int]:
    return sorted(sum(1 << i for i in c) for c in itertools.combinations(range(n), k))


def _bits(mask: int) -> frozenset:
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def counting_bound(inst: PqrInstance) -> bool:
    """True when the perfect case (r = p) is certainly infeasible.

    A ``q``-subset ``T`` perfectly covers ``S`` only if ``T <= S <= eta(T)``,
    so it serves at most ``C(B - q, p - q)`` of the ``C(n, p)`` samples.
    """
    if inst.r != inst.p:
        raise RNotP(f"counting_bound needs r = p, got r={inst.r} p={inst.p}")
    n, p, q, b = inst.n, inst.p, inst.q, inst.budget
    return math.comb(n, p) > math.comb(n, q) * math.comb(b - q, p - q)


def search_pqr(inst: PqrInstance, cap: int = DEFAULT_CAP) -> SearchResult:
    """Decide the instance by backtracking over ``eta``.

    Each node picks the unsatisfied sample with the fewest unassigned
    ``q``-subsets and branches on which of them covers it, and with which
    reconstruction. Reconstructions are restricted to supersets of ``T`` of
    size exactly ``B``, which loses nothing: swapping a point of ``T`` in,
    or padding, never shrinks ``eta(T) & S`` for any ``S`` containing ``T``.
    """
    n, p, q, r, b = inst.n, inst.p, inst.q, inst.r, inst.budget
    if math.comb(n, p) > cap:
        raise CapExceeded(f"C({n}, {p}) exceeds the cap {cap}")
    if r == p and counting_bound(inst):
        return SearchResult(False, pruned_by="counting_bound")

    samples = _masks(n, p)
    subsets = _masks(n, q)
    options = {}
    for t in subsets:
        free = [i for i in range(n) if not t >> i & 1]
        pads = [sum(1 << free[i] for i in c) for c in itertools.combinations(range(len(free)), b - q)]
        options[t] = sorted(t | pad for pad in pads)
    below = {s: [t for t in subsets if t & s == t] for s in samples}

    assign: dict[int, int] = {}
    nodes = 0

    def covers(t, s):
        e = assign.get(t)
        return e is not None and (e & s).bit_count() >= r

    def dfs() -> bool:
        nonlocal nodes
        nodes += 1
        pick, pick_free = None, None
        for s in samples:
            if any(covers(t, s) for t in below[s]):
                continue
            free = [t for t in below[s] if t not in assign]
            if not free:
                return False
            if pick is None or len(free) < len(pick_free):
                pick, pick_free = s, free
        if pick is None:
            return True
        for t in pick_free:
            for e in options[t]:
                if (e & pick).bit_count() >= r:
                    assign[t] = e
                    if dfs():
                        return True
                    del assign[t]
        return False

    if not dfs():
        return SearchResult(False, nodes=nodes)

    sigma, eta = {}, {}
    for s in samples:
        t = next(t for t in below[s] if covers(t, s))
        sigma[_bits(s)] = _bits(t)
        eta[_bits(t)] = _bits(assign[t])
    return SearchResult(True, PqrCertificate(sigma, eta), nodes=nodes)


def verify_certificate(inst: PqrInstance, cert: PqrCertificate) -> bool:
    """Check every condition of a (p -> q -> r) compression with budget B."""
    pool = frozenset(range(inst.n))
    for c in itertools.combinations(range(inst.n), inst.p):
        s = frozenset(c)
        t = cert.sigma.get(s)
        if t is None or len(t) != inst.q or not t <= s:
            return False
        e = cert.eta.get(t)
        if e is None or len(e) > inst.budget or not e <= pool:
            return False
        if len(e & s) < inst.r:
            return False
    return True
