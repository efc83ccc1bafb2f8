"""Expectation maximization (EMX) learning from monotone compression.

Distributions have finite support, so every expectation ``E_P(h)`` is an
exact sum over the support. Two learners are built from a scheme:

* :func:`lw_learn` evaluates every reconstruction ``eta[S_A]`` on the rest of
  the sample and keeps the empirically best one (Littlestone-Warmuth style);
* :func:`loo_learn` returns a class member dominating all reconstructions of
  small subsamples, whose expected regret is at most ``d / (m + 1)`` for
  union-bounded classes.

:func:`extract_compression` runs the converse direction, turning a proper
learner into a (non-uniform) scheme.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Set
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import (
    ConfigError,
    EmptyClass,
    NoDominatingConcept,
    NotInClass,
    NotUnionBounded,
    SizeBoundExceeded,
)
from .scaffold import Scaffold, point_from_json, point_to_json
from .schemes import (
    EMPTY,
    NO_SIDE,
    MonotoneScheme,
    OmegaRegion,
    diagnose,
    ladder_scheme,
    omega_scheme,
    reconstruct,
)

WEIGHT_TOLERANCE = 1e-12


# -- distributions ---------------------------------------------------------


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, derived from ``(seed, trial)``."""
    return np.random.default_rng([seed, trial])


@dataclass(frozen=True)
class Distribution:
    support: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.support) == 0 or len(self.support) != len(self.weights):
            raise ConfigError("support and weights must be non-empty and parallel")
        if len(set(self.support)) != len(self.support):
            raise ConfigError("support points must be distinct", field="support")
        if any(not w > 0 for w in self.weights):
            raise ConfigError("weights must be strictly positive", field="weights")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ConfigError(f"weights sum to {total!r}, not 1", field="weights")
        object.__setattr__(self, "_p", np.asarray(self.weights, dtype=float))

    @classmethod
    def from_weights(cls, support, weights) -> "Distribution":
        total = math.fsum(weights)
        return cls(tuple(support), tuple(float(w) / total for w in weights))

    @classmethod
    def uniform(cls, support) -> "Distribution":
        support = tuple(support)
        return cls(support, (1.0 / len(support),) * len(support))

    def expectation(self, h) -> float:
        """``E_P(h)``: total weight of the support points lying in ``h``."""
        return math.fsum(w for x, w in zip(self.support, self.weights) if x in h)

    def sample(self, m: int, rng: np.random.Generator) -> tuple:
        idx = rng.choice(len(self.support), size=m, p=self._p)
        return tuple(self.support[i] for i in idx)

    def to_json(self) -> dict:
        return {
            "support": [point_to_json(x) for x in self.support],
            "weights": list(self.weights),
        }

    @classmethod
    def from_json(cls, obj) -> "Distribution":
        if not isinstance(obj, dict) or "support" not in obj or "weights" not in obj:
            raise ConfigError("expected {'support': [...], 'weights': [...]}", field="distribution")
        support = tuple(point_from_json(p) for p in obj["support"])
        return cls(support, tuple(float(w) for w in obj["weights"]))


def uniform_on_range(n: int) -> Distribution:
    return Distribution.uniform((i,) for i in range(n))


def random_distribution(rng: np.random.Generator, pool_size=100, max_support=30) -> Distribution:
    """Random finite-support distribution on depth-0 points below ``pool_size``."""
    size = int(rng.integers(1, max_support + 1))
    support = sorted(int(i) for i in rng.choice(pool_size, size=size, replace=False))
    weights = np.maximum(rng.dirichlet(np.ones(size)), 1e-9)
    return Distribution.from_weights([(i,) for i in support], weights)


# -- concept classes -------------------------------------------------------


@dataclass(frozen=True)
class ConceptClass:
    """Either an explicit finite list of concepts over a finite pool, or all
    finite subsets of a scaffold domain (``fin_subsets``)."""

    kind: str
    pool: tuple = ()
    concepts: tuple = ()
    depth: int | None = None
    union_bounded_hint: bool | None = None

    def __post_init__(self):
        if self.kind not in ("extensional", "fin_subsets"):
            raise ConfigError(f"unknown class kind {self.kind!r}", field="kind")
        if self.kind == "extensional":
            pool = set(self.pool)
            for c in self.concepts:
                if not c <= pool:
                    raise ConfigError(f"concept {sorted(c)} leaves the pool", field="concepts")
            object.__setattr__(self, "_rank", {x: i for i, x in enumerate(self.pool)})
            object.__setattr__(self, "_members", frozenset(self.concepts))

    @classmethod
    def extensional(cls, pool, concepts, union_bounded_hint=None) -> "ConceptClass":
        seen, unique = set(), []
        for c in concepts:
            c = frozenset(c)
            if c not in seen:
                seen.add(c)
                unique.append(c)
        return cls("extensional", tuple(pool), tuple(unique), None, union_bounded_hint)

    @classmethod
    def fin_subsets(cls, depth: int = 0) -> "ConceptClass":
        return cls("fin_subsets", depth=depth, union_bounded_hint=True)

    @property
    def is_extensional(self) -> bool:
        return self.kind == "extensional"

    def __len__(self):
        if not self.is_extensional:
            raise TypeError("fin_subsets is infinite")
        return len(self.concepts)

    def contains(self, h) -> bool:
        if self.is_extensional:
            return frozenset(h) in self._members
        if not isinstance(h, (Set, frozenset, set)):
            return False
        arity = self.depth + 1
        return all(isinstance(x, tuple) and len(x) == arity for x in h)

    def order_key(self, x):
        """Fixed total order on points: pool order, or scaffold order."""
        return self._rank[x] if self.is_extensional else x

    def dominating(self, covered) -> Set:
        """Smallest member (size, then pool order) containing ``covered``.

        For ``fin_subsets`` the covered set is itself a member.
        """
        if not self.is_extensional:
            return covered
        need = frozenset(covered)
        best = None
        for c in self.concepts:
            if need <= c:
                key = (len(c), sorted(self._rank[x] for x in c))
                if best is None or key < best[0]:
                    best = (key, c)
        if best is None:
            raise NoDominatingConcept(f"no member contains {sorted(need)!r}")
        return best[1]

    def to_json(self) -> dict:
        if not self.is_extensional:
            return {"kind": "fin_subsets", "depth": self.depth}
        return {
            "kind": "extensional",
            "pool": [point_to_json(x) for x in self.pool],
            "concepts": [
                [point_to_json(x) for x in sorted(c, key=self._rank.__getitem__)]
                for c in self.concepts
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "ConceptClass":
        if not isinstance(obj, dict):
            raise ConfigError("a class must be a JSON object", field="class")
        kind = obj.get("kind")
        if kind == "fin_subsets":
            return cls.fin_subsets(Scaffold.from_json(obj).depth)
        if kind == "extensional":
            pool = [point_from_json(p) for p in obj.get("pool", [])]
            concepts = [[point_from_json(p) for p in c] for c in obj.get("concepts", [])]
            return cls.extensional(pool, concepts)
        raise ConfigError(f"unknown class kind {kind!r}", field="kind")


def opt(P: Distribution, F: ConceptClass) -> float:
    """``sup_h E_P(h)`` over the class."""
    if not F.is_extensional:
        return 1.0
    if not F.concepts:
        raise EmptyClass("the class has no members")
    return max(P.expectation(h) for h in F.concepts)


def is_union_bounded(F: ConceptClass) -> bool:
    if not F.is_extensional:
        return True
    members = F.concepts
    for i, a in enumerate(members):
        for b in members[i:]:
            u = a | b
            if not any(u <= c for c in members):
                return False
    return True


# -- sample complexity -----------------------------------------------------


def alpha(k: int, m: int, delta: float) -> float:
    """Uniform deviation radius for ``m`` samples and ``k``-size compressions,
    at failure probability ``delta / 2``."""
    return math.sqrt((k * math.log(2 * m) + math.log(2 / delta)) / (2 * (m - k)))


def sample_size(k: int, eps: float, delta: float) -> int:
    """Least ``m > k`` with ``alpha(k, m, delta) <= eps / 2``."""
    if not (0 < eps < 1 and 0 < delta < 1):
        raise ConfigError("eps and delta must lie in (0, 1)", field="eps/delta")
    target = eps / 2
    lo = k + 1
    if alpha(k, lo, delta) <= target:
        return lo
    hi = 2 * lo
    while alpha(k, hi, delta) > target:
        lo, hi = hi, 2 * hi
    # alpha is decreasing in m on m > k: alpha(lo) > target >= alpha(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if alpha(k, mid, delta) <= target:
            hi = mid
        else:
            lo = mid
    return hi


# -- subsample enumeration -------------------------------------------------


def index_subsets(m: int, k: int) -> Iterator[tuple]:
    """Increasing index tuples of length <= k, in lexicographic order."""

    def rec(start, prefix):
        yield prefix
        if len(prefix) < k:
            for j in range(start, m):
                yield from rec(j + 1, prefix + (j,))

    return rec(0, ())


def distinct_subsequences(sample: Sequence, max_len: int) -> Iterator[tuple]:
    """Every distinct subsequence (as a value tuple) of length <= max_len."""
    sample = tuple(sample)

    def rec(start, prefix):
        yield prefix
        if len(prefix) == max_len:
            return
        seen = set()
        for j in range(start, len(sample)):
            v = sample[j]
            if v not in seen:
                seen.add(v)
                yield from rec(j + 1, prefix + (v,))

    return rec(0, ())


def union_of_reconstructions(scheme: MonotoneScheme, sample) -> Set:
    sample = tuple(sample)
    if scheme.cover is not None:
        return scheme.cover(sample)
    out = set()
    for sub in distinct_subsequences(sample, scheme.d):
        out.update(reconstruct(scheme, sub, NO_SIDE))
    return frozenset(out)


# -- learners --------------------------------------------------------------


def lw_learn(scheme: MonotoneScheme, F: ConceptClass, S) -> Set:
    """Best reconstruction on held-out data.

    Every index set ``A`` with ``|A| <= d`` proposes ``eta[S_A]``, scored by
    its empirical mean on ``S`` minus ``S_A``. The highest score wins, with
    ties going to the lexicographically least ``A``. An empty held-out part
    scores 1.
    """
    S = tuple(S)
    m = len(S)
    counts = Counter(S)
    regions, inside = {}, {}
    best_score, best = None, None
    for A in index_subsets(m, scheme.d):
        key = tuple(S[i] for i in A)
        if key not in regions:
            region = reconstruct(scheme, key, NO_SIDE)
            regions[key] = region
            inside[key] = sum(c for v, c in counts.items() if v in region)
        region = regions[key]
        rest = m - len(A)
        if rest == 0:
            score = Fraction(1)
        else:
            hits = inside[key] - sum(1 for i in A if S[i] in region)
            score = Fraction(hits, rest)
        if best_score is None or score > best_score:
            best_score, best = score, key
    h = regions[best]
    if F.is_extensional and not F.contains(h):
        raise NotInClass(f"reconstruction of {best!r} is not a class member")
    return frozenset(h) if F.is_extensional else h


def loo_learn(scheme: MonotoneScheme, F: ConceptClass, S) -> Set:
    """A class member containing every reconstruction of a ``<= d`` subsample."""
    covered = union_of_reconstructions(scheme, S)
    return F.dominating(covered)


@dataclass(frozen=True)
class Learner:
    """A proper learner ``G`` together with its nominal sample size.

    ``compression_size`` is set for compression-based learners and yields
    the ``d / (m + 1)`` regret bound. ``extend`` may compute the union of
    ``G`` over all subsamples of size at most ``sample_size`` in closed form.
    """

    sample_size: int
    hypothesis: Callable[[tuple], Set]
    name: str = "learner"
    compression_size: int | None = None
    extend: Callable[[tuple], Set] | None = field(default=None, compare=False)

    def __call__(self, sample) -> Set:
        return self.hypothesis(tuple(sample))

    def bound(self, m: int) -> float | None:
        if self.compression_size is None:
            return None
        return self.compression_size / (m + 1)


def loo_learner(scheme: MonotoneScheme, F: ConceptClass, m: int = 0) -> Learner:
    if F.is_extensional and not is_union_bounded(F):
        raise NotUnionBounded("the leave-one-out learner needs a union-bounded class")
    return Learner(m, lambda S: loo_learn(scheme, F, S), f"loo[{scheme.name}]", scheme.d)


def lw_learner(scheme: MonotoneScheme, F: ConceptClass, m: int = 0) -> Learner:
    return Learner(m, lambda S: lw_learn(scheme, F, S), f"lw[{scheme.name}]")


def max_learner(d0: int) -> Learner:
    """``S -> {0, ..., max S}`` on depth-0 points; monotone in ``S``."""

    def G(sample):
        return OmegaRegion(max(sample)[0]) if sample else EMPTY

    return Learner(d0, G, f"max[{d0}]", extend=G)


def constant_learner(h, d0: int = 1) -> Learner:
    h = frozenset(h)
    return Learner(d0, lambda sample: h, "constant", extend=lambda sample: h)


# -- regret experiments ----------------------------------------------------


@dataclass(frozen=True)
class RegretReport:
    trials: int
    mean_regret: float
    stderr: float
    bound: float | None
    seed: int
    m: int
    regrets: tuple = field(default=(), repr=False)

    @property
    def within_bound(self) -> bool | None:
        if self.bound is None:
            return None
        return self.mean_regret <= self.bound + 3 * self.stderr

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "m": self.m,
            "seed": self.seed,
            "mean_regret": self.mean_regret,
            "stderr": self.stderr,
            "bound": self.bound,
            "pass": self.within_bound,
        }

    def csv_rows(self):
        return [(t, r) for t, r in enumerate(self.regrets)]


def regret_experiment(
    learner: Learner,
    P: Distribution,
    F: ConceptClass,
    m: int,
    trials: int,
    seed: int,
) -> RegretReport:
    """Monte Carlo estimate of ``E[opt(P, F) - E_P(learner(S))]`` over ``S ~ P^m``."""
    if trials < 1:
        raise ConfigError("trials must be >= 1", field="trials")
    best = opt(P, F)
    value_of = {}
    regrets = np.empty(trials)
    for t in range(trials):
        S = P.sample(m, trial_rng(seed, t))
        h = learner(S)
        v = value_of.get(h)
        if v is None:
            if not F.contains(h):
                raise NotInClass(f"{learner.name} returned a non-member on trial {t}")
            v = value_of[h] = P.expectation(h)
        regrets[t] = max(0.0, best - v)
    stderr = float(regrets.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return RegretReport(
        trials=trials,
        mean_regret=float(regrets.mean()),
        stderr=stderr,
        bound=learner.bound(m),
        seed=seed,
        m=m,
        regrets=tuple(float(r) for r in regrets),
    )


def omega_regret_closed_form(n: int, m: int) -> Fraction:
    """Exact expected regret of the leave-one-out omega learner under the
    uniform distribution on ``{0, ..., n-1}``: ``sum_j (j/n)^m / n``."""
    return sum(Fraction(j, n) ** m for j in range(1, n)) / n


# -- learner -> compression ------------------------------------------------


def extract_compression(G: Learner, F: ConceptClass, m: int) -> MonotoneScheme:
    """Compression scheme for samples of size <= m built from learner ``G``.

    ``E(S)`` is a class member containing ``G(T)`` (augmented by ``T``) for
    every subsample ``T`` of size <= ``d0``. The compressor repeatedly drops
    an element that ``E`` of the remaining sample already covers, scanning
    candidates in the class's point order; the reconstructor applies ``E``
    ``m`` times. The size bound is ``ceil(3 * d0 / 2)``.
    """
    if F.is_extensional and not is_union_bounded(F):
        raise NotUnionBounded("extraction needs a union-bounded class")
    d0 = G.sample_size
    size_bound = math.ceil(3 * d0 / 2)

    def E(sample) -> Set:
        if G.extend is not None:
            covered = G.extend(sample)
        else:
            acc = set()
            for sub in distinct_subsequences(sample, d0):
                acc.update(G(sub))
            covered = frozenset(acc)
        if d0 >= 1 and not all(x in covered for x in sample):
            covered = frozenset(covered) | frozenset(sample)
        return F.dominating(covered)

    def sigma(sample):
        idx = list(range(len(sample)))
        removed = True
        while removed:
            removed = False
            values = sorted({sample[i] for i in idx}, key=F.order_key)
            for v in values:
                pos = next(j for j, i in enumerate(idx) if sample[i] == v)
                rest = idx[:pos] + idx[pos + 1 :]
                if v in E(tuple(sample[i] for i in rest)):
                    idx = rest
                    removed = True
                    break
        if len(idx) > size_bound:
            raise SizeBoundExceeded(
                f"removal stalled at {len(idx)} > {size_bound} elements; "
                f"{G.name} is not a (1/3, 1/3)-learner on the uniform distribution "
                "over the remainder"
            )
        return tuple(sample[i] for i in idx), NO_SIDE

    def eta(kept, side):
        cur = E(kept)
        for _ in range(m - 1):
            nxt = E(tuple(sorted(cur, key=F.order_key)))
            if nxt == cur:
                break
            cur = nxt
        return cur

    return MonotoneScheme(
        d=size_bound, sigma=sigma, eta=eta, max_input=m, name=f"extracted[{G.name}]"
    )


# -- experiment drivers ----------------------------------------------------


def regret_sweep(ms, trials: int, support_size: int, seed: int) -> tuple[list, float]:
    """Leave-one-out omega regret for each ``m`` under the uniform
    distribution on ``support_size`` points, plus the least-squares slope of
    ``log(mean regret)`` against ``log(m)``."""
    P = uniform_on_range(support_size)
    F = ConceptClass.fin_subsets(0)
    learner = loo_learner(omega_scheme(), F)
    reports = [regret_experiment(learner, P, F, m, trials, seed) for m in ms]
    means = [r.mean_regret for r in reports]
    if min(means) <= 0:
        return reports, float("nan")
    slope = float(np.polyfit(np.log(list(ms)), np.log(means), 1)[0])
    return reports, slope


def lw_generalization(
    k: int,
    eps: float,
    delta: float,
    runs: int,
    n_distributions: int,
    seed: int,
    pool_size: int = 100,
    max_support: int = 30,
) -> dict:
    """Run the LW learner (ladder scheme of size ``k`` over ``fin_subsets``)
    at ``m = sample_size(k, eps, delta)``; run ``t`` draws from distribution
    ``t mod n_distributions``. Reports how often the regret exceeds ``eps``."""
    if k < 1:
        raise ConfigError("k must be >= 1", field="k")
    m = sample_size(k, eps, delta)
    scheme = ladder_scheme(Scaffold(k - 1))
    F = ConceptClass.fin_subsets(k - 1)
    if k == 1:
        dists = [
            random_distribution(np.random.default_rng([seed, 1, i]), pool_size, max_support)
            for i in range(n_distributions)
        ]
    else:
        dists = [
            _random_scaffold_distribution(np.random.default_rng([seed, 1, i]), k - 1, max_support)
            for i in range(n_distributions)
        ]
    regrets = []
    for t in range(runs):
        P = dists[t % n_distributions]
        S = P.sample(m, np.random.default_rng([seed, 0, t]))
        h = lw_learn(scheme, F, S)
        regrets.append(max(0.0, 1.0 - P.expectation(h)))
    failures = sum(1 for r in regrets if r > eps)
    return {
        "k": k,
        "eps": eps,
        "delta": delta,
        "m": m,
        "runs": runs,
        "distributions": n_distributions,
        "failures": failures,
        "failure_rate": failures / runs,
        "pass": failures / runs <= delta,
        "regrets": regrets,
    }


def _random_scaffold_distribution(rng, depth: int, max_support: int, coord_bound: int = 8):
    size = int(rng.integers(1, max_support + 1))
    pts = sorted({tuple(int(c) for c in rng.integers(0, coord_bound, depth + 1)) for _ in range(size)})
    weights = np.maximum(rng.dirichlet(np.ones(len(pts))), 1e-9)
    return Distribution.from_weights(pts, weights)


def extraction_experiment(d0: int, pool_size: int, max_size: int, samples: int, seed: int) -> dict:
    """Extract a scheme from the max-learner over ``fin_subsets`` and run it
    on random samples of points below ``pool_size``."""
    F = ConceptClass.fin_subsets(0)
    scheme = extract_compression(max_learner(d0), F, max_size)
    sizes, failures = [], []
    for t in range(samples):
        rng = np.random.default_rng([seed, t])
        size = int(rng.integers(0, max_size + 1))
        S = tuple((int(x),) for x in rng.integers(0, pool_size, size))
        kept, _ = scheme.compress(S)
        sizes.append(len(kept))
        reason = diagnose(scheme, S)
        if reason is not None:
            failures.append({"sample": [list(x) for x in S], "reason": reason})
    return {
        "d0": d0,
        "size_bound": scheme.d,
        "size_bound_floor": 3 * d0 // 2,
        "rounding": "ceil",
        "samples": samples,
        "max_compression": max(sizes, default=0),
        "all_covered": not failures,
        "failures": failures,
        "pass": not failures and max(sizes, default=0) <= scheme.d,
    }
