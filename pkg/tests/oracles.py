"""Independent reference implementations used as test oracles."""

import itertools


def pqr_feasible(n, p, q, r, budget):
    """Brute-force (p -> q -> r) decision over every eta table.

    For each q-subset ``T`` every reconstruction ``E`` of size at most
    ``budget`` is tried; what matters about the choice is the set of samples
    it serves (``T <= S`` and ``|E & S| >= r``). The q-subsets are decided
    one at a time; once the last subset of a sample has been decided the
    sample must be served, and samples that are settled drop out of the
    memoised state.
    """
    samples = [frozenset(S) for S in itertools.combinations(range(n), p)]
    subsets = [frozenset(T) for T in itertools.combinations(range(n), q)]
    reconstructions = [
        frozenset(E) for size in range(budget + 1) for E in itertools.combinations(range(n), size)
    ]
    deadline = [max(j for j, T in enumerate(subsets) if T <= S) for S in samples]
    due = [sum(1 << i for i, d in enumerate(deadline) if d == j) for j in range(len(subsets))]
    options = []
    for T in subsets:
        served = {
            sum(1 << i for i, S in enumerate(samples) if T <= S and len(E & S) >= r)
            for E in reconstructions
        }
        options.append([o for o in served if not any(o != b and o & b == o for b in served)])

    seen = set()

    def solve(j, covered):
        if j == len(subsets):
            return True
        if (j, covered) in seen:
            return False
        for o in options[j]:
            c = covered | o
            if c & due[j] == due[j] and solve(j + 1, c & ~due[j]):
                return True
        seen.add((j, covered))
        return False

    return solve(0, 0)


def pqr_grid(max_n=6, max_p=3):
    for n in range(1, max_n + 1):
        for p in range(2, min(max_p, n) + 1):
            for q in range(1, p):
                for r in range(q, p + 1):
                    for budget in range(q, n + 1):
                        yield n, p, q, r, budget


def vc_dimension(concepts, domain):
    """Largest shattered subset, checked by listing every labelling."""
    domain = list(domain)
    concepts = [frozenset(c) for c in concepts]
    if not concepts:
        return -1
    best = 0
    for size in range(len(domain) + 1):
        for subset in itertools.combinations(domain, size):
            ok = all(
                any(all((x in c) == bit for x, bit in zip(subset, bits)) for c in concepts)
                for bits in itertools.product((False, True), repeat=size)
            )
            if ok:
                best = max(best, size)
    return best
