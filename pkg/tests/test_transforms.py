import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from monocomp.emx import ConceptClass
from monocomp.errors import ConfigError, ContractViolated, FamilyGap, NoFreshElement, NotInClass
from monocomp.scaffold import Scaffold
from monocomp.schemes import (
    NO_SIDE,
    MonotoneScheme,
    SideInfo,
    class_scheme,
    compress,
    exhaustive_validate,
    ladder_scheme,
    omega_scheme,
    reconstruct,
    tabulate,
    validate,
)
from monocomp.search import PqrInstance, search_pqr, verify_certificate
from monocomp.transforms import (
    GrowthFunction,
    PqrCompression,
    ProperAdapter,
    SchemeFamily,
    decrease_size,
    find_marker,
    imperfect_to_perfect,
    labeled_lift,
    uniformize,
    vc_dimension,
)
from oracles import pqr_grid, vc_dimension as vc_oracle

POOL10 = [(i,) for i in range(10)]


def omega_family(sizes, pool=POOL10):
    return SchemeFamily({m: tabulate(omega_scheme(), pool, m) for m in sizes})


class TestGrowth:
    @pytest.mark.parametrize("kind", ["identity", "power", "tower"])
    def test_non_decreasing_and_inverse(self, kind):
        f = GrowthFunction(kind)
        values = [f(n) for n in range(5)]
        assert values == sorted(values)
        for m in range(60):
            n = f.inverse(m)
            assert f(n) >= m and (n == 0 or f(n - 1) < m)

    def test_values(self):
        assert [GrowthFunction("tower")(n) for n in range(4)] == [1, 2, 4, 16]
        assert GrowthFunction("power", 3)(2) == 9

    def test_json(self):
        f = GrowthFunction("power", 3)
        assert GrowthFunction.from_json(f.to_json()) == f
        with pytest.raises(ConfigError):
            GrowthFunction("cubic")


class TestUniformize:
    def test_identity_side_value(self):
        scheme = uniformize(omega_family(range(11)), GrowthFunction("identity"))
        _, side = compress(scheme, POOL10[:7])
        assert side == SideInfo(7, 3)

    def test_power_side_value(self):
        scheme = uniformize(omega_family([1, 2, 4, 8, 16]), GrowthFunction("power"))
        _, side = compress(scheme, POOL10[:7])
        assert side.value == 3

    @pytest.mark.parametrize("kind,sizes", [("identity", range(5)), ("power", [1, 2, 4]), ("tower", [1, 2, 4])])
    def test_validates_where_family_did(self, kind, sizes):
        scheme = uniformize(omega_family(sizes), GrowthFunction(kind))
        for p in range(5):
            assert exhaustive_validate(scheme, POOL10, p)

    def test_gap(self):
        scheme = uniformize(omega_family([1, 2]), GrowthFunction("identity"))
        with pytest.raises(FamilyGap):
            compress(scheme, POOL10[:3])

    def test_members_must_be_side_free(self):
        side_member = MonotoneScheme(d=0, sigma=lambda S: ((), SideInfo(1, 1)), eta=lambda k, s: frozenset())
        scheme = uniformize(SchemeFamily({1: side_member}), GrowthFunction("identity"))
        with pytest.raises(ContractViolated):
            compress(scheme, POOL10[:1])


class TestDecreaseSize:
    def test_omega_example(self):
        pool = [(i,) for i in range(100)]
        out = decrease_size(omega_scheme(), pool, POOL10, 1)
        assert find_marker(omega_scheme(), pool, POOL10, 1) == (10,)
        assert out.d == 0
        kept, side = compress(out, ((4,),))
        assert kept == ()
        assert set(reconstruct(out, kept, side)) == set(POOL10)
        assert exhaustive_validate(out, POOL10, 1)

    def test_no_fresh_element(self):
        with pytest.raises(NoFreshElement):
            decrease_size(omega_scheme(), POOL10, POOL10, 1)

    def test_rejects_invalid_input_scheme(self):
        bad = MonotoneScheme(d=1, sigma=lambda S: (S[:1], NO_SIDE), eta=lambda k, s: frozenset(k))
        with pytest.raises(ContractViolated):
            decrease_size(bad, POOL10, POOL10[:3], 1)

    def test_depth1_ladder_k2(self):
        pool = [(a, b) for a in range(3) for b in range(3)] + [(5, 0)]
        sub = [(a, b) for a in range(2) for b in range(3)]
        scheme = ladder_scheme(Scaffold(1))
        out = decrease_size(scheme, pool, sub, 2)
        assert out.d == 1
        assert exhaustive_validate(out, sub, 2)

    def test_random_class_schemes(self):
        rng = random.Random(4)
        checked = 0
        for _ in range(40):
            n = rng.randint(4, 8)
            pool = [(i,) for i in range(n)]
            concepts = [frozenset(x for x in pool if rng.random() < 0.6) for _ in range(6)]
            concepts.append(frozenset(pool))
            scheme = class_scheme(concepts, 1)
            sub = pool[: rng.randint(1, n - 1)]
            try:
                out = decrease_size(scheme, pool, sub, 1)
            except (ContractViolated, NoFreshElement):
                continue
            checked += 1
            assert exhaustive_validate(out, sub, 1)
        assert checked > 0


def max_compression(p=3):
    return PqrCompression(
        sigma=lambda S: frozenset({max(S)}),
        eta=lambda T: frozenset(range(max(T) + 1)),
        pool=tuple(range(10)),
        p=p,
        q=1,
        r=2,
    )


class TestImperfectToPerfect:
    def test_example(self):
        out = imperfect_to_perfect(max_compression())
        S = frozenset({2, 5, 8})
        assert out.sigma(S) == frozenset({5, 8})
        assert out.eta(frozenset({5, 8})) == frozenset(range(9))

    def test_exhaustive(self):
        out = imperfect_to_perfect(max_compression())
        assert out.counterexample() is None
        assert exhaustive_validate(out.as_scheme(), range(10), 3)
        for S in itertools.combinations(range(10), 3):
            assert len(out.sigma(frozenset(S))) == 2

    def test_rejects_wrong_r(self):
        comp = PqrCompression(lambda S: S, lambda T: T, tuple(range(4)), 3, 1, 3)
        with pytest.raises(ContractViolated):
            imperfect_to_perfect(comp)

    def test_rejects_broken_input(self):
        comp = PqrCompression(
            sigma=lambda S: frozenset({min(S)}),
            eta=lambda T: T,
            pool=tuple(range(5)),
            p=3,
            q=1,
            r=2,
        )
        with pytest.raises(ContractViolated):
            imperfect_to_perfect(comp).sigma(frozenset({0, 1, 2}))

    def test_search_certificates(self):
        done = 0
        for args in pqr_grid():
            n, p, q, r, b = args
            if r != q + 1:
                continue
            inst = PqrInstance(*args)
            res = search_pqr(inst)
            if not res.feasible:
                continue
            out = imperfect_to_perfect(PqrCompression.from_certificate(inst, res.certificate))
            assert out.counterexample() is None, args
            cert = out.to_certificate()
            budget = max(len(e) for e in cert.eta.values())
            assert verify_certificate(PqrInstance(n, p, p - 1, p, budget), cert), args
            done += 1
        assert done > 20


def all_classes(domain, max_size):
    concepts = [frozenset(c) for k in range(len(domain) + 1) for c in itertools.combinations(domain, k)]
    for size in range(max_size + 1):
        yield from itertools.combinations(concepts, size)


def random_class(rng, domain):
    size = rng.randint(0, 16)
    return [frozenset(x for x in domain if rng.random() < 0.5) for _ in range(size)]


class TestLabeledLift:
    def test_example(self):
        H = ConceptClass.extensional([0, 1], [{0}, {1}])
        lifted = labeled_lift(H)
        assert set(lifted.concepts) == {
            frozenset({(0, 1), (1, 0)}),
            frozenset({(0, 0), (1, 1)}),
        }

    def test_empty(self):
        assert len(labeled_lift(ConceptClass.extensional([0, 1], []))) == 0

    def test_tuple_points(self):
        H = ConceptClass.extensional([(0,), (1,)], [{(0,)}])
        assert labeled_lift(H).concepts == (frozenset({(0, 1), (1, 0)}),)

    def test_vc_matches_oracle(self):
        rng = random.Random(0)
        for n in range(5):
            domain = list(range(n))
            for _ in range(30):
                H = random_class(rng, domain)
                assert vc_dimension(H, domain) == vc_oracle(H, domain)

    def test_preserves_size_and_vc_small_domains_exhaustively(self):
        for n in range(3):
            domain = list(range(n))
            for concepts in all_classes(domain, 2**n):
                H = ConceptClass.extensional(domain, concepts)
                L = labeled_lift(H)
                assert len(L) == len(H)
                assert vc_dimension(L.concepts, L.pool) == vc_dimension(H.concepts, domain)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(3, 5).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.sets(st.integers(0, n - 1)), max_size=16))))
    def test_preserves_size_and_vc(self, args):
        n, concepts = args
        H = ConceptClass.extensional(range(n), concepts)
        L = labeled_lift(H)
        assert len(L) == len(H)
        assert vc_dimension(L.concepts, L.pool) == vc_dimension(H.concepts, H.pool)


class TestProperAdapter:
    def test_proper_compression_from_lift(self):
        domain = list(range(4))
        H = ConceptClass.extensional(domain, [set(), {0}, {0, 1}, {0, 1, 2}, {0, 1, 2, 3}])
        L = labeled_lift(H)
        adapter = ProperAdapter(class_scheme(L.concepts, 2), H)
        for h in H.concepts:
            lifted = sorted((x, int(x in h)) for x in domain)
            for k in range(len(lifted) + 1):
                for sample in itertools.combinations(lifted, k):
                    assert adapter.consistent(sample)
                    kept, side = adapter.compress(sample)
                    assert adapter.reconstruct(kept, side) in H.concepts

    def test_not_in_class(self):
        H = ConceptClass.extensional([0, 1], [{0}])
        scheme = MonotoneScheme(d=0, sigma=lambda S: ((), NO_SIDE), eta=lambda k, s: frozenset({(1, 1)}))
        with pytest.raises(NotInClass):
            ProperAdapter(scheme, H).reconstruct(())

    def test_vc_of_empty_class(self):
        assert vc_dimension([], [0, 1]) == -1
