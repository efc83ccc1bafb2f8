import itertools

import pytest
from hypothesis import given, settings, strategies as st

from monocomp.errors import CapExceeded, ConfigError, RNotP
from monocomp.search import (
    PqrCertificate,
    PqrInstance,
    colex_key,
    counting_bound,
    search_pqr,
    verify_certificate,
)
from oracles import pqr_feasible, pqr_grid


def literal_feasible(n, p, q, r, budget):
    """Every eta table, tried one by one (tiny pools only)."""
    subsets = [frozenset(T) for T in itertools.combinations(range(n), q)]
    recon = [frozenset(E) for k in range(budget + 1) for E in itertools.combinations(range(n), k)]
    samples = [frozenset(S) for S in itertools.combinations(range(n), p)]
    for table in itertools.product(recon, repeat=len(subsets)):
        eta = dict(zip(subsets, table))
        if all(any(T <= S and len(eta[T] & S) >= r for T in subsets) for S in samples):
            return True
    return False


class TestInstance:
    @pytest.mark.parametrize(
        "args",
        [(5, 2, 3, 2, 3), (5, 2, 0, 2, 2), (5, 6, 1, 2, 2), (5, 2, 1, 2, 6), (5, 3, 2, 2, 1)],
    )
    def test_rejects(self, args):
        with pytest.raises(ConfigError):
            PqrInstance(*args)


class TestExamples:
    def test_infeasible(self):
        res = search_pqr(PqrInstance(5, 2, 1, 2, 2))
        assert not res.feasible and res.certificate is None

    def test_full_budget(self):
        inst = PqrInstance(5, 2, 1, 2, 5)
        res = search_pqr(inst)
        assert res.feasible and verify_certificate(inst, res.certificate)

    def test_budget_three(self):
        inst = PqrInstance(4, 2, 1, 2, 3)
        res = search_pqr(inst)
        assert res.feasible and verify_certificate(inst, res.certificate)

    def test_hand_certificate(self):
        a, b, c, d = 0, 1, 2, 3
        eta = {frozenset({a}): frozenset({a, b, c}), frozenset({b}): frozenset({b, c, d}), frozenset({d}): frozenset({a, c, d})}
        sigma = {}
        for S in itertools.combinations(range(4), 2):
            S = frozenset(S)
            sigma[S] = next(T for T in eta if T <= S and S <= eta[T])
        inst = PqrInstance(4, 2, 1, 2, 3)
        cert = PqrCertificate(sigma, eta)
        assert verify_certificate(inst, cert)
        T = frozenset({a})
        truncated = PqrCertificate(sigma, {**eta, T: frozenset({a, b})})
        assert not verify_certificate(inst, truncated)
        S = frozenset({a, b})
        assert not verify_certificate(inst, PqrCertificate({**sigma, S: frozenset({c})}, eta))

    def test_cap(self):
        with pytest.raises(CapExceeded):
            search_pqr(PqrInstance(30, 5, 1, 2, 3), cap=1000)


class TestCountingBound:
    def test_examples(self):
        assert counting_bound(PqrInstance(5, 2, 1, 2, 2))
        assert not counting_bound(PqrInstance(4, 2, 1, 2, 3))
        for n in range(2, 9):
            for p in range(2, n + 1):
                for q in range(1, p):
                    assert not counting_bound(PqrInstance(n, p, q, p, n))

    def test_needs_perfect_case(self):
        with pytest.raises(RNotP):
            counting_bound(PqrInstance(5, 3, 1, 2, 3))


class TestAgainstOracle:
    @pytest.mark.parametrize("args", [(3, 2, 1, 2, 1), (3, 2, 1, 2, 2), (4, 2, 1, 2, 2), (4, 2, 1, 2, 3), (4, 3, 1, 2, 2), (4, 3, 2, 3, 3)])
    def test_oracle_matches_literal_enumeration(self, args):
        assert pqr_feasible(*args) == literal_feasible(*args)

    def test_grid(self):
        for args in pqr_grid():
            inst = PqrInstance(*args)
            res = search_pqr(inst)
            assert res.feasible == pqr_feasible(*args), args
            if res.feasible:
                assert verify_certificate(inst, res.certificate), args
            if inst.r == inst.p and counting_bound(inst):
                assert not res.feasible, args

    def test_monotone_in_budget(self):
        verdicts = {args: search_pqr(PqrInstance(*args)).feasible for args in pqr_grid()}
        for (n, p, q, r, b), ok in verdicts.items():
            if ok and b < n:
                assert verdicts[(n, p, q, r, b + 1)]


class TestCertificates:
    def test_json_roundtrip_and_colex_order(self):
        inst = PqrInstance(5, 3, 1, 2, 3)
        cert = search_pqr(inst).certificate
        obj = cert.to_json()
        keys = [tuple(s) for s, _ in obj["sigma"]]
        assert keys == sorted(keys, key=colex_key)
        again = PqrCertificate.from_json(obj)
        assert again == cert and verify_certificate(inst, again)

    def test_deterministic(self):
        inst = PqrInstance(6, 3, 1, 2, 3)
        assert search_pqr(inst).to_json() == search_pqr(inst).to_json()

    def test_malformed(self):
        with pytest.raises(ConfigError):
            PqrCertificate.from_json({"sigma": 3})

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 7).flatmap(lambda n: st.tuples(st.just(n), st.integers(2, min(n, 4)))).flatmap(
        lambda np_: st.tuples(st.just(np_[0]), st.just(np_[1]), st.integers(1, np_[1] - 1)).flatmap(
            lambda t: st.tuples(st.just(t), st.integers(t[2], t[1]), st.integers(t[2], t[0])))))
    def test_soundness(self, args):
        (n, p, q), r, b = args
        inst = PqrInstance(n, p, q, r, b)
        res = search_pqr(inst)
        if res.feasible:
            assert verify_certificate(inst, res.certificate)
