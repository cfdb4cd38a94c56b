import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlearn.concepts import ConceptError, gamma_hat
from qlearn.learners import (ceil_log2, class_table, classical_halving_learn, get_learner,
                             halving_query_bound, inner_repetitions, nested_bv_learn,
                             quantiles, quantum_exact_learn, quantum_query_cap, run_trials)
from qlearn.qsim import OracleSpec
from qlearn.rng import SplitMix64
from qlearn.zoo import (ClassSpec, SpecError, delta_class, nested_bv_class, parity_class,
                        prefixed_parity_class, random_class)


def test_bound_helpers():
    assert [ceil_log2(x) for x in (1, 2, 3, 4, 5, 32, 33)] == [0, 1, 2, 2, 3, 5, 6]
    # ceil(log2(3 * 5)) = 4 for |C| = 32; ceil(log2(3 * 6)) = 5 for |C| = 64
    assert inner_repetitions(32) == 4 and inner_repetitions(64) == 5
    assert inner_repetitions(2) == 2
    assert quantum_query_cap(32, Fraction(1, 32)) == 5 * 4 * 26
    assert quantum_query_cap(64, Fraction(1, 3)) == 6 * 5 * 8
    assert halving_query_bound(64, Fraction(1, 3)) == math.ceil(6 / -math.log2(2 / 3))
    assert halving_query_bound(32, Fraction(1, 32)) == math.ceil(5 / -math.log2(31 / 32))
    assert halving_query_bound(1, Fraction(1, 2)) == 0


def test_halving_bound_matches_float_formula():
    for size in range(2, 200, 7):
        for den in (2, 3, 5, 17, 64):
            g = Fraction(1, den)
            approx = math.log2(size) / -math.log2(1 - 1 / den)
            assert halving_query_bound(size, g) in (math.ceil(approx - 1e-9), math.ceil(approx + 1e-9))


@pytest.mark.parametrize("cls", [delta_class(3), parity_class(4), random_class(4, 12, 1),
                                 nested_bv_class(4, 2)], ids=["delta3", "parity4", "rand", "nbv"])
def test_quantum_learner_small(cls):
    g = gamma_hat(cls).gamma_hat
    cap = quantum_query_cap(len(cls), g)
    rep = run_trials(quantum_exact_learn, cls, seed=5, trials=2 * len(cls))
    assert rep.success_rate >= 0.6
    assert rep.quantum_quantiles[2] <= cap
    for r in rep.results:
        assert r.ledger.consistent()
        assert r.outer_iterations >= 1


def test_quantum_learner_two_concepts(two_concepts):
    for t in range(2):
        res = quantum_exact_learn(two_concepts, OracleSpec(two_concepts[t]), SplitMix64(t))
        assert res.success and res.hypothesis == two_concepts[t]


def test_quantum_learner_rejects_outside_target():
    cls = delta_class(2)
    with pytest.raises(ConceptError, match="target not in class"):
        quantum_exact_learn(cls, OracleSpec(np.ones(4, dtype=bool)), SplitMix64(0))
    with pytest.raises(ConceptError):
        quantum_exact_learn(delta_class(2).__class__(2, [[0, 1, 0, 0]]), OracleSpec([0, 1, 0, 0]), SplitMix64(0))


def test_quantum_learner_deterministic():
    cls = random_class(4, 14, 3)
    a = run_trials(quantum_exact_learn, cls, seed=9, trials=20)
    b = run_trials(quantum_exact_learn, cls, seed=9, trials=20)
    assert [r.ledger.quantum_queries for r in a.results] == [r.ledger.quantum_queries for r in b.results]
    assert [r.hypothesis for r in a.results] == [r.hypothesis for r in b.results]


@pytest.mark.parametrize("cls", [delta_class(4), parity_class(5), random_class(3, 16, 2),
                                 nested_bv_class(4, 2), prefixed_parity_class(3, 1).materialize()],
                         ids=["delta4", "parity5", "rand", "nbv", "prefixed"])
def test_halving_exact_within_bound(cls):
    bound = halving_query_bound(len(cls), gamma_hat(cls).gamma_hat)
    for t in range(len(cls)):
        res = classical_halving_learn(cls, OracleSpec(cls[t]))
        assert res.success
        assert res.ledger.classical_queries <= bound
        assert res.ledger.quantum_queries == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(2, 16), st.integers(0, 2**32))
def test_halving_property(n, size, seed):
    size = min(size, 2 ** (2 ** n))
    cls = random_class(n, size, seed)
    bound = halving_query_bound(size, gamma_hat(cls).gamma_hat)
    worst = 0
    for t in range(size):
        res = classical_halving_learn(cls, OracleSpec(cls[t]))
        assert res.success
        worst = max(worst, res.ledger.classical_queries)
    assert worst <= bound
    # counting bound: q queries distinguish at most (N+1)^q concepts
    assert worst >= math.log2(size) / math.log2(cls.N + 1)


def test_halving_information_bound_nested_bv():
    cls = nested_bv_class(4, 2)
    worst = max(classical_halving_learn(cls, OracleSpec(cls[t])).ledger.classical_queries
                for t in range(len(cls)))
    assert worst >= math.log2(len(cls))


@pytest.mark.parametrize("text,blocks", [("parity:n=6", 1), ("nestedbv:n=4,d=2", 2),
                                         ("nestedbv:n=9,d=2", 3), ("prefixed:n=4,k=2", 4)])
def test_nested_bv_learner_exact(text, blocks):
    spec = ClassSpec.parse(text)
    cls = spec.build()
    size = len(cls)
    step = max(1, size // 64)
    for t in range(0, size, step):
        o = OracleSpec(class_table(cls, t))
        res = nested_bv_learn(spec, o, SplitMix64(t))
        assert res.success
        assert res.ledger.quantum_queries == blocks
        assert res.ledger.classical_queries == 0


def test_nested_bv_learner_spec_mismatch():
    with pytest.raises(SpecError, match="mismatch"):
        nested_bv_learn("parity:n=3", OracleSpec(np.zeros(16, dtype=bool)))
    with pytest.raises(SpecError):
        nested_bv_learn("delta:n=3", OracleSpec(np.zeros(8, dtype=bool)))


def test_get_learner():
    assert get_learner("quantum") is quantum_exact_learn
    assert get_learner("halving") is classical_halving_learn
    with pytest.raises(SpecError):
        get_learner("nestedbv")
    with pytest.raises(SpecError):
        get_learner("oracle")


def test_run_trials_targets():
    cls = delta_class(3)
    rep = run_trials(classical_halving_learn, cls, seed=0, trials=16)
    assert rep.trials == 16 and rep.success_rate == 1.0
    hyps = [r.hypothesis for r in rep.results]
    assert hyps[:8] == [cls[i] for i in range(8)] and hyps[8:] == hyps[:8]
    with pytest.raises(ValueError):
        run_trials(classical_halving_learn, cls, seed=0, trials=0)


def test_quantiles():
    assert quantiles([3, 1, 2]) == (1, 2, 3)
    assert quantiles([1, 2, 3, 4]) == (1, 2.5, 4)
