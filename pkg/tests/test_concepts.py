from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlearn.concepts import (ClassTooLarge, Concept, ConceptClass, ConceptError, FlipMask,
                             apply_flip, build_semirich_set, decode_table, encode_table,
                             gamma_at, gamma_hat, gamma_of_subset, is_one_sensitive,
                             is_shattered, majority_concept, min_gamma_over_subsets,
                             one_sensitive_mask, semi_rich_check, semirich_inputs,
                             vc_dimension)
from qlearn.zoo import delta_class, parity_class, random_class

from conftest import table


def brute_gamma_hat(cls):
    """Reference: loop over every subset with Fractions."""
    size = len(cls)
    best = None
    for mask in range(1, 1 << size):
        idx = [i for i in range(size) if mask >> i & 1]
        if len(idx) < 2:
            continue
        g, _ = gamma_of_subset(cls, idx)
        best = g if best is None else min(best, g)
    return best


# -- gamma_at / gamma_of_subset -------------------------------------------

def test_gamma_at_parity_examples():
    c = parity_class(2)
    full = range(4)
    assert gamma_at(c, full, 0b00) == 0
    assert gamma_at(c, full, 0b01) == Fraction(1, 2)


def test_gamma_at_delta():
    assert gamma_at(delta_class(2), range(4), 0b10) == Fraction(1, 4)


def test_gamma_at_empty_subset():
    with pytest.raises(ConceptError, match="empty subset"):
        gamma_at(delta_class(2), [], 0)


def test_gamma_of_subset_examples():
    c = parity_class(2)
    assert gamma_of_subset(c, [0, 3])[0] == Fraction(1, 2)
    assert gamma_of_subset(delta_class(2), range(4))[0] == Fraction(1, 4)
    # {chi_00, chi_01, chi_10}
    g, x = gamma_of_subset(c, [0b00, 0b01, 0b10])
    assert g == Fraction(1, 3)
    assert x == 1


def test_gamma_of_subset_needs_two():
    with pytest.raises(ConceptError):
        gamma_of_subset(delta_class(2), [1])


# -- gamma_hat ------------------------------------------------------------

def test_gamma_hat_examples(two_concepts):
    assert gamma_hat(delta_class(2)).gamma_hat == Fraction(1, 4)
    rep = gamma_hat(parity_class(2))
    assert rep.gamma_hat == Fraction(1, 3)
    assert rep.witness_subset == (0, 1, 2)
    assert rep.exhaustive
    assert gamma_hat(two_concepts).gamma_hat == Fraction(1, 2)


def test_gamma_hat_cap_and_analytic_fallback():
    big = random_class(5, 21, seed=3)
    with pytest.raises(ClassTooLarge, match="too large"):
        gamma_hat(big)
    rep = gamma_hat(parity_class(6))
    assert rep.gamma_hat == Fraction(1, 3) and not rep.exhaustive
    assert gamma_of_subset(parity_class(6), rep.witness_subset)[0] == rep.gamma_hat
    assert gamma_hat(delta_class(5)).gamma_hat == Fraction(1, 32)


def test_analytic_values_match_exhaustive():
    for n in (1, 2, 3, 4):
        cls = parity_class(n)
        assert gamma_hat(cls, cap=20).gamma_hat == cls.analytic_gamma_hat
    for n in (1, 2, 3, 4):
        assert gamma_hat(delta_class(n)).gamma_hat == Fraction(1, 1 << n)


@pytest.mark.parametrize("seed", range(25))
def test_gamma_hat_matches_reference(seed):
    cls = random_class(3, 2 + seed % 9, seed=seed)
    rep = gamma_hat(cls)
    assert rep.gamma_hat == brute_gamma_hat(cls)
    assert gamma_of_subset(cls, rep.witness_subset)[0] == rep.gamma_hat
    assert len(rep.witness_subset) >= 2


def test_min_gamma_filter_can_exclude_everything():
    assert min_gamma_over_subsets(delta_class(2).matrix, lambda m, s: s < 0) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(2, 12), st.integers(0, 2**32))
def test_gamma_hat_lemma_bounds(n, size, seed):
    size = min(size, 2 ** (2 ** n))
    cls = random_class(n, size, seed)
    g = gamma_hat(cls).gamma_hat
    assert Fraction(1, cls.N + 1) <= g <= Fraction(1, 2)


# -- flips ----------------------------------------------------------------

def test_one_sensitive_mask_examples():
    assert not one_sensitive_mask(delta_class(2)).mask.any()
    pair = ConceptClass(1, [[1, 1], [0, 0]])
    assert not one_sensitive_mask(pair).mask.any()
    three = ConceptClass(2, [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0]])
    assert one_sensitive_mask(three).inputs == [0]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 10), st.integers(0, 2**32))
def test_flip_makes_one_sensitive_and_is_involution(n, size, seed):
    size = min(size, 2 ** (2 ** n))
    cls = random_class(n, size, seed)
    mask = one_sensitive_mask(cls)
    flipped = apply_flip(cls, mask)
    assert is_one_sensitive(flipped.matrix)
    assert np.array_equal(apply_flip(flipped, mask).matrix, cls.matrix)
    assert len(flipped) == len(cls)


def test_apply_flip_identity_and_complement():
    d = delta_class(2)
    assert np.array_equal(apply_flip(d, FlipMask.zeros(4)).matrix, d.matrix)
    assert np.array_equal(apply_flip(d, FlipMask(np.ones(4))).matrix, ~d.matrix)
    with pytest.raises(ConceptError):
        apply_flip(d, FlipMask.zeros(8))


def test_majority_concept():
    assert not majority_concept(delta_class(2)).table.any()
    single = ConceptClass(2, [[0, 1, 1, 0]])
    assert majority_concept(single) == single[0]
    pair = ConceptClass(2, [[0, 1, 1, 0], [1, 0, 0, 1]])
    assert not majority_concept(pair).table.any()


# -- semi-rich sets -------------------------------------------------------

def test_semi_rich_check_examples():
    always = ConceptClass(2, [[0, 1, 0, 0], [1, 1, 0, 0], [0, 1, 1, 1]])
    assert semi_rich_check(always, [1], Fraction(1, 3))
    assert semi_rich_check(delta_class(2), [0b00, 0b01], Fraction(1, 4))
    zeros = ConceptClass(2, [[0, 0, 0, 0]])
    assert not semi_rich_check(zeros, [0, 1], Fraction(1, 2))
    with pytest.raises(ConceptError):
        semi_rich_check(zeros, [], Fraction(1, 2))


def test_build_semirich_set_examples(two_concepts):
    assert build_semirich_set(delta_class(2)) == [0b00, 0b01]
    assert build_semirich_set(two_concepts) == [2]
    assert len(build_semirich_set(parity_class(2))) <= 3


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(2, 16), st.integers(0, 2**32))
def test_semirich_postconditions(n, size, seed):
    size = min(size, 2 ** (2 ** n))
    cls = random_class(n, size, seed)
    g = gamma_hat(cls).gamma_hat
    inputs = build_semirich_set(cls)
    assert len(inputs) <= int(1 / g)
    assert semi_rich_check(cls, inputs, g)


def test_semirich_needs_two_rows():
    with pytest.raises(ConceptError):
        semirich_inputs(np.zeros((1, 4), dtype=bool))


def test_halving_inequality_grid():
    xs = np.linspace(0, 0.5, 1002)[1:-1]
    assert all((1 - x) ** int(np.floor(1 / x)) < 0.5 for x in xs)


# -- VC dimension ---------------------------------------------------------

def test_vc_examples():
    assert vc_dimension(delta_class(2)) == 1
    for n in (1, 2, 3, 4):
        assert vc_dimension(parity_class(n)) == n
        assert is_shattered(parity_class(n), [1 << i for i in range(n)])
    assert vc_dimension(ConceptClass(2, [[0, 1, 1, 0]])) == 0


# -- representation -------------------------------------------------------

def test_rows_deduplicated_and_validated():
    cls = ConceptClass(1, [[0, 1], [0, 1], [1, 0]], labels=["a", "b", "c"])
    assert len(cls) == 2 and cls.labels == ["a", "c"]
    with pytest.raises(ConceptError):
        ConceptClass(1, [[0, 1, 0]])
    with pytest.raises(ConceptError):
        ConceptClass(17, np.zeros((1, 2), dtype=bool))


def test_index_of_and_missing_target():
    cls = parity_class(3)
    assert cls.index_of(cls[5]) == 5
    with pytest.raises(ConceptError, match="target not in class"):
        cls.index_of(np.ones(8, dtype=bool))


def test_hex_little_endian():
    # input 0 is the low bit of the first byte
    assert encode_table(table("1000")) == "01"
    assert encode_table(table("0001")) == "08"
    assert encode_table(table("0000000010000000")) == "0001"
    assert np.array_equal(decode_table("0a", 2), table("0101"))
    with pytest.raises(ConceptError):
        decode_table("ff", 2)


def test_json_round_trip():
    cls = ConceptClass(2, [[0, 1, 1, 0], [1, 1, 0, 0]], labels=["x", "y"])
    doc = cls.to_json()
    assert doc == {"n": 2, "concepts": ["06", "03"], "labels": ["x", "y"]}
    back = ConceptClass.from_json(doc)
    assert np.array_equal(back.matrix, cls.matrix) and back.labels == ["x", "y"]


def test_concept_equality_and_call():
    a = Concept(table("0110"))
    assert a == Concept([0, 1, 1, 0]) and hash(a) == hash(Concept([0, 1, 1, 0]))
    assert a(1) == 1 and a(3) == 0 and a.n == 2
    with pytest.raises(ValueError):
        a.table[0] = True
