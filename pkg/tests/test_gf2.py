import random

from hypothesis import given, settings, strategies as st

from qlearn import gf2
from qlearn.qsim import gf2_nullspace_basis, gf2_rank, gf2_span_contains


def test_identity_basis():
    basis = [1, 2, 4, 8]
    assert gf2_rank(basis) == 4
    assert gf2_nullspace_basis(basis, 4) == []


def test_hand_elimination_example():
    null = gf2_nullspace_basis([0b110, 0b011], 3)
    assert gf2.span(null) == [0b000, 0b111]


def test_span_contains():
    assert gf2_span_contains([0b110, 0b011], 0b101)
    assert not gf2_span_contains([0b110, 0b011], 0b100)
    assert gf2_span_contains([], 0)


def test_rref_shape():
    e = gf2.rref([0b111, 0b110, 0b001, 0])
    assert len(e) == 2
    assert len({v.bit_length() for v in e}) == len(e)
    assert gf2.dot(0b101, 0b111) == 0 and gf2.dot(0b100, 0b111) == 1


vectors = st.lists(st.integers(0, 255), max_size=10)


@settings(max_examples=100, deadline=None)
@given(vectors)
def test_rank_nullity(vs):
    null = gf2.nullspace_basis(vs, 8)
    assert gf2.rank(vs) + len(null) == 8
    assert all(gf2.dot(y, v) == 0 for y in null for v in vs)


@settings(max_examples=100, deadline=None)
@given(vectors, st.randoms(use_true_random=False))
def test_rank_invariant_under_order(vs, rnd):
    shuffled = list(vs)
    rnd.shuffle(shuffled)
    assert gf2.rank(shuffled) == gf2.rank(vs)
    assert gf2.rref(shuffled) == gf2.rref(vs)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 63), max_size=6))
def test_double_complement(vs):
    perp = gf2.orthogonal_complement(vs, 6)
    assert gf2.rref(gf2.orthogonal_complement(perp, 6)) == gf2.rref(vs)
    assert len(gf2.span(vs)) == 2 ** gf2.rank(vs)


def test_span_membership_matches_enumeration():
    rng = random.Random(4)
    for _ in range(30):
        vs = [rng.randrange(64) for _ in range(3)]
        members = set(gf2.span(vs))
        assert all(gf2.span_contains(vs, v) == (v in members) for v in range(64))
