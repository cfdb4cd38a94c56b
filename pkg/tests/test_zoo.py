import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlearn import gf2
from qlearn.concepts import gamma_hat, vc_dimension
from qlearn.zoo import (ClassSpec, MultiOutputFunction, PrefixedParityClass, SpecError,
                        delta_class, flatten_to_boolean, index_bits, nested_bv_class,
                        nested_bv_layout, parity_class, prefixed_parity_class, random_class,
                        unflatten, v_invariant_class, v_invariant_function,
                        verify_v_invariant)

from conftest import table


def test_parity_examples():
    c1 = parity_class(1)
    assert np.array_equal(c1.matrix, [table("00"), table("01")])
    c2 = parity_class(2)
    assert np.array_equal(c2[0b11].table, table("0110"))
    for n in range(1, 7):
        assert len(parity_class(n)) == 2 ** n


def test_parity_range():
    with pytest.raises(SpecError):
        parity_class(0)
    with pytest.raises(SpecError):
        parity_class(17)


def test_delta_examples():
    assert np.array_equal(delta_class(1).matrix, [table("10"), table("01")])
    m = delta_class(4).matrix
    assert (m.sum(axis=0) == 1).all() and (m.sum(axis=1) == 1).all()
    assert gamma_hat(delta_class(2)).gamma_hat.denominator == 4


def test_nested_bv_d1_is_parity():
    assert np.array_equal(nested_bv_class(4, 1).matrix, parity_class(4).matrix)


def test_nested_bv_example():
    # a = (01, 00): block 0 holds bits x1 x2, a selects x_{1,2}
    cls = nested_bv_class(4, 2)
    a = 0b0100
    row = cls.matrix[a]
    expected = [(x >> 2) & 1 for x in range(16)]
    assert row.tolist() == [bool(v) for v in expected]
    assert len(cls) == 16


def test_nested_bv_or_of_blocks():
    cls = nested_bv_class(4, 2)
    a = 0b1001
    for x in range(16):
        hi = bin((a >> 2) & (x >> 2)).count("1") & 1
        lo = bin((a & 3) & (x & 3)).count("1") & 1
        assert cls.matrix[a, x] == bool(hi | lo)


def test_nested_bv_layouts():
    lay = nested_bv_layout(9, 2)
    assert (lay.blocks, lay.width) == (3, 3)
    assert lay.block_mask(0) == 0b111000000
    assert lay.block_value(0b101000011, 2) == 0b011
    assert (nested_bv_layout(16, 2).blocks, nested_bv_layout(8, 3).blocks) == (4, 2)
    with pytest.raises(SpecError, match="integral"):
        nested_bv_layout(6, 2)


def test_prefixed_examples():
    c = prefixed_parity_class(2, 1)
    assert len(c) == 4
    assert not c.table(0).any()
    assert len(prefixed_parity_class(5, 2)) == 2 ** 12
    with pytest.raises(SpecError, match="cap"):
        prefixed_parity_class(16, 2)
    with pytest.raises(SpecError):
        PrefixedParityClass(4, 4)


def test_prefixed_lazy_matches_materialized():
    lazy = prefixed_parity_class(4, 2)
    cls = lazy.materialize()
    assert len(cls) == len(lazy) == 2 ** 8
    for idx in (0, 1, 77, 255):
        assert np.array_equal(cls.matrix[idx], lazy.table(idx))
        assert all(lazy(idx, x) == lazy.table(idx)[x] for x in range(16))
        assert lazy.index_from_parts(lazy.parts(idx)) == idx


def test_v_invariant_examples():
    f = v_invariant_function([], 3, seed=1)
    assert len(set(f.table)) == 8
    g = v_invariant_function([0b11], 2, seed=5)
    assert g(0b00) == g(0b11) and g(0b01) == g(0b10) and g(0b00) != g(0b01)
    with pytest.raises(SpecError, match="dependent"):
        v_invariant_function([0b11, 0b11], 3, seed=0)
    with pytest.raises(SpecError):
        v_invariant_function([1, 2], 2, seed=0)


def test_v_invariant_hundred_seeds():
    from qlearn.partitions import enumerate_subspaces
    subs = enumerate_subspaces(5, 2)
    for seed in range(100):
        sub = subs[seed % len(subs)]
        assert verify_v_invariant(v_invariant_function(sub.basis, 5, seed), sub.basis)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.data())
def test_v_invariant_iff_exhaustive(m, data):
    ell = data.draw(st.integers(0, m - 1))
    vecs = data.draw(st.lists(st.integers(1, (1 << m) - 1), min_size=ell, max_size=ell))
    basis = gf2.rref(vecs)
    f = v_invariant_function(basis, m, data.draw(st.integers(0, 2**64 - 1)))
    assert verify_v_invariant(f, basis)
    assert len(set(f.table)) == 2 ** (m - len(basis))


def test_verify_detects_wrong_subspace():
    f = v_invariant_function([0b011], 3, seed=2)
    assert not verify_v_invariant(f, [0b101])


def test_flatten_examples():
    zero = MultiOutputFunction(3, (0,) * 8)
    assert not flatten_to_boolean(zero).any()
    ident = MultiOutputFunction(2, (0, 1, 2, 3))
    t = flatten_to_boolean(ident)
    jb = index_bits(2)
    assert jb == 1
    for x in range(4):
        # j = 0 is the most significant bit
        assert t[(x << jb) | 0] == (x >> 1) & 1
        assert t[(x << jb) | 1] == x & 1
    assert index_bits(5) == 3 and index_bits(1) == 0


@pytest.mark.parametrize("m", [2, 3, 5, 6])
def test_flatten_round_trip(m):
    f = v_invariant_function([1], m, seed=m)
    t = flatten_to_boolean(f)
    assert len(t) == 2 ** (m + index_bits(m))
    assert unflatten(t, m) == f
    # padding inputs j >= m answer 0
    jb = index_bits(m)
    pads = [(x << jb) | j for x in range(1 << m) for j in range(m, 1 << jb)]
    assert not t[pads].any()


def test_v_invariant_class_pieces():
    cls, pieces = v_invariant_class(3, 1, seed=7)
    assert len(cls) == 4 * 7 and len(pieces) == len(cls)
    assert sorted(set(pieces)) == list(range(7))
    assert cls.n == 3 + 2


def test_random_class_examples():
    a, b = random_class(4, 12, 1), random_class(4, 12, 1)
    assert np.array_equal(a.matrix, b.matrix)
    assert len({r.tobytes() for r in a.matrix}) == 12
    assert gamma_hat(random_class(3, 2, 9)).gamma_hat == 0.5
    with pytest.raises(SpecError, match="infeasible"):
        random_class(1, 5, 0)
    assert not np.array_equal(random_class(4, 12, 2).matrix, a.matrix)


def test_random_class_frozen():
    # top 4 bits of the first three splitmix64(0) outputs: 0xE..., 0x6..., 0x0...
    assert random_class(2, 3, 0).to_json()["concepts"] == ["0e", "06", "00"]


def test_parity_vc():
    assert vc_dimension(parity_class(4)) == 4


@pytest.mark.parametrize("text,kind,params,seed", [
    ("parity:n=6", "parity", {"n": 6}, 0),
    ("delta:n=5", "delta", {"n": 5}, 0),
    ("nestedbv:n=16,d=2", "nested_bv", {"n": 16, "d": 2}, 0),
    ("vinv:m=6,l=2,seed=7", "v_invariant", {"m": 6, "l": 2}, 7),
    ("rand:n=4,size=12,seed=1", "random", {"n": 4, "size": 12}, 1),
    ("prefixed:n=5,k=2", "prefixed_parity", {"n": 5, "k": 2}, 0),
])
def test_spec_parse(text, kind, params, seed):
    spec = ClassSpec.parse(text)
    assert (spec.kind, spec.params, spec.seed) == (kind, params, seed)


@pytest.mark.parametrize("text", ["", "cube:n=3", "parity", "parity:n", "parity:n=x", "nestedbv:n=4"])
def test_spec_parse_errors(text):
    with pytest.raises(SpecError):
        ClassSpec.parse(text)


def test_spec_build():
    assert len(ClassSpec.parse("rand:n=4,size=12,seed=1").build()) == 12
    assert isinstance(ClassSpec.parse("prefixed:n=3,k=1").build(), PrefixedParityClass)
    assert len(ClassSpec.parse("prefixed:n=3,k=1").build_explicit()) == 16
    with pytest.raises(SpecError):
        ClassSpec.parse("nestedbv:n=6,d=2").build()
