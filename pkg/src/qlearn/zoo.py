"""Generators for the named concept classes and seeded random classes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .concepts import MAX_N, ConceptClass, ConceptError
from .rng import SplitMix64
from . import gf2

PREFIXED_LOG_CAP = 24
MATERIALIZE_CAP = 1 << 16
RANDOM_CLASS_CAP = 4096
MAX_M = 10


class SpecError(ValueError):
    """Malformed or infeasible class spec."""


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_N:
        raise SpecError(f"n={n} out of range 1..{MAX_N}")


def _inputs(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def _parity_bits(values: np.ndarray) -> np.ndarray:
    v = values.copy()
    out = np.zeros(v.shape, dtype=np.int64)
    while v.any():
        out ^= v & 1
        v >>= 1
    return out.astype(bool)


def parity_table(a: int, n: int) -> np.ndarray:
    return _parity_bits(_inputs(n) & a)


def parity_class(n: int) -> ConceptClass:
    """All ``2^n`` parities ``x -> a.x mod 2``, row ``a`` in order of ``a``.

    Gamma-hat is 1/3 for ``n >= 2`` (1/2 for ``n = 1``).  The triple
    ``{0, 1, 2}`` attains 1/3: every input splits it 2-1 or 0-3.  Nothing goes
    lower: collect the answer vectors ``(a.x)_{a in A}`` over all ``x``; they
    form a linear code that separates every pair of positions.  If all its
    weights avoided ``[|A|/3, 2|A|/3]``, the words of weight below ``|A|/3``
    would be closed under addition and would still separate all positions,
    but such a code has average nonzero weight above ``(|A|-1)/2``.
    """
    _check_n(n)
    xs = _inputs(n)
    rows = _parity_bits(xs[None, :] & xs[:, None])
    if n == 1:
        gamma, witness = Fraction(1, 2), (0, 1)
    else:
        gamma, witness = Fraction(1, 3), (0, 1, 2)
    return ConceptClass(n, rows, analytic_gamma_hat=gamma, analytic_witness=witness,
                        name=f"parity:n={n}")


def delta_class(n: int) -> ConceptClass:
    """Point functions ``f_i(x) = [x == i]``; gamma-hat is ``1/N``.

    A subset of ``s`` point functions has exactly one 1 in each column it
    owns, so its gamma is ``1/s``; the full class minimizes it.
    """
    _check_n(n)
    size = 1 << n
    return ConceptClass(n, np.eye(size, dtype=bool), analytic_gamma_hat=Fraction(1, size),
                        analytic_witness=tuple(range(size)), name=f"delta:n={n}")


def _int_root(n: int, d: int) -> int | None:
    r = round(n ** (1.0 / d))
    for cand in (r - 1, r, r + 1):
        if cand >= 1 and cand ** d == n:
            return cand
    return None


@dataclass(frozen=True)
class BlockLayout:
    """How an ``n``-bit input splits into parity blocks (most significant first)."""

    n: int
    blocks: int
    width: int

    def block_mask(self, i: int) -> int:
        shift = self.n - (i + 1) * self.width
        return ((1 << self.width) - 1) << shift

    def block_value(self, x: int, i: int) -> int:
        return (x >> (self.n - (i + 1) * self.width)) & ((1 << self.width) - 1)

    def embed(self, y: int, i: int) -> int:
        return y << (self.n - (i + 1) * self.width)


def nested_bv_layout(n: int, d: int) -> BlockLayout:
    """``n^{1/d}`` blocks of ``n^{(d-1)/d}`` bits; ``d = 1`` is one block of ``n``."""
    _check_n(n)
    if d < 1:
        raise SpecError("d must be positive")
    if d == 1:
        return BlockLayout(n, 1, n)
    blocks = _int_root(n, d)
    if blocks is None:
        raise SpecError(f"n^(1/{d}) is not integral for n={n}; block split is not integral")
    width = n // blocks
    if blocks * width != n or _int_root(n ** (d - 1), d) != width:
        raise SpecError(f"n^((d-1)/d) is not integral for n={n}, d={d}")
    return BlockLayout(n, blocks, width)


def nested_bv_table(a: int, layout: BlockLayout) -> np.ndarray:
    xs = _inputs(layout.n)
    out = np.zeros(len(xs), dtype=bool)
    for i in range(layout.blocks):
        mask = layout.block_mask(i)
        out |= _parity_bits(xs & (a & mask))
    return out


def nested_bv_class(n: int, d: int) -> ConceptClass:
    layout = nested_bv_layout(n, d)
    size = 1 << n
    xs = _inputs(n)
    rows = np.zeros((size, size), dtype=bool)
    for i in range(layout.blocks):
        mask = layout.block_mask(i)
        rows |= _parity_bits((xs[:, None] & mask) & xs[None, :])
    cls = ConceptClass(n, rows, name=f"nestedbv:n={n},d={d}")
    if len(cls) != size:
        raise ConceptError("nested BV rows collided")
    return cls


class PrefixedParityClass:
    """Lazily evaluated class: concept ``(a^0, ..., a^{2^k-1})`` maps ``x`` to
    ``a^i . y mod 2`` with ``i`` the ``k``-bit prefix and ``y`` the suffix of ``x``.

    The concept index packs ``a^0`` in its most significant ``n-k`` bits.
    """

    def __init__(self, n: int, k: int):
        _check_n(n)
        if not 1 <= k < n:
            raise SpecError("need 1 <= k < n")
        if (1 << k) * (n - k) > PREFIXED_LOG_CAP:
            raise SpecError(f"2^k (n-k) = {(1 << k) * (n - k)} exceeds the 2^{PREFIXED_LOG_CAP} class-size cap")
        self.n = n
        self.k = k
        self.suffix_bits = n - k
        self.prefixes = 1 << k
        self.name = f"prefixed:n={n},k={k}"

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def log_size(self) -> int:
        return self.prefixes * self.suffix_bits

    def __len__(self) -> int:
        return 1 << self.log_size

    def parts(self, index: int) -> list[int]:
        w = self.suffix_bits
        return [(index >> ((self.prefixes - 1 - i) * w)) & ((1 << w) - 1) for i in range(self.prefixes)]

    def index_from_parts(self, parts) -> int:
        index = 0
        for part in parts:
            index = (index << self.suffix_bits) | int(part)
        return index

    def table(self, index: int) -> np.ndarray:
        xs = _inputs(self.n)
        prefix = xs >> self.suffix_bits
        suffix = xs & ((1 << self.suffix_bits) - 1)
        a = np.array(self.parts(index), dtype=np.int64)
        return _parity_bits(a[prefix] & suffix)

    def __call__(self, index: int, x: int) -> int:
        i = x >> self.suffix_bits
        y = x & ((1 << self.suffix_bits) - 1)
        return bin(self.parts(index)[i] & y).count("1") & 1

    def materialize(self) -> ConceptClass:
        if len(self) > MATERIALIZE_CAP:
            raise SpecError(f"refusing to materialize {len(self)} concepts (cap {MATERIALIZE_CAP})")
        size = len(self)
        xs = _inputs(self.n)
        prefix = xs >> self.suffix_bits
        suffix = xs & ((1 << self.suffix_bits) - 1)
        idx = np.arange(size, dtype=np.int64)
        shift = (self.prefixes - 1 - prefix) * self.suffix_bits
        a = (idx[:, None] >> shift[None, :]) & ((1 << self.suffix_bits) - 1)
        rows = _parity_bits(a & suffix[None, :])
        return ConceptClass(self.n, rows, name=self.name)


def prefixed_parity_class(n: int, k: int) -> PrefixedParityClass:
    return PrefixedParityClass(n, k)


# -- V-invariant functions -------------------------------------------------

@dataclass(frozen=True)
class MultiOutputFunction:
    """``f: {0,1}^m -> {0,1}^m`` as a table of ``2^m`` integers."""

    m: int
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != 1 << self.m:
            raise ValueError("table length must be 2^m")

    def __call__(self, x: int) -> int:
        return self.table[x]


def v_invariant_function(basis, m: int, seed: int) -> MultiOutputFunction:
    """Random ``f`` constant exactly on the cosets of ``span(basis)``."""
    if not 1 <= m <= MAX_M:
        raise SpecError(f"m={m} out of range 1..{MAX_M}")
    basis = [int(v) for v in basis]
    if gf2.rank(basis) != len(basis):
        raise SpecError("basis vectors are linearly dependent")
    ell = len(basis)
    if ell >= m:
        raise SpecError("need dim V < m")
    echelon = gf2.rref(basis)
    reps = sorted({gf2.reduce(x, echelon) for x in range(1 << m)})
    assert len(reps) == 1 << (m - ell)
    values = SplitMix64(seed).shuffle_prefix(1 << m, len(reps))
    value_of = dict(zip(reps, values))
    table = tuple(value_of[gf2.reduce(x, echelon)] for x in range(1 << m))
    return MultiOutputFunction(m, table)


def verify_v_invariant(f: MultiOutputFunction, basis) -> bool:
    """``f(x) == f(y)`` iff ``x ^ y`` lies in ``span(basis)``, over all pairs."""
    echelon = gf2.rref([int(v) for v in basis])
    table = np.asarray(f.table)
    size = len(table)
    xs = np.arange(size)
    same_value = table[:, None] == table[None, :]
    diff = xs[:, None] ^ xs[None, :]
    in_span = np.zeros(size, dtype=bool)
    for v in gf2.span(echelon):
        in_span[v] = True
    return bool(np.array_equal(same_value, in_span[diff]))


def index_bits(m: int) -> int:
    return max(0, math.ceil(math.log2(m))) if m > 1 else 0


def flatten_to_boolean(f: MultiOutputFunction) -> np.ndarray:
    """Truth table of ``f~(x, j) = j-th bit of f(x)`` over ``m + ceil(log2 m)`` bits.

    Input ``(x, j)`` is ``x << ceil(log2 m) | j``; ``j = 0`` is the most
    significant output bit and ``j >= m`` answers 0.
    """
    m = f.m
    if m > MAX_M:
        raise SpecError(f"m={m} too large")
    jb = index_bits(m)
    table = np.zeros(1 << (m + jb), dtype=bool)
    for x, value in enumerate(f.table):
        for j in range(m):
            table[(x << jb) | j] = (value >> (m - 1 - j)) & 1
    return table


def unflatten(table, m: int) -> MultiOutputFunction:
    jb = index_bits(m)
    values = []
    for x in range(1 << m):
        v = 0
        for j in range(m):
            v = (v << 1) | int(table[(x << jb) | j])
        values.append(v)
    return MultiOutputFunction(m, tuple(values))


def v_invariant_class(m: int, ell: int, seed: int, per_subspace: int = 4):
    """Flattened V-invariant functions, ``per_subspace`` sampled per subspace.

    Returns the class and the piece (subspace) index of every row.
    """
    from .partitions import count_invariant, enumerate_subspaces

    if per_subspace > count_invariant(m, ell):
        raise SpecError("more samples per subspace than V-invariant functions exist")
    rng = SplitMix64(seed)
    rows, pieces, labels = [], [], []
    for p, sub in enumerate(enumerate_subspaces(m, ell)):
        seen = set()
        while len(seen) < per_subspace:
            # duplicates within one subspace are redrawn; across subspaces they cannot occur
            table = flatten_to_boolean(v_invariant_function(sub.basis, m, rng.next_u64()))
            key = table.tobytes()
            if key in seen:
                continue
            seen.add(key)
            rows.append(table)
            pieces.append(p)
            labels.append(f"V{p}.{len(seen) - 1}")
    n = m + index_bits(m)
    cls = ConceptClass(n, rows, labels=labels, name=f"vinv:m={m},l={ell},seed={seed}")
    assert len(cls) == len(rows)
    return cls, pieces


# -- random classes --------------------------------------------------------

def random_class(n: int, size: int, seed: int) -> ConceptClass:
    """``size`` distinct truth tables drawn from a splitmix64 stream."""
    if not 0 <= n <= MAX_N:
        raise SpecError(f"n={n} out of range")
    limit = min(2 ** (1 << n), RANDOM_CLASS_CAP)
    if not 1 <= size <= limit:
        raise SpecError(f"size={size} infeasible (max {limit})")
    width = 1 << n
    rng = SplitMix64(seed)
    seen = set()
    tables = []
    while len(tables) < size:
        value = rng.randbits(width)
        if value in seen:
            continue
        seen.add(value)
        tables.append(value)
    rows = np.array([[(t >> x) & 1 for x in range(width)] for t in tables], dtype=bool)
    return ConceptClass(n, rows, name=f"rand:n={n},size={size},seed={seed}")


# -- spec strings ----------------------------------------------------------

KIND_ALIASES = {
    "parity": "parity",
    "delta": "delta",
    "nestedbv": "nested_bv",
    "nested_bv": "nested_bv",
    "prefixed": "prefixed_parity",
    "prefixed_parity": "prefixed_parity",
    "vinv": "v_invariant",
    "v_invariant": "v_invariant",
    "rand": "random",
    "random": "random",
}

REQUIRED = {
    "parity": ("n",),
    "delta": ("n",),
    "nested_bv": ("n", "d"),
    "prefixed_parity": ("n", "k"),
    "v_invariant": ("m", "l"),
    "random": ("n", "size"),
}


@dataclass(frozen=True)
class ClassSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    text: str = ""

    @classmethod
    def parse(cls, text: str) -> "ClassSpec":
        text = text.strip()
        head, _, tail = text.partition(":")
        kind = KIND_ALIASES.get(head.strip().lower())
        if kind is None:
            raise SpecError(f"unknown class kind {head!r}")
        params = {}
        if tail:
            for item in tail.split(","):
                key, eq, value = item.partition("=")
                if not eq:
                    raise SpecError(f"malformed parameter {item!r} in {text!r}")
                try:
                    params[key.strip().lower()] = int(value, 0)
                except ValueError:
                    raise SpecError(f"parameter {key!r} must be an integer") from None
        missing = [p for p in REQUIRED[kind] if p not in params]
        if missing:
            raise SpecError(f"{text!r} is missing {', '.join(missing)}")
        seed = params.pop("seed", 0)
        return cls(kind, params, seed, text)

    def build(self):
        p = self.params
        if self.kind == "parity":
            return parity_class(p["n"])
        if self.kind == "delta":
            return delta_class(p["n"])
        if self.kind == "nested_bv":
            return nested_bv_class(p["n"], p["d"])
        if self.kind == "prefixed_parity":
            return prefixed_parity_class(p["n"], p["k"])
        if self.kind == "random":
            return random_class(p["n"], p["size"], self.seed)
        if self.kind == "v_invariant":
            cls, _ = v_invariant_class(p["m"], p["l"], self.seed, p.get("s", 4))
            return cls
        raise SpecError(self.kind)  # pragma: no cover

    def build_explicit(self) -> ConceptClass:
        built = self.build()
        if isinstance(built, PrefixedParityClass):
            return built.materialize()
        return built
