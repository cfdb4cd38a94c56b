"""Partition learning.

A partition splits a concept class into disjoint pieces; the learner only has
to name the piece holding the hidden concept.

Membership in the admissible family used by :func:`gamma_hat_partition` is
decided by the largest piece induced on ``C'``: every ``C'' ⊆ C'`` with
``|C''| >= 3|C'|/4`` meets two pieces exactly when no single piece holds
``ceil(3|C'|/4)`` members of ``C'`` (take ``C''`` inside that piece for the
converse).

The first split of :func:`algorithm4_build_partition` derives its flips and
input set from the gamma-hat witness ``C'`` and applies them to the whole
class view.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import gf2
from .concepts import (GAMMA_HAT_CAP, ClassTooLarge, ConceptClass,
                       _popcounts, flip_columns, gamma_hat, is_one_sensitive,
                       mask_to_indices, min_gamma_over_subsets, minority_counts)
from .qsim import FunctionOracle, OracleSpec, QueryLedger, simon_sample
from .rng import SplitMix64

ENUMERATE_MAX_M = 5
COUNT_MAX_M = 64
INVARIANT_MAX_COSETS = 1 << 16


class PartitionError(ValueError):
    pass


# -- partitions ------------------------------------------------------------

class Partition:
    """Disjoint nonempty pieces covering ``range(size)``."""

    def __init__(self, pieces: Sequence[Sequence[int]], size: int | None = None):
        pieces = [tuple(sorted(int(i) for i in p)) for p in pieces]
        if not pieces:
            raise PartitionError("a partition needs at least one piece")
        seen: set[int] = set()
        for p in pieces:
            if not p:
                raise PartitionError("empty piece")
            if seen.intersection(p):
                raise PartitionError("pieces overlap")
            seen.update(p)
        total = len(seen)
        if size is None:
            size = total
        if seen != set(range(size)):
            raise PartitionError("pieces do not cover the class")
        self.pieces = pieces
        self.size = size
        self._owner = np.empty(size, dtype=np.int64)
        for i, p in enumerate(pieces):
            self._owner[list(p)] = i

    def __len__(self) -> int:
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and sorted(self.pieces) == sorted(other.pieces)

    def __repr__(self) -> str:
        return f"Partition(k={len(self)}, |C|={self.size})"

    def piece_of(self, concept_index: int) -> int:
        return int(self._owner[concept_index])

    def owners(self) -> np.ndarray:
        return self._owner.copy()

    @classmethod
    def singletons(cls, size: int) -> "Partition":
        return cls([[i] for i in range(size)], size)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(i)
        return cls([groups[k] for k in sorted(groups)], len(labels))

    def to_json(self) -> dict:
        return {"size": self.size, "pieces": [list(p) for p in self.pieces]}

    @classmethod
    def from_json(cls, doc: dict) -> "Partition":
        return cls(doc["pieces"], doc.get("size"))


def version_key(members: Sequence[int]) -> str:
    """Stable 128-bit key for a canonical (sorted) index set."""
    text = ",".join(str(int(i)) for i in sorted(members))
    return hashlib.blake2b(text.encode(), digest_size=16).hexdigest()


@dataclass(frozen=True)
class MemoEntry:
    members: tuple[int, ...]
    inputs: tuple[int, ...]   # I(S)
    j_flips: tuple[int, ...]  # J(S)
    k_flips: tuple[int, ...]  # K(S)
    zero_child: tuple[int, ...]
    one_child: tuple[int, ...]


class MemoTables:
    """Per-node ``(I, J, K)`` sets from the refinement tree."""

    def __init__(self, size: int):
        self.size = size
        self.entries: dict[tuple[int, ...], MemoEntry] = {}
        self._by_key: dict[str, tuple[int, ...]] = {}

    def add(self, entry: MemoEntry) -> None:
        key = version_key(entry.members)
        other = self._by_key.get(key)
        if other is not None and other != entry.members:
            raise PartitionError("memo key collision")
        self._by_key[key] = entry.members
        self.entries[entry.members] = entry

    def lookup(self, members) -> MemoEntry | None:
        members = tuple(sorted(int(i) for i in members))
        key = version_key(members)
        stored = self._by_key.get(key)
        if stored is None:
            return None
        if stored != members:
            raise PartitionError("memo key collision")
        return self.entries[stored]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, members) -> bool:
        return self.lookup(members) is not None

    def to_json(self) -> dict:
        return {"size": self.size, "entries": [
            {"key": version_key(e.members), "members": list(e.members), "I": list(e.inputs),
             "J": list(e.j_flips), "K": list(e.k_flips),
             "zero": list(e.zero_child), "one": list(e.one_child)}
            for e in self.entries.values()]}

    @classmethod
    def from_json(cls, doc: dict) -> "MemoTables":
        memo = cls(doc["size"])
        for e in doc["entries"]:
            entry = MemoEntry(tuple(e["members"]), tuple(e["I"]), tuple(e["J"]), tuple(e["K"]),
                              tuple(e["zero"]), tuple(e["one"]))
            if version_key(entry.members) != e["key"]:
                raise PartitionError("memo key does not match its members")
            memo.add(entry)
        return memo


# -- gamma for partitions --------------------------------------------------

@dataclass(frozen=True)
class PartitionGammaReport:
    gamma_hat_p: Fraction | None
    witness_subset: tuple[int, ...]
    exhaustive: bool = True

    @property
    def empty(self) -> bool:
        return self.gamma_hat_p is None


def largest_induced_piece(partition: Partition, subset) -> int:
    owners = partition.owners()[list(subset)]
    return int(np.bincount(owners).max()) if len(owners) else 0


def in_admissible_family(partition: Partition, subset) -> bool:
    size = len(subset)
    return size >= 2 and largest_induced_piece(partition, subset) < -(-3 * size // 4)


def gamma_hat_partition(cls: ConceptClass, partition: Partition,
                        cap: int = GAMMA_HAT_CAP) -> PartitionGammaReport:
    """``min gamma^{C'}`` over subsets ``C'`` meeting the 3/4 criterion.

    Returns a report with ``gamma_hat_p=None`` when no subset qualifies.
    """
    size = len(cls)
    if partition.size != size:
        raise PartitionError("partition does not match the class")
    if size > cap:
        raise ClassTooLarge(f"class too large for exhaustive γ̂_P (|C|={size} > {cap})")
    piece_masks = np.array([sum(1 << i for i in p) for p in partition.pieces], dtype=np.int64)

    def keep(masks, sizes):
        largest = np.zeros(masks.shape, dtype=np.int64)
        for pm in piece_masks:
            largest = np.maximum(largest, _popcounts(masks & pm))
        return largest < -(-3 * sizes // 4)

    found = min_gamma_over_subsets(cls.matrix, keep)
    if found is None:
        return PartitionGammaReport(None, ())
    value, mask = found
    return PartitionGammaReport(value, mask_to_indices(mask))


# -- Algorithms 3 to 5 -----------------------------------------------------

def algorithm3(rows: np.ndarray) -> tuple[list[int], list[int]]:
    """Input set ``I`` and flip record ``J`` for a 1-sensitive row matrix.

    Like the semi-rich greedy, but the covered set grows by the rows that
    answer 1 at ``a_max`` in the re-flipped remainder, so each round covers
    at most half of what is left.
    """
    rows, _, _ = _algorithm3_trace(rows)
    return rows


def _algorithm3_trace(rows: np.ndarray):
    rows = np.asarray(rows, dtype=bool)
    size = rows.shape[0]
    if size < 2:
        raise PartitionError("need at least two concepts")
    if not is_one_sensitive(rows):
        raise PartitionError("input matrix is not 1-sensitive")
    covered = np.zeros(size, dtype=bool)
    used = np.zeros(rows.shape[1], dtype=bool)
    inputs: list[int] = []
    flips: list[int] = []
    while 2 * int(covered.sum()) < size:
        rest_idx = np.flatnonzero(~covered)
        rest = rows[rest_idx]
        flip = flip_columns(rest)
        ones = minority_counts(rest)
        ones = np.where(used, -1, ones)
        a = int(np.argmax(ones))
        if ones[a] <= 0:
            raise PartitionError("no distinguishing input left")
        used[a] = True
        inputs.append(a)
        covered[rest_idx[rest[:, a] ^ flip[a]]] = True
        if flip[a]:
            flips.append(a)
    return (inputs, flips), covered, size


@dataclass
class SplitRecord:
    members: tuple[int, ...]
    zero: tuple[int, ...]
    one: tuple[int, ...]
    zero_ratio: Fraction   # |S°| / |S| measured on the split basis
    one_ratio: Fraction
    basis: tuple[int, ...]  # rows the ratios are measured on


@dataclass
class PartitionBuild:
    partition: Partition
    memo: MemoTables
    splits: list[SplitRecord] = field(default_factory=list)
    outer_iterations: int = 0
    witness: tuple[int, ...] = ()


def _split(matrix: np.ndarray, members: np.ndarray, basis: np.ndarray):
    """Split ``members`` with flips and ``I`` derived from ``basis`` rows."""
    k_mask = flip_columns(matrix[basis])
    (inputs, j_flips), _, _ = _algorithm3_trace(matrix[basis] ^ k_mask)
    view = matrix[members] ^ k_mask
    view[:, j_flips] ^= True
    zero_rows = ~view[:, inputs].any(axis=1)
    return inputs, j_flips, [int(x) for x in np.flatnonzero(k_mask)], members[zero_rows], members[~zero_rows]


def algorithm4_build_partition(cls: ConceptClass, k: int, witness=None) -> PartitionBuild:
    """Breadth-first refinement of ``C`` into exactly ``k`` pieces.

    ``witness`` is the gamma-hat minimizing subset used for the first split;
    by default it comes from the exhaustive oracle.
    """
    size = len(cls)
    if not 2 <= k <= size:
        raise PartitionError(f"k={k} out of range 2..{size}")
    matrix = cls.matrix
    if witness is None:
        witness = gamma_hat(cls).witness_subset
    witness = tuple(sorted(int(i) for i in witness))
    if len(witness) < 2:
        raise PartitionError("witness subset needs two concepts")
    memo = MemoTables(size)
    splits: list[SplitRecord] = []
    queue: deque[tuple[int, ...]] = deque([tuple(range(size))])
    outer = 0
    while len(queue) != k:
        outer += 1
        done: list[tuple[int, ...]] = []
        while queue and len(queue) + len(done) != k:
            piece = queue.popleft()
            if len(piece) < 2:
                done.append(piece)
                continue
            members = np.array(piece)
            basis = np.array(witness) if len(piece) == size else members
            inputs, j_flips, k_flips, zero, one = _split(matrix, members, basis)
            zero_t = tuple(int(i) for i in zero)
            one_t = tuple(int(i) for i in one)
            if not zero_t or not one_t:
                raise PartitionError("degenerate split")
            memo.add(MemoEntry(piece, tuple(inputs), tuple(j_flips), tuple(k_flips), zero_t, one_t))
            basis_set = set(int(i) for i in basis)
            bz = sum(1 for i in zero_t if i in basis_set)
            splits.append(SplitRecord(piece, zero_t, one_t, Fraction(bz, len(basis_set)),
                                      Fraction(len(basis_set) - bz, len(basis_set)),
                                      tuple(sorted(basis_set))))
            done += [zero_t, one_t]
        if not done and not queue:  # pragma: no cover - unreachable for k <= |C|
            raise PartitionError("refinement stalled")
        queue.extend(done)
        if all(len(p) < 2 for p in queue) and len(queue) != k:
            raise PartitionError("refinement stalled")
    return PartitionBuild(Partition(list(queue), size), memo, splits, outer, witness)


@dataclass
class PartitionLearnResult:
    piece: int
    members: tuple[int, ...]
    ledger: QueryLedger
    levels: int
    success: bool | None = None


def algorithm5_learn_partition(partition: Partition, memo: MemoTables,
                               oracle: OracleSpec, target_index: int | None = None) -> PartitionLearnResult:
    """Walk the refinement tree with classical queries on each ``I(S)``."""
    if memo.size != partition.size:
        raise PartitionError("memo/partition mismatch")
    pieces = {p: i for i, p in enumerate(partition.pieces)}
    current = tuple(range(partition.size))
    levels = 0
    ledger = oracle.ledger
    while current not in pieces:
        entry = memo.lookup(current)
        if entry is None:
            raise PartitionError("memo/partition mismatch")
        levels += 1
        ledger.set_phase(f"level{levels}")
        flips = np.zeros(oracle.size, dtype=bool)
        flips[list(entry.k_flips)] ^= True
        flips[list(entry.j_flips)] ^= True
        view = oracle.with_flip(flips)
        zero = True
        for x in entry.inputs:
            if view.query(x):
                zero = False
        current = entry.zero_child if zero else entry.one_child
    ledger.set_phase("main")
    piece = pieces[current]
    success = None if target_index is None else partition.piece_of(target_index) == piece
    return PartitionLearnResult(piece, current, ledger.snapshot(), levels, success)


def partition_query_cap(k: int, gamma: Fraction) -> int:
    """``ceil(log2 k + 1) * floor(1/gamma)``."""
    return (max(0, (k - 1).bit_length()) + 1) * math.floor(1 / Fraction(gamma))


# -- subspaces of F_2^m ----------------------------------------------------

@dataclass(frozen=True)
class SubspaceF2:
    m: int
    basis: tuple[int, ...]  # reduced echelon form, decreasing pivots

    @classmethod
    def from_vectors(cls, vectors, m: int) -> "SubspaceF2":
        return cls(m, tuple(gf2.rref(vectors)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def elements(self) -> list[int]:
        return gf2.span(self.basis)

    def contains(self, v: int) -> bool:
        return gf2.reduce(int(v), self.basis) == 0

    def perp(self) -> "SubspaceF2":
        return SubspaceF2(self.m, tuple(gf2.nullspace_basis(self.basis, self.m)))

    def label(self) -> str:
        return "span{" + ",".join(format(v, f"0{self.m}b") for v in self.basis) + "}"


def enumerate_subspaces(m: int, ell: int) -> list[SubspaceF2]:
    """Every ``ell``-dimensional subspace of ``F_2^m``, via reduced echelon forms."""
    if not 1 <= m <= ENUMERATE_MAX_M:
        raise PartitionError(f"enumeration needs 1 <= m <= {ENUMERATE_MAX_M}")
    if not 0 <= ell <= m:
        raise PartitionError("need 0 <= l <= m")
    out = []
    for pivots in itertools.combinations(range(m - 1, -1, -1), ell):
        pivot_set = set(pivots)
        # free slots per row: non-pivot bits below the row's pivot
        slots = [[b for b in range(p) if b not in pivot_set] for p in pivots]
        for fill in itertools.product(*[range(1 << len(s)) for s in slots]):
            basis = []
            for p, s, bits in zip(pivots, slots, fill):
                v = 1 << p
                for i, b in enumerate(s):
                    if (bits >> i) & 1:
                        v |= 1 << b
                basis.append(v)
            out.append(SubspaceF2(m, tuple(basis)))
    return out


def count_subspaces(m: int, ell: int) -> int:
    """Number of ``ell``-dimensional subspaces of ``F_2^m`` (exact)."""
    if not 1 <= m <= COUNT_MAX_M or not 0 <= ell <= m:
        raise PartitionError("need 1 <= m <= 64 and 0 <= l <= m")
    num = den = 1
    for i in range(ell):
        num *= (1 << m) - (1 << i)
        den *= (1 << ell) - (1 << i)
    return num // den


def count_invariant(m: int, ell: int) -> int:
    """Number of V-invariant functions for one ``ell``-dimensional ``V``.

    Distinct values on each of the ``2^(m-ell)`` cosets: a falling factorial.
    """
    if not 1 <= m <= COUNT_MAX_M or not 0 <= ell <= m:
        raise PartitionError("need 1 <= m <= 64 and 0 <= l <= m")
    cosets = 1 << (m - ell)
    if cosets > INVARIANT_MAX_COSETS:
        raise PartitionError(f"2^(m-l) = {cosets} cosets exceeds the evaluation cap")
    return math.perm(1 << m, cosets)


def subspace_count_bounds(m: int, ell: int) -> tuple[int, int]:
    """``(2^(m l - l^2 - l), 2^(m l - l^2 + l))`` as exact exponents of 2."""
    return m * ell - ell * ell - ell, m * ell - ell * ell + ell


# -- Simon-style learning --------------------------------------------------

@dataclass
class SimonResult:
    subspace: SubspaceF2 | None
    samples: list[int]
    queries: int
    exhausted: bool
    partial_span: tuple[int, ...] = ()
    m: int = 0

    @property
    def f_tilde_queries(self) -> int:
        # each f-query costs m membership queries to the flattened concept
        return self.queries * self.m


def simon_partition_learn(oracle: FunctionOracle, m: int, ell: int, rng: SplitMix64,
                          budget: int | None = None) -> SimonResult:
    """Sample ``V^perp`` until it is spanned, then return ``V`` as its annihilator."""
    if not 0 <= ell < m:
        raise PartitionError("need 0 <= l < m")
    if budget is None:
        budget = 3 * m
    samples: list[int] = []
    echelon: list[int] = []
    while len(samples) < budget and len(echelon) < m - ell:
        y = simon_sample(oracle, rng)
        samples.append(y)
        echelon = gf2.rref(echelon + [y])
    if len(echelon) < m - ell:
        return SimonResult(None, samples, len(samples), True, tuple(echelon), m)
    v = SubspaceF2(m, tuple(gf2.nullspace_basis(echelon, m)))
    return SimonResult(v, samples, len(samples), False, tuple(echelon), m)


@dataclass
class CollisionResult:
    subspace: SubspaceF2 | None
    queries: int


def classical_collision_baseline(oracle: FunctionOracle, m: int, ell: int, rng: SplitMix64,
                                 budget: int | None = None) -> CollisionResult:
    """Query fresh random inputs; every collision ``f(x) = f(y)`` adds ``x ^ y``.

    Stops once the collected differences span ``ell`` dimensions.
    """
    size = 1 << m
    if budget is None:
        budget = size
    budget = min(budget, size)
    first_seen: dict[int, int] = {}
    echelon: list[int] = []
    order = rng.shuffle_prefix(size, budget)
    queries = 0
    if ell == 0:
        for x in order:
            oracle.query(x)
            queries += 1
        return CollisionResult(None, queries)
    for x in order:
        value = oracle.query(x)
        queries += 1
        y = first_seen.setdefault(value, x)
        if y != x:
            echelon = gf2.rref(echelon + [x ^ y])
            if len(echelon) == ell:
                return CollisionResult(SubspaceF2(m, tuple(echelon)), queries)
    return CollisionResult(None, queries)
