"""Concept classes as explicit truth-table matrices.

A class over ``{0,1}^n`` is a ``|C| x 2^n`` Boolean matrix: row ``i`` is the
truth table of concept ``i`` and column ``x`` holds every concept's answer on
input ``x``.  Input ``x`` is the integer whose binary expansion, most
significant bit first, is the bit string ``x_1 ... x_n``.

All gamma quantities are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

MAX_N = 16
GAMMA_HAT_CAP = 20


class ConceptError(ValueError):
    pass


class ClassTooLarge(ConceptError):
    pass


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class Concept:
    """A single truth table ``c(0), ..., c(2^n - 1)``."""

    __slots__ = ("table", "_key")

    def __init__(self, table):
        table = np.asarray(table, dtype=bool)
        if table.ndim != 1:
            raise ConceptError("truth table must be one-dimensional")
        self.table = _readonly(table.copy())
        self._key = np.packbits(self.table, bitorder="little").tobytes()

    @property
    def n(self) -> int:
        return len(self.table).bit_length() - 1

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def __len__(self) -> int:
        return len(self.table)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Concept):
            return NotImplemented
        return len(self.table) == len(other.table) and self._key == other._key

    def __hash__(self) -> int:
        return hash((len(self.table), self._key))

    def __repr__(self) -> str:
        return f"Concept({encode_table(self.table)!r}, N={len(self.table)})"

    def hex(self) -> str:
        return encode_table(self.table)


class FlipMask:
    """Set of columns whose entries (and oracle answers) are inverted."""

    __slots__ = ("mask",)

    def __init__(self, mask):
        self.mask = _readonly(np.asarray(mask, dtype=bool).copy())

    @classmethod
    def zeros(cls, size: int) -> "FlipMask":
        return cls(np.zeros(size, dtype=bool))

    @classmethod
    def from_inputs(cls, size: int, inputs: Iterable[int]) -> "FlipMask":
        mask = np.zeros(size, dtype=bool)
        mask[list(inputs)] = True
        return cls(mask)

    @property
    def inputs(self) -> list[int]:
        return np.flatnonzero(self.mask).tolist()

    def compose(self, other: "FlipMask") -> "FlipMask":
        return FlipMask(self.mask ^ other.mask)

    def __len__(self) -> int:
        return len(self.mask)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FlipMask):
            return NotImplemented
        return np.array_equal(self.mask, other.mask)

    def __repr__(self) -> str:
        return f"FlipMask({self.inputs})"


class ConceptClass:
    """Explicit concept class; rows are deduplicated in first-seen order."""

    def __init__(self, n: int, rows, labels: Sequence[str] | None = None,
                 analytic_gamma_hat: Fraction | None = None,
                 analytic_witness: Sequence[int] | None = None,
                 name: str | None = None):
        if not 0 <= n <= MAX_N:
            raise ConceptError(f"n={n} outside supported range 0..{MAX_N}")
        size = 1 << n
        matrix = np.asarray(rows, dtype=bool)
        if matrix.ndim == 1:
            matrix = matrix[None, :]
        if matrix.ndim != 2 or matrix.shape[0] == 0:
            raise ConceptError("a concept class needs at least one row")
        if matrix.shape[1] != size:
            raise ConceptError(f"rows must have length 2^n = {size}, got {matrix.shape[1]}")
        packed = np.packbits(matrix, axis=1, bitorder="little")
        seen: dict[bytes, int] = {}
        keep = []
        for i, row in enumerate(packed):
            key = row.tobytes()
            if key not in seen:
                seen[key] = i
                keep.append(i)
        if labels is not None:
            if len(labels) != matrix.shape[0]:
                raise ConceptError("labels must match the number of rows")
            labels = [labels[i] for i in keep]
        self.n = n
        self.matrix = _readonly(matrix[keep])
        self.packed = _readonly(packed[keep])
        self.labels = list(labels) if labels is not None else None
        self.analytic_gamma_hat = analytic_gamma_hat
        self.analytic_witness = tuple(analytic_witness) if analytic_witness is not None else None
        self.name = name
        self._index = {row.tobytes(): i for i, row in enumerate(self.packed)}

    @property
    def N(self) -> int:
        return 1 << self.n

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, i: int) -> Concept:
        return Concept(self.matrix[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<ConceptClass{label} n={self.n} |C|={len(self)}>"

    def index_of(self, concept) -> int:
        """Row index of ``concept``; raises :class:`ConceptError` if absent."""
        table = concept.table if isinstance(concept, Concept) else np.asarray(concept, dtype=bool)
        if len(table) != self.N:
            raise ConceptError("target not in class")
        key = np.packbits(table, bitorder="little").tobytes()
        try:
            return self._index[key]
        except KeyError:
            raise ConceptError("target not in class") from None

    def __contains__(self, concept) -> bool:
        try:
            self.index_of(concept)
        except ConceptError:
            return False
        return True

    def column_ones(self, subset=None) -> np.ndarray:
        rows = self.matrix if subset is None else self.matrix[list(subset)]
        return rows.sum(axis=0, dtype=np.int64)

    def restrict(self, subset) -> "ConceptClass":
        idx = list(subset)
        labels = [self.labels[i] for i in idx] if self.labels else None
        return ConceptClass(self.n, self.matrix[idx], labels=labels)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "concepts": [encode_table(row) for row in self.matrix],
            "labels": list(self.labels) if self.labels else [],
        }

    @classmethod
    def from_json(cls, doc) -> "ConceptClass":
        if isinstance(doc, str):
            doc = json.loads(doc)
        n = int(doc["n"])
        rows = [decode_table(h, n) for h in doc["concepts"]]
        labels = doc.get("labels") or None
        return cls(n, rows, labels=labels)


# -- serialization ---------------------------------------------------------

def encode_table(table) -> str:
    """Hex string; input 0 is the least significant bit of the first byte."""
    return np.packbits(np.asarray(table, dtype=bool), bitorder="little").tobytes().hex()


def decode_table(text: str, n: int) -> np.ndarray:
    size = 1 << n
    raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")
    if len(bits) < size or bits[size:].any():
        raise ConceptError(f"hex table {text!r} does not encode {size} inputs")
    return bits[:size].astype(bool)


def bits_to_int(bits: str) -> int:
    return int(bits, 2)


def int_to_bits(x: int, width: int) -> str:
    return format(x, f"0{width}b") if width else ""


# -- gamma parameters ------------------------------------------------------

@dataclass(frozen=True)
class GammaReport:
    gamma_hat: Fraction
    witness_subset: tuple[int, ...]
    per_input_gamma: dict[int, Fraction] = field(repr=False)
    exhaustive: bool = True


def _subset_rows(cls: ConceptClass, subset) -> np.ndarray:
    idx = sorted(set(int(i) for i in subset))
    return cls.matrix[idx]


def gamma_at(cls: ConceptClass, subset, x: int) -> Fraction:
    """Minority-answer fraction of ``subset`` at input ``x``."""
    rows = _subset_rows(cls, subset)
    if len(rows) == 0:
        raise ConceptError("empty subset")
    ones = int(rows[:, x].sum())
    return Fraction(min(ones, len(rows) - ones), len(rows))


def minority_counts(rows: np.ndarray) -> np.ndarray:
    ones = rows.sum(axis=0, dtype=np.int64)
    return np.minimum(ones, rows.shape[0] - ones)


def gamma_of_subset(cls: ConceptClass, subset) -> tuple[Fraction, int]:
    """Max over inputs of :func:`gamma_at`, with the smallest maximizing input."""
    rows = _subset_rows(cls, subset)
    if len(rows) < 2:
        raise ConceptError("gamma of a subset needs at least two concepts")
    minority = minority_counts(rows)
    x = int(np.argmax(minority))
    return Fraction(int(minority[x]), len(rows)), x


def per_input_gamma(cls: ConceptClass) -> dict[int, Fraction]:
    minority = minority_counts(cls.matrix)
    size = len(cls)
    return {x: Fraction(int(v), size) for x, v in enumerate(minority)}


def _distinct_columns(matrix: np.ndarray) -> np.ndarray:
    """Columns up to complement; gamma only depends on these."""
    cols = matrix.T.copy()
    flip = cols[:, 0].copy()
    cols ^= flip[:, None]
    packed = np.packbits(cols, axis=1, bitorder="little")
    _, first = np.unique(packed, axis=0, return_index=True)
    return matrix[:, np.sort(first)]


def iter_subset_sums(values: np.ndarray, budget: int = 1 << 22):
    """Yield ``(masks, sums)`` for every subset mask of the rows of ``values``.

    ``sums[i]`` is the column sum of the rows selected by ``masks[i]`` (bit
    ``r`` of the mask selects row ``r``).  Masks come out in increasing order.
    """
    values = np.asarray(values, dtype=np.int16)
    m, width = values.shape
    low_bits = m
    while low_bits > 0 and (1 << low_bits) * max(width, 1) > budget:
        low_bits -= 1
    low = np.zeros((1 << low_bits, width), dtype=np.int16)
    for r in range(low_bits):
        half = 1 << r
        low[half:2 * half] = low[:half] + values[r]
    masks_low = np.arange(1 << low_bits, dtype=np.int64)
    high_rows = values[low_bits:]
    for high in range(1 << (m - low_bits)):
        sel = [r for r in range(m - low_bits) if (high >> r) & 1]
        if sel:
            yield (high << low_bits) + masks_low, low + high_rows[sel].sum(axis=0, dtype=np.int16)
        else:
            yield masks_low, low


def _popcounts(masks: np.ndarray) -> np.ndarray:
    counts = np.zeros(masks.shape, dtype=np.int64)
    work = masks.copy()
    while work.any():
        counts += work & 1
        work >>= 1
    return counts


def mask_to_indices(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if (mask >> i) & 1)


def min_gamma_over_subsets(matrix: np.ndarray, keep=None) -> tuple[Fraction, int] | None:
    """Exhaustive ``min gamma^{C'}`` over row subsets with ``|C'| >= 2``.

    ``keep(masks, sizes)`` optionally returns a Boolean filter restricting
    the admissible subsets.  Returns ``(value, mask)`` with the smallest mask
    among minimizers, or ``None`` when no subset is admissible.
    """
    cols = _distinct_columns(np.asarray(matrix, dtype=bool))
    best: tuple[Fraction, int] | None = None
    best_float = np.inf
    for masks, ones in iter_subset_sums(cols):
        sizes = _popcounts(masks)
        ok = sizes >= 2
        if keep is not None:
            ok &= keep(masks, sizes)
        if not ok.any():
            continue
        minority = np.minimum(ones, sizes[:, None] - ones).max(axis=1)
        vals = np.where(ok, minority / np.maximum(sizes, 1), np.inf)
        i = int(np.argmin(vals))
        if vals[i] < best_float:
            best_float = float(vals[i])
            best = (Fraction(int(minority[i]), int(sizes[i])), int(masks[i]))
    return best


def gamma_hat(cls: ConceptClass, cap: int = GAMMA_HAT_CAP) -> GammaReport:
    """``min`` over subsets of size >= 2 of the subset's gamma.

    Brute force up to ``cap`` concepts.  Larger classes fall back to the
    generator-supplied analytic value (``exhaustive=False``) when one exists.
    """
    size = len(cls)
    if size < 2:
        raise ConceptError("gamma_hat needs at least two concepts")
    if size > cap:
        if cls.analytic_gamma_hat is not None:
            return GammaReport(cls.analytic_gamma_hat, tuple(cls.analytic_witness or ()),
                               per_input_gamma(cls), exhaustive=False)
        raise ClassTooLarge(f"class too large for exhaustive γ̂ (|C|={size} > {cap})")
    value, mask = min_gamma_over_subsets(cls.matrix)
    return GammaReport(value, mask_to_indices(mask), per_input_gamma(cls), exhaustive=True)


def gamma_hat_value(cls: ConceptClass, cap: int = GAMMA_HAT_CAP) -> Fraction:
    return gamma_hat(cls, cap).gamma_hat


# -- column flips ----------------------------------------------------------

def one_sensitive_mask(cls: ConceptClass, subset=None) -> FlipMask:
    """Columns where a strict majority of the (sub)class answers 1."""
    rows = cls.matrix if subset is None else _subset_rows(cls, subset)
    return FlipMask(flip_columns(rows))


def flip_columns(rows: np.ndarray) -> np.ndarray:
    ones = rows.sum(axis=0, dtype=np.int64)
    return 2 * ones > rows.shape[0]


def is_one_sensitive(rows: np.ndarray) -> bool:
    return not flip_columns(rows).any()


def apply_flip(cls: ConceptClass, mask: FlipMask) -> ConceptClass:
    if len(mask) != cls.N:
        raise ConceptError("mask length does not match the class domain")
    return ConceptClass(cls.n, cls.matrix ^ mask.mask, labels=cls.labels)


def majority_concept(cls: ConceptClass) -> Concept:
    """c_maj: 0 wherever at least half the concepts answer 0."""
    return Concept(flip_columns(cls.matrix))


# -- semi-rich sets --------------------------------------------------------

def semi_rich_check(cls_or_rows, inputs, gamma_hat_value: Fraction) -> bool:
    """At least half the rows answer 1 on a ``gamma_hat`` fraction of ``inputs``."""
    rows = cls_or_rows.matrix if isinstance(cls_or_rows, ConceptClass) else np.asarray(cls_or_rows, dtype=bool)
    inputs = sorted(set(int(x) for x in inputs))
    if not inputs:
        raise ConceptError("semi-rich check needs a nonempty input set")
    g = Fraction(gamma_hat_value)
    ones = rows[:, inputs].sum(axis=1, dtype=np.int64)
    # ones / |I| >= g  <=>  ones * den >= num * |I|
    rich = ones * g.denominator >= g.numerator * len(inputs)
    size = rows.shape[0]
    return int(rich.sum()) * 2 >= size


def semirich_inputs(rows: np.ndarray) -> list[int]:
    """Greedy semi-rich input set for an explicit row matrix.

    Each round makes the not-yet-covered rows 1-sensitive, picks the unused
    input where the most of them answer 1 (smallest input on ties) and covers
    every row answering 1 there in the unflipped matrix.
    """
    rows = np.asarray(rows, dtype=bool)
    size = rows.shape[0]
    if size < 2:
        raise ConceptError("need at least two concepts")
    covered = np.zeros(size, dtype=bool)
    used = np.zeros(rows.shape[1], dtype=bool)
    chosen: list[int] = []
    while 2 * int(covered.sum()) < size:
        rest = rows[~covered]
        minority = minority_counts(rest)
        minority = np.where(used, -1, minority)
        a = int(np.argmax(minority))
        if minority[a] < 0:
            raise ConceptError("ran out of inputs")
        used[a] = True
        chosen.append(a)
        covered |= rows[:, a]
    return chosen


def build_semirich_set(cls: ConceptClass) -> list[int]:
    return semirich_inputs(cls.matrix)


# -- VC dimension ----------------------------------------------------------

def vc_dimension(cls: ConceptClass) -> int:
    """Size of the largest input set shattered by the class."""
    return len(largest_shattered_set(cls))


def largest_shattered_set(cls: ConceptClass) -> tuple[int, ...]:
    size = len(cls)
    limit = min(size.bit_length() - 1, cls.N)
    cols = cls.matrix.T.astype(np.int64)

    def find(k: int, chosen: list[int], patterns: np.ndarray, start: int):
        if len(chosen) == k:
            return tuple(chosen)
        for x in range(start, cls.N):
            new = patterns * 2 + cols[x]
            if len(np.unique(new)) == 1 << (len(chosen) + 1):
                hit = find(k, chosen + [x], new, x + 1)
                if hit is not None:
                    return hit
        return None

    best: tuple[int, ...] = ()
    for k in range(1, limit + 1):
        hit = find(k, [], np.zeros(size, dtype=np.int64), 0)
        if hit is None:
            break
        best = hit
    return best


def is_shattered(cls: ConceptClass, inputs: Sequence[int]) -> bool:
    inputs = list(inputs)
    if not inputs:
        return True
    patterns = {tuple(row) for row in cls.matrix[:, inputs].astype(np.int8).tolist()}
    return len(patterns) == 1 << len(inputs)


def subsets_of_size(items: Sequence[int], k: int):
    return itertools.combinations(items, k)
