"""Exact learners with query accounting.

* :func:`quantum_exact_learn` - Grover-search learner over semi-rich input sets.
* :func:`classical_halving_learn` - greedy max-gamma elimination.
* :func:`nested_bv_learn` - one Bernstein-Vazirani run per parity block.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .concepts import (Concept, ConceptClass, ConceptError, flip_columns,
                       gamma_hat_value, semirich_inputs)
from .qsim import (OracleSpec, QueryLedger, bbht_budget, bbht_subset_search,
                   bernstein_vazirani)
from .rng import SplitMix64, derive_seed
from .zoo import (BlockLayout, ClassSpec, PrefixedParityClass, SpecError,
                  nested_bv_layout)


@dataclass
class LearnResult:
    hypothesis: Concept
    success: bool
    ledger: QueryLedger
    transcript: list = field(default_factory=list)
    outer_iterations: int = 0
    note: str = ""


@dataclass
class TrialReport:
    trials: int
    successes: int
    success_rate: float
    quantum_quantiles: tuple
    classical_quantiles: tuple
    seed: int
    max_outer_iterations: int = 0
    results: list = field(default_factory=list, repr=False)


# -- bounds ----------------------------------------------------------------

def ceil_log2(x: int) -> int:
    return max(0, (int(x) - 1).bit_length())


def inner_repetitions(class_size: int) -> int:
    """``ceil(log2(3 log2 |C|))``, at least 1.

    ``2^r >= 3 log2|C|`` is tested exactly as ``2^(2^r) >= |C|^3``.
    """
    target = class_size ** 3
    r = 0
    while (1 << (1 << r)) < target:
        r += 1
    return max(1, r)


def quantum_query_cap(class_size: int, gamma: Fraction) -> int:
    """Deterministic cap on the quantum learner's superposition queries."""
    largest_set = math.floor(1 / Fraction(gamma))
    return ceil_log2(class_size) * inner_repetitions(class_size) * bbht_budget(largest_set)


def halving_query_bound(class_size: int, gamma: Fraction) -> int:
    """``ceil(log2|C| / -log2(1 - gamma))``: least q with ``|C| (1-gamma)^q <= 1``."""
    keep = 1 - Fraction(gamma)
    if class_size <= 1:
        return 0
    q, left = 0, Fraction(class_size)
    while left > 1:
        left *= keep
        q += 1
    return q


# -- learners --------------------------------------------------------------

def _target_index(cls: ConceptClass, oracle: OracleSpec) -> int:
    return cls.index_of(oracle.concept)


def quantum_exact_learn(cls: ConceptClass, oracle: OracleSpec, rng: SplitMix64,
                        check_target: bool = True) -> LearnResult:
    """Learn the hidden concept with amplitude amplification.

    Each outer round flips the surviving concepts to 1-sensitivity, builds a
    semi-rich input set ``I`` for them and runs up to
    :func:`inner_repetitions` BBHT searches over ``I`` against the flipped
    oracle.  A confirmed hit ``a`` keeps the survivors answering 1 at ``a``;
    otherwise the survivors that are all-zero on ``I`` are kept.
    """
    size = len(cls)
    if size < 2:
        raise ConceptError("need at least two concepts")
    if check_target:
        _target_index(cls, oracle)
    reps = inner_repetitions(size)
    ledger = oracle.ledger
    survivors = np.arange(size)
    outer = 0
    note = ""
    while len(survivors) > 1:
        outer += 1
        ledger.set_phase(f"outer{outer}")
        rows = cls.matrix[survivors]
        flips = flip_columns(rows)
        view = rows ^ flips
        inputs = semirich_inputs(view)
        flipped = oracle.with_flip(flips)
        found = None
        for _ in range(reps):
            a = bbht_subset_search(flipped, inputs, rng)
            if a is not None and flipped.query(a) == 1:
                found = a
                break
        if found is not None:
            nxt = survivors[view[:, found]]
        else:
            nxt = survivors[~view[:, inputs].any(axis=1)]
        if len(nxt) == 0:
            # only reachable after a missed search removed the target
            note = "version space emptied after a missed search"
            survivors = survivors[:1]
            break
        survivors = nxt
    ledger.set_phase("main")
    guess = int(survivors[0])
    success = bool(np.array_equal(cls.matrix[guess], oracle.concept))
    return LearnResult(cls[guess], success, ledger.snapshot(), list(oracle.transcript), outer, note)


def classical_halving_learn(cls: ConceptClass, oracle: OracleSpec, rng=None,
                            check_target: bool = True) -> LearnResult:
    """Query the input with the largest minority fraction among survivors."""
    if check_target:
        _target_index(cls, oracle)
    ledger = oracle.ledger
    survivors = np.arange(len(cls))
    rounds = 0
    ledger.set_phase("halving")
    while len(survivors) > 1:
        rounds += 1
        rows = cls.matrix[survivors]
        ones = rows.sum(axis=0, dtype=np.int64)
        minority = np.minimum(ones, len(survivors) - ones)
        a = int(np.argmax(minority))
        answer = oracle.query(a)
        survivors = survivors[rows[:, a] == bool(answer)]
        if len(survivors) == 0:
            raise ConceptError("oracle inconsistent with class")
    ledger.set_phase("main")
    guess = int(survivors[0])
    success = bool(np.array_equal(cls.matrix[guess], oracle.concept))
    return LearnResult(cls[guess], success, ledger.snapshot(), list(oracle.transcript), rounds)


def block_structure(spec) -> tuple[int, list[Callable[[int], int]], int]:
    """``(n, embeddings, block_width)`` for the block-parity learners."""
    if isinstance(spec, str):
        spec = ClassSpec.parse(spec)
    if isinstance(spec, PrefixedParityClass):
        w = spec.suffix_bits
        return spec.n, [(lambda y, i=i: (i << w) | y) for i in range(spec.prefixes)], w
    if isinstance(spec, ClassSpec):
        if spec.kind == "parity":
            layout = nested_bv_layout(spec.params["n"], 1)
        elif spec.kind == "nested_bv":
            layout = nested_bv_layout(spec.params["n"], spec.params["d"])
        elif spec.kind == "prefixed_parity":
            return block_structure(PrefixedParityClass(spec.params["n"], spec.params["k"]))
        else:
            raise SpecError(f"no block-parity learner for class kind {spec.kind!r}")
        spec = layout
    if isinstance(spec, BlockLayout):
        return spec.n, [(lambda y, i=i: spec.embed(y, i)) for i in range(spec.blocks)], spec.width
    raise SpecError("spec mismatch: expected parity, nested_bv or prefixed_parity")


def nested_bv_learn(spec, oracle: OracleSpec, rng: SplitMix64 | None = None) -> LearnResult:
    """One Bernstein-Vazirani run per block on the induced parity sub-oracle.

    For nested BV classes the other blocks are held at zero, so the OR
    collapses to a single parity; for prefixed parities the prefix is fixed.
    The hypothesis is rebuilt from the recovered block strings and checked
    against the hidden concept.
    """
    n, embeds, width = block_structure(spec)
    if oracle.size != 1 << n:
        raise SpecError("spec mismatch: oracle domain does not match the class")
    ledger = oracle.ledger
    ys = np.arange(1 << width)
    recovered = []
    for i, embed in enumerate(embeds):
        ledger.set_phase(f"block{i}")
        inputs = np.array([embed(int(y)) for y in ys])
        sub = OracleSpec(oracle.table[inputs], ledger=ledger)
        sub.transcript = oracle.transcript
        recovered.append(bernstein_vazirani(sub, rng))
    ledger.set_phase("main")
    xs = np.arange(1 << n)
    table = np.zeros(1 << n, dtype=bool)
    if isinstance(spec, PrefixedParityClass) or (isinstance(spec, ClassSpec) and spec.kind == "prefixed_parity") \
            or (isinstance(spec, str) and spec.startswith("prefixed")):
        prefix = xs >> width
        suffix = xs & ((1 << width) - 1)
        a = np.array(recovered)
        table = _parity(a[prefix] & suffix)
    else:
        for i, a_i in enumerate(recovered):
            table |= _parity(xs & embeds[i](a_i))
    success = bool(np.array_equal(table, oracle.concept))
    return LearnResult(Concept(table), success, ledger.snapshot(), list(oracle.transcript), len(embeds))


def _parity(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64).copy()
    out = np.zeros(v.shape, dtype=np.int64)
    while v.any():
        out ^= v & 1
        v >>= 1
    return out.astype(bool)


# -- trials ----------------------------------------------------------------

def class_table(cls, index: int) -> np.ndarray:
    if isinstance(cls, ConceptClass):
        return cls.matrix[index]
    return cls.table(index)


def quantiles(values) -> tuple:
    if not values:
        return (0, 0, 0)
    med = statistics.median(values)
    if float(med).is_integer():
        med = int(med)
    return (min(values), med, max(values))


def run_trials(learner: Callable, cls, seed: int, trials: int, targets=None) -> TrialReport:
    """Independent seeded trials.

    Targets cycle through the whole class when it has at most ``trials``
    concepts, otherwise they are drawn uniformly.  Trial ``t`` uses the
    stream ``derive_seed(seed, t)``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    size = len(cls)
    master = SplitMix64(seed)
    if targets is None:
        if size <= trials:
            targets = [t % size for t in range(trials)]
        else:
            targets = [master.randbelow(size) for _ in range(trials)]
    results = []
    for t, target in enumerate(targets):
        rng = SplitMix64(derive_seed(seed, t))
        oracle = OracleSpec(class_table(cls, target))
        results.append(learner(cls, oracle, rng))
    successes = sum(r.success for r in results)
    return TrialReport(
        trials=len(results),
        successes=successes,
        success_rate=successes / len(results),
        quantum_quantiles=quantiles([r.ledger.quantum_queries for r in results]),
        classical_quantiles=quantiles([r.ledger.classical_queries for r in results]),
        seed=seed,
        max_outer_iterations=max(r.outer_iterations for r in results),
        results=results,
    )


def get_learner(name: str, spec=None) -> Callable:
    if name == "quantum":
        return quantum_exact_learn
    if name == "halving":
        return classical_halving_learn
    if name == "nestedbv":
        if spec is None:
            raise SpecError("the nestedbv learner needs the class spec")
        return lambda cls, oracle, rng: nested_bv_learn(spec, oracle, rng)
    raise SpecError(f"unknown learner {name!r}")


def measured_gamma(cls) -> Fraction | None:
    try:
        return gamma_hat_value(cls)
    except ConceptError:
        return None
