"""Exact state-vector simulation of the query subroutines.

Wire 0 is the most significant bit of a basis index.  Only oracle calls are
charged to a :class:`QueryLedger`; state preparation, Hadamards, diffusion
and measurement are free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gf2
from .rng import SplitMix64

MAX_QUBITS = 24
NORM_TOL = 1e-9


class SimulationError(RuntimeError):
    pass


@dataclass
class PhaseCount:
    label: str
    quantum: int = 0
    classical: int = 0


@dataclass
class QueryLedger:
    """Quantum oracle invocations and classical membership queries, by phase."""

    quantum_queries: int = 0
    classical_queries: int = 0
    phases: list[PhaseCount] = field(default_factory=list)
    _current: str = field(default="main", repr=False)

    def set_phase(self, label: str) -> None:
        self._current = label

    def _bucket(self) -> PhaseCount:
        if not self.phases or self.phases[-1].label != self._current:
            self.phases.append(PhaseCount(self._current))
        return self.phases[-1]

    def charge_quantum(self, count: int = 1) -> None:
        self.quantum_queries += count
        self._bucket().quantum += count

    def charge_classical(self, count: int = 1) -> None:
        self.classical_queries += count
        self._bucket().classical += count

    def snapshot(self) -> "QueryLedger":
        return QueryLedger(self.quantum_queries, self.classical_queries,
                           [PhaseCount(p.label, p.quantum, p.classical) for p in self.phases],
                           self._current)

    def consistent(self) -> bool:
        return (sum(p.quantum for p in self.phases) == self.quantum_queries
                and sum(p.classical for p in self.phases) == self.classical_queries)


class OracleSpec:
    """Membership oracle for a hidden truth table, seen through a column flip.

    ``table`` is the effective answer vector ``concept XOR flip_mask``.  The
    simulator reads it to build the unitary; every use is charged.
    """

    def __init__(self, concept, flip_mask=None, support=None, ledger: QueryLedger | None = None):
        concept = np.asarray(getattr(concept, "table", concept), dtype=bool)
        self.concept = concept
        if flip_mask is None:
            flip = np.zeros(len(concept), dtype=bool)
        else:
            flip = np.asarray(getattr(flip_mask, "mask", flip_mask), dtype=bool)
            if len(flip) != len(concept):
                raise SimulationError("flip mask length mismatch")
        self.flip = flip
        self.table = concept ^ flip
        self.support = None if support is None else sorted(set(int(x) for x in support))
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.transcript: list[tuple[str, int, int]] = []

    @property
    def size(self) -> int:
        return len(self.table)

    def with_flip(self, flip_mask) -> "OracleSpec":
        """Same hidden concept and ledger, different simulated flip."""
        view = OracleSpec(self.concept, flip_mask, self.support, self.ledger)
        view.transcript = self.transcript
        return view

    def query(self, x: int) -> int:
        """Classical membership query (flip applied)."""
        self.ledger.charge_classical()
        answer = int(self.table[x])
        self.transcript.append((self.ledger._current, int(x), answer))
        return answer

    def charge_superposition_query(self) -> None:
        # transcript entry with no classical input/answer
        self.ledger.charge_quantum()
        self.transcript.append((self.ledger._current, None, None))

    def marked(self, inputs: Sequence[int] | None = None) -> list[int]:
        """Uncharged inspection, for tests and verification only."""
        idx = np.flatnonzero(self.table)
        if inputs is not None:
            keep = set(inputs)
            idx = [x for x in idx if x in keep]
        return [int(x) for x in idx]


class StateVector:
    """Dense complex amplitudes over ``num_qubits`` wires."""

    def __init__(self, num_qubits: int, amplitudes=None):
        if not 0 <= num_qubits <= MAX_QUBITS:
            raise SimulationError(f"register of {num_qubits} qubits exceeds the {MAX_QUBITS}-qubit cap")
        self.num_qubits = num_qubits
        if amplitudes is None:
            amplitudes = np.zeros(1 << num_qubits, dtype=complex)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.asarray(amplitudes, dtype=complex)
            if amplitudes.shape != (1 << num_qubits,):
                raise SimulationError("amplitude vector has the wrong length")
        self.amplitudes = amplitudes

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        state = cls(num_qubits)
        state.amplitudes[0] = 0
        state.amplitudes[index] = 1
        return state

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_norm(self, tol: float = NORM_TOL) -> None:
        if abs(self.norm() - 1.0) > tol:
            raise SimulationError(f"state norm drifted to {self.norm()!r}")

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits) if self.num_qubits else self.amplitudes

    def apply_hadamard(self, wires: Sequence[int]) -> "StateVector":
        """Hadamard on each listed wire, one axis at a time."""
        t = self._tensor()
        s = 1 / math.sqrt(2)
        for w in wires:
            t = np.moveaxis(t, w, 0)
            a, b = t[0].copy(), t[1].copy()
            t[0] = (a + b) * s
            t[1] = (a - b) * s
            t = np.moveaxis(t, 0, w)
        self.amplitudes = np.ascontiguousarray(t).reshape(-1)
        return self

    def wire_values(self, wires: Sequence[int]) -> np.ndarray:
        """Integer value of ``wires`` (first listed = most significant) per basis index."""
        idx = np.arange(1 << self.num_qubits, dtype=np.int64)
        out = np.zeros_like(idx)
        for w in wires:
            out = (out << 1) | ((idx >> (self.num_qubits - 1 - w)) & 1)
        return out


def _check_wires(state: StateVector, wires: Sequence[int]) -> None:
    if len(set(wires)) != len(wires):
        raise SimulationError("wire clash")
    if any(not 0 <= w < state.num_qubits for w in wires):
        raise SimulationError("wire outside the register")


def apply_qmq(state: StateVector, oracle: OracleSpec, input_wires: Sequence[int], ancilla_wire: int) -> StateVector:
    """``|x, b> -> |x, b XOR c'(x)>`` with ``c'`` the flipped concept; one quantum query."""
    _check_wires(state, list(input_wires) + [ancilla_wire])
    if 1 << len(input_wires) != oracle.size:
        raise SimulationError("input wires do not match the oracle domain")
    x = state.wire_values(input_wires)
    flips = oracle.table[x].astype(np.int64) << (state.num_qubits - 1 - ancilla_wire)
    idx = np.arange(1 << state.num_qubits, dtype=np.int64)
    state.amplitudes = state.amplitudes[idx ^ flips]
    oracle.charge_superposition_query()
    return state


def apply_phase_oracle(state: StateVector, oracle: OracleSpec, input_wires: Sequence[int] | None = None) -> StateVector:
    """Multiply the amplitude of ``|x>`` by ``(-1)^{c'(x)}``; one quantum query."""
    if input_wires is None:
        input_wires = list(range(state.num_qubits))
    _check_wires(state, input_wires)
    if 1 << len(input_wires) != oracle.size:
        raise SimulationError("input wires do not match the oracle domain")
    if len(input_wires) == state.num_qubits and list(input_wires) == sorted(input_wires):
        signs = oracle.table
    else:
        signs = oracle.table[state.wire_values(input_wires)]
    state.amplitudes = np.where(signs, -state.amplitudes, state.amplitudes)
    oracle.charge_superposition_query()
    return state


def prepare_uniform_subset(inputs: Sequence[int], num_qubits: int) -> StateVector:
    inputs = sorted(set(int(x) for x in inputs))
    if not inputs:
        raise SimulationError("empty input set")
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[inputs] = 1 / math.sqrt(len(inputs))
    return StateVector(num_qubits, amps)


def _leak(state: StateVector, inputs: Sequence[int]) -> float:
    outside = np.ones(len(state.amplitudes), dtype=bool)
    outside[list(inputs)] = False
    return float(np.sqrt(np.sum(np.abs(state.amplitudes[outside]) ** 2)))


def grover_iterate(state: StateVector, oracle: OracleSpec, inputs: Sequence[int]) -> StateVector:
    """Phase oracle, then reflection about the uniform state on ``inputs``."""
    inputs = list(inputs)
    if _leak(state, inputs) > NORM_TOL:
        raise SimulationError("state has support outside the search set")
    apply_phase_oracle(state, oracle)
    sub = state.amplitudes[inputs]
    mean = sub.mean()
    state.amplitudes[inputs] = 2 * mean - sub
    return state


def measure_all(state: StateVector, rng: SplitMix64) -> int:
    """Sample a basis index; the state is left untouched."""
    return rng.sample_index(np.cumsum(measurement_distribution(state)))


def measurement_distribution(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def tv_distance(p, q) -> float:
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must have equal length")
    return float(np.abs(p - q).sum())


def euclidean_distance(s1, s2) -> float:
    a = np.asarray(getattr(s1, "amplitudes", s1), dtype=complex)
    b = np.asarray(getattr(s2, "amplitudes", s2), dtype=complex)
    if a.shape != b.shape:
        raise ValueError("states must have equal length")
    return float(np.linalg.norm(a - b))


# -- amplitude amplification -----------------------------------------------

BBHT_GROWTH = 6 / 5


def bbht_budget(set_size: int) -> int:
    """``ceil(4.5 * sqrt(|I|))`` computed exactly: least q with 4q^2 >= 81|I|."""
    q = math.isqrt(81 * set_size) // 2
    while 4 * q * q < 81 * set_size:
        q += 1
    return q


def bbht_subset_search(oracle: OracleSpec, inputs: Sequence[int], rng: SplitMix64,
                       budget: int | None = None) -> int | None:
    """Grover search over ``inputs`` with an unknown number of marked elements.

    Rounds draw an iteration count uniformly from ``[0, M)``, run that many
    Grover iterations from the uniform state on ``inputs``, measure, and
    check the outcome with one classical query; ``M`` grows by 6/5 up to
    ``sqrt(|I|)``.  Grover iterations and checks share one hard budget.
    Returns the first verified hit, else the last measured candidate.
    """
    inputs = sorted(set(int(x) for x in inputs))
    if not inputs:
        raise SimulationError("empty input set")
    if budget is None:
        budget = bbht_budget(len(inputs))
    num_qubits = max(oracle.size.bit_length() - 1, 0)
    used = 0
    cap = math.sqrt(len(inputs))
    m = 1.0
    last = None
    while used < budget:
        j = rng.randbelow(max(1, math.ceil(m)))
        j = min(j, budget - used - 1)
        state = prepare_uniform_subset(inputs, num_qubits)
        for _ in range(j):
            grover_iterate(state, oracle, inputs)
        used += j
        last = measure_all(state, rng)
        used += 1
        if oracle.query(last):
            return last
        m = min(m * BBHT_GROWTH, cap) if cap > 1 else 1.0
    return last


# -- Bernstein-Vazirani and Simon ------------------------------------------

def bernstein_vazirani(oracle: OracleSpec, rng: SplitMix64 | None = None) -> int:
    """Recover ``a`` from ``x -> a.x mod 2`` with one QMQ call.

    Register: ``n`` input wires plus one ancilla prepared in ``|->``.
    """
    n = oracle.size.bit_length() - 1
    state = StateVector(n + 1)
    state.amplitudes[0] = 0
    state.amplitudes[1] = 1  # ancilla |1>
    state.apply_hadamard(range(n + 1))
    apply_qmq(state, oracle, list(range(n)), n)
    state.apply_hadamard(range(n + 1))
    state.check_norm()
    probs = measurement_distribution(state)
    if rng is None:
        outcome = int(np.argmax(probs))
    else:
        outcome = measure_all(state, rng)
    return outcome >> 1


class FunctionOracle:
    """Oracle for ``f: {0,1}^m -> {0,1}^m`` acting as ``|x, z> -> |x, z XOR f(x)>``."""

    def __init__(self, f, ledger: QueryLedger | None = None):
        self.f = f
        self.m = f.m
        self.table = np.asarray(f.table, dtype=np.int64)
        self.ledger = ledger if ledger is not None else QueryLedger()

    def query(self, x: int) -> int:
        self.ledger.charge_classical()
        return int(self.table[x])

    def apply(self, state: StateVector) -> StateVector:
        m = self.m
        idx = np.arange(1 << (2 * m), dtype=np.int64)
        x = idx >> m
        state.amplitudes = state.amplitudes[idx ^ self.table[x]]
        self.ledger.charge_quantum()
        return state


def simon_state(oracle: FunctionOracle) -> StateVector:
    """State after H on the first register, one f-query and H again."""
    m = oracle.m
    if 2 * m > MAX_QUBITS:
        raise SimulationError("Simon register exceeds the qubit cap")
    state = StateVector(2 * m)
    state.apply_hadamard(range(m))
    oracle.apply(state)
    state.apply_hadamard(range(m))
    return state


def simon_sample(oracle: FunctionOracle, rng: SplitMix64) -> int:
    """One run of Simon's circuit; returns the first-register measurement."""
    state = simon_state(oracle)
    return measure_all(state, rng) >> oracle.m


def simon_support(oracle: FunctionOracle, tol: float = 1e-12) -> list[int]:
    """First-register values with nonzero probability (charges one query)."""
    state = simon_state(oracle)
    m = oracle.m
    probs = measurement_distribution(state).reshape(1 << m, 1 << m).sum(axis=1)
    return [int(y) for y in np.flatnonzero(probs > tol)]


# re-exported F_2 helpers
gf2_rank = gf2.rank


def gf2_nullspace_basis(vectors, m: int) -> list[int]:
    return gf2.nullspace_basis(vectors, m)


def gf2_span_contains(basis, v: int) -> bool:
    return gf2.span_contains(basis, v)
