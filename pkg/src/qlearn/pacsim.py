"""Numeric checks for quantum PAC sample-complexity formulas.

States here are explicit amplitude vectors.  A single quantum example lives
on ``n + 1`` qubits with basis index ``(x << 1) | b``; ``t`` examples are
laid out slot by slot, slot 0 most significant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .qsim import MAX_QUBITS, euclidean_distance, tv_distance
from .rng import SplitMix64

WEIGHT_TOL = 1e-12
MAX_COPIES = 4
MAX_CODE_BITS = 24


class PacError(ValueError):
    pass


@dataclass(frozen=True)
class Distribution:
    n: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != 1 << self.n:
            raise PacError("weights must cover {0,1}^n")
        if (w < 0).any() or abs(w.sum() - 1) > WEIGHT_TOL:
            raise PacError("weights must be a probability vector")
        object.__setattr__(self, "weights", w)

    @classmethod
    def on_points(cls, n: int, points: dict[int, float]) -> "Distribution":
        w = np.zeros(1 << n)
        for x, p in points.items():
            w[x] += p
        return cls(n, w)


def _width(n: int) -> int:
    return 1 << (n + 1)


def qex_single_state(concept, dist: Distribution) -> np.ndarray:
    """``sum_x sqrt(D(x)) |x, c(x)>`` on ``n + 1`` qubits."""
    table = np.asarray(getattr(concept, "table", concept), dtype=np.int64)
    if len(table) != 1 << dist.n:
        raise PacError("concept and distribution domains differ")
    amps = np.zeros(_width(dist.n), dtype=complex)
    xs = np.arange(1 << dist.n)
    amps[(xs << 1) | table] = np.sqrt(dist.weights)
    return amps


def apply_qex(state: np.ndarray, concept, dist: Distribution, slot: int, copies: int) -> np.ndarray:
    """One QEX call on ``slot``: ``|0^(n+1)> -> qex_single_state``.

    The slot must hold ``|0>`` in every branch, which is how the oracle is
    used; other inputs are outside its specified action.
    """
    w = _width(dist.n)
    shaped = state.reshape((w,) * copies)
    moved = np.moveaxis(shaped, slot, 0)
    if np.abs(moved[1:]).max(initial=0) > 1e-12:
        raise PacError("QEX slot is not in the all-zero state")
    single = qex_single_state(concept, dist)
    out = np.multiply.outer(single, moved[0])
    return np.moveaxis(out, 0, slot).reshape(-1)


def psi_t_state(concept, dist: Distribution, t: int) -> np.ndarray:
    """State after ``t`` QEX calls on a fresh ``t (n + 1)``-qubit register."""
    _check_register(dist.n, t)
    state = np.zeros(_width(dist.n) ** t, dtype=complex)
    state[0] = 1
    for slot in range(t):
        state = apply_qex(state, concept, dist, slot, t)
    return state


def tensor_power(single: np.ndarray, t: int) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for _ in range(t):
        out = np.kron(out, single)
    return out


def _check_register(n: int, t: int) -> None:
    if t < 1 or t > MAX_COPIES:
        raise PacError(f"t must be in 1..{MAX_COPIES}")
    if t * (n + 1) > MAX_QUBITS:
        raise PacError("register too large")


# -- two-point instance ----------------------------------------------------

def two_point_instance(eps: float):
    """``(c0, c1, D)`` on one bit with ``D = (1 - 3 eps, 3 eps)``.

    Both concepts are 0 at ``x0 = 0``; only ``c1`` is 1 at ``x1 = 1``.
    """
    if not 0 < eps < 1 / 3:
        raise PacError("need 0 < eps < 1/3")
    c0 = np.array([0, 0], dtype=bool)
    c1 = np.array([0, 1], dtype=bool)
    return c0, c1, Distribution(1, np.array([1 - 3 * eps, 3 * eps]))


def single_inner_product(c0, c1, dist: Distribution) -> float:
    return float(np.vdot(qex_single_state(c0, dist), qex_single_state(c1, dist)).real)


def t_copy_inner_product(c0, c1, dist: Distribution, copies: int) -> float:
    """``<psi_T(c0)|psi_T(c1)>`` via the product structure."""
    if copies < 1:
        raise PacError("T must be positive")
    return single_inner_product(c0, c1, dist) ** copies


def t_copy_inner_product_explicit(c0, c1, dist: Distribution, copies: int) -> float:
    a = psi_t_state(c0, dist, copies)
    b = psi_t_state(c1, dist, copies)
    return float(np.vdot(a, b).real)


def pac_threshold_search(eps: Fraction, delta: Fraction) -> int:
    """Least integer ``T >= 0`` with ``(1 - 3 eps)^(2T) <= 4 delta`` (exact)."""
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 3):
        raise PacError("need 0 < eps < 1/3")
    base = (1 - 3 * eps) ** 2
    bound = 4 * Fraction(delta)
    t, value = 0, Fraction(1)
    while value > bound:
        value *= base
        t += 1
    return t


def pac_threshold_formula(eps: float, delta: float) -> int:
    """``ceil(log(4 delta) / (2 log(1 - 3 eps)))``, clipped at 0."""
    return max(0, math.ceil(math.log2(4 * delta) / (2 * math.log2(1 - 3 * eps))))


# -- hard PAC instance ------------------------------------------------------

def binary_entropy(x: float) -> float:
    """Base-2 binary entropy with ``H(0) = H(1) = 0``."""
    if not 0 <= x <= 1:
        raise PacError("entropy argument outside [0, 1]")
    if x in (0, 1):
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def greedy_code(d: int, min_dist: int) -> list[int]:
    """Lexicographic greedy ``d``-bit code with pairwise distance ``>= min_dist``."""
    if not 1 <= d <= MAX_CODE_BITS:
        raise PacError(f"d must be in 1..{MAX_CODE_BITS}")
    size = 1 << d
    words = np.arange(size, dtype=np.int64)
    weight = np.zeros(size, dtype=np.int8)
    for b in range(d):
        weight += ((words >> b) & 1).astype(np.int8)
    blocked = np.zeros(size, dtype=bool)
    code = []
    start = 0
    while True:
        free = np.flatnonzero(~blocked[start:])
        if len(free) == 0:
            break
        w = start + int(free[0])
        code.append(w)
        blocked |= weight[words ^ w] < min_dist
        blocked[w] = True
        start = w + 1
    return code


def min_pairwise_distance(code: Sequence[int]) -> int | None:
    best = None
    for i in range(len(code)):
        for j in range(i + 1, len(code)):
            dist = (code[i] ^ code[j]).bit_count()
            best = dist if best is None else min(best, dist)
    return best


def code_bit(word: int, j: int, d: int) -> int:
    """Bit ``j`` (1-based, first is most significant) of a ``d``-bit word."""
    return (word >> (d - j)) & 1


@dataclass
class PacHardInstance:
    d: int
    eps: float
    n: int
    shattered: tuple[int, ...]  # x_0 .. x_d
    dist: Distribution
    code: list[int]
    concepts: list[np.ndarray]

    @property
    def code_size(self) -> int:
        return len(self.code)

    def code_bound_met(self) -> bool:
        """Whether ``|code| >= 2^ceil(d/6)``."""
        return len(self.code) >= 1 << -(-self.d // 6)


def ehkv_instance(d: int, eps: float, n: int | None = None) -> PacHardInstance:
    """``D(x_0) = 1 - 8 eps``, ``D(x_i) = 8 eps / d``; concepts from a greedy code.

    The carrier is the full class over inputs ``0..d`` (every other input is
    fixed to 0), which shatters ``{0, ..., d}``.
    """
    if d < 1:
        raise PacError("d must be positive")
    # the closed endpoint 1/32 is admitted: the construction only needs 8 eps < 1
    if not 0 < eps <= 1 / 32:
        raise PacError("need 0 < eps <= 1/32")
    need = max(1, (d).bit_length())
    if n is None:
        n = need
    if (1 << n) < d + 1:
        raise PacError(f"VC dimension of the carrier over {n} bits is below d+1 = {d + 1}")
    shattered = tuple(range(d + 1))
    weights = {0: 1 - 8 * eps}
    for i in range(1, d + 1):
        weights[i] = 8 * eps / d
    dist = Distribution.on_points(n, weights)
    code = greedy_code(d, -(-d // 4))
    concepts = []
    for word in code:
        table = np.zeros(1 << n, dtype=bool)
        for j in range(1, d + 1):
            table[shattered[j]] = code_bit(word, j, d)
        concepts.append(table)
    return PacHardInstance(d, eps, n, shattered, dist, code, concepts)


def _xi_index(concept, n: int, labels: Sequence[int], shattered: Sequence[int]) -> int:
    table = np.asarray(concept, dtype=np.int64)
    idx = 0
    for i in labels:
        x = shattered[i]
        idx = (idx << (n + 1)) | (x << 1) | int(table[x])
    return idx


@dataclass
class PacState:
    t: int
    amplitudes: np.ndarray
    alpha: float


def alpha_squared(eps: float, t: int) -> float:
    return 1 - (1 - 8 * eps) ** (t - 1) * (1 - 8 * eps + 8 * t * eps)


def phi_t_state(concept, instance: PacHardInstance, t: int) -> PacState:
    """Truncated state: the no-point and single-point terms plus ``alpha |z>``.

    ``|z> = |x_1, c(x_1), x_1, 1 - c(x_1), 0...0>`` is inconsistent with the
    concept, hence orthogonal to every ``xi`` term.
    """
    n, d, eps = instance.n, instance.d, instance.eps
    _check_register(n, t)
    amps = np.zeros(_width(n) ** t, dtype=complex)
    sh = instance.shattered
    amps[_xi_index(concept, n, [0] * t, sh)] = (1 - 8 * eps) ** (t / 2)
    single = (1 - 8 * eps) ** ((t - 1) / 2) * math.sqrt(8 * eps / d)
    for pos in range(t):
        for i in range(1, d + 1):
            labels = [0] * t
            labels[pos] = i
            amps[_xi_index(concept, n, labels, sh)] = single
    a2 = max(0.0, 1 - float(np.sum(np.abs(amps) ** 2)))
    alpha = math.sqrt(a2)
    if t >= 2:
        c1 = int(np.asarray(concept)[sh[1]])
        x1 = sh[1]
        z = ((((x1 << 1) | c1) << (n + 1)) | (x1 << 1) | (1 - c1)) << ((n + 1) * (t - 2))
        if amps[z] != 0:
            raise PacError("z overlaps a xi term")
        amps[z] = alpha
    elif a2 > 1e-12:
        raise PacError("single copy should need no z component")
    return PacState(t, amps, alpha)


def psi_t_instance_state(concept, instance: PacHardInstance, t: int) -> PacState:
    return PacState(t, psi_t_state(concept, instance.dist, t), 0.0)


def psi_phi_inner(concept, instance: PacHardInstance, t: int) -> float:
    phi = phi_t_state(concept, instance, t).amplitudes
    psi = psi_t_state(concept, instance.dist, t)
    return float(np.vdot(psi, phi).real)


def psi_phi_closed_form(eps: float, t: int) -> float:
    return (1 - 8 * eps) ** t * (1 + 8 * t * eps / (1 - 8 * eps))


# -- fidelity bound --------------------------------------------------------

def fidelity_bound_check(state0, state1, projector: Sequence[int], tol: float = 1e-12) -> bool:
    """``|<psi0|psi1>| <= 2 sqrt(delta (1 - delta))`` for the least valid delta."""
    s0 = np.asarray(state0, dtype=complex)
    s1 = np.asarray(state1, dtype=complex)
    idx = np.asarray(sorted(set(int(i) for i in projector)), dtype=np.int64)
    p0 = float(np.sum(np.abs(s0[idx]) ** 2)) if len(idx) else 0.0
    p1 = float(np.sum(np.abs(s1[idx]) ** 2)) if len(idx) else 0.0
    delta = max(1 - p0, p1, 0.0)
    if delta > 0.5:
        raise PacError("no separating δ")
    overlap = abs(np.vdot(s0, s1))
    return bool(overlap <= 2 * math.sqrt(delta * (1 - delta)) + tol)


def random_state(dim: int, rng: SplitMix64) -> np.ndarray:
    gen = np.random.default_rng(rng.next_u64())
    v = gen.normal(size=dim) + 1j * gen.normal(size=dim)
    return v / np.linalg.norm(v)


def random_separated_triple(dim: int, rng: SplitMix64, tries: int = 10000):
    """Random ``(psi0, psi1, projector)`` meeting the precondition for some delta."""
    gen = np.random.default_rng(rng.next_u64())
    for _ in range(tries):
        k = int(gen.integers(1, dim))
        proj = np.sort(gen.choice(dim, size=k, replace=False))
        inside = np.zeros(dim, dtype=bool)
        inside[proj] = True
        # bias psi0 into the projector and psi1 out of it
        a = gen.normal(size=dim) + 1j * gen.normal(size=dim)
        b = gen.normal(size=dim) + 1j * gen.normal(size=dim)
        a[~inside] *= gen.uniform(0, 1)
        b[inside] *= gen.uniform(0, 1)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        p0 = float(np.sum(np.abs(a[inside]) ** 2))
        p1 = float(np.sum(np.abs(b[inside]) ** 2))
        if max(1 - p0, p1) <= 0.5:
            return a, b, [int(i) for i in proj]
    raise PacError("could not sample a separated triple")


def tv_euclid_pair(dim: int, rng: SplitMix64) -> tuple[float, float]:
    s1 = random_state(dim, rng)
    s2 = random_state(dim, rng)
    p = np.abs(s1) ** 2
    q = np.abs(s2) ** 2
    return tv_distance(p, q), euclidean_distance(s1, s2)


# -- bound values surfaced in reports --------------------------------------

def classical_pac_sample_bound(d: int) -> float:
    """Example-count lower bound ``d/100`` (reported, not verified)."""
    return d / 100


def quantum_pac_sample_bound(d: int, eps: float) -> float:
    """Quantum example lower bound ``sqrt(d) / (10000 eps)`` (reported, not verified)."""
    return math.sqrt(d) / (10000 * eps)


# -- report ----------------------------------------------------------------

REPORT_COLUMNS = ("formula_id", "params", "closed_form", "numeric", "abs_err")

DEFAULT_EPS = (Fraction(1, 64), Fraction(1, 32))
DEFAULT_D = (4, 8)
DEFAULT_T = (1, 2, 3, 4)


def _row(formula_id: str, params: str, closed: float, numeric: float) -> dict:
    return {"formula_id": formula_id, "params": params, "closed_form": closed,
            "numeric": numeric, "abs_err": abs(closed - numeric)}


def formula_rows(eps_grid=DEFAULT_EPS, d_grid=DEFAULT_D, t_grid=DEFAULT_T,
                 two_point_eps=(Fraction(1, 64), Fraction(1, 32), Fraction(1, 10)),
                 two_point_t=DEFAULT_T) -> list[dict]:
    """Closed form vs explicit state computation over a parameter grid."""
    rows = []
    for ef in two_point_eps:
        e = float(ef)
        c0, c1, dist = two_point_instance(e)
        for copies in two_point_t:
            rows.append(_row("t_copy_inner", f"eps={ef};T={copies}", (1 - 3 * e) ** copies,
                             t_copy_inner_product_explicit(c0, c1, dist, copies)))
    for d in d_grid:
        for ef in eps_grid:
            e = float(ef)
            inst = ehkv_instance(d, e)
            c = inst.concepts[min(1, len(inst.concepts) - 1)]
            for t in t_grid:
                rows.append(_row("psi_phi_inner", f"d={d};eps={ef};t={t}",
                                 psi_phi_closed_form(e, t), psi_phi_inner(c, inst, t)))
                phi = phi_t_state(c, inst, t)
                rows.append(_row("alpha_sq", f"d={d};eps={ef};t={t}",
                                 alpha_squared(e, t), phi.alpha ** 2))
    return rows


def validate_rows(rows, tol: float = 1e-9) -> bool:
    return all(r["abs_err"] <= tol for r in rows)
