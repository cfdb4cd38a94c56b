"""Experiment runner: configs in, deterministic report rows out."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import gf2
from .concepts import (ConceptClass, ConceptError, build_semirich_set, gamma_hat,
                       gamma_of_subset, semi_rich_check, vc_dimension)
from .learners import (ceil_log2, classical_halving_learn, get_learner,
                       halving_query_bound, quantum_query_cap, run_trials, quantiles)
from .pacsim import REPORT_COLUMNS as PAC_COLUMNS
from .pacsim import (classical_pac_sample_bound, formula_rows, quantum_pac_sample_bound,
                     validate_rows)
from .partitions import (PartitionError, SubspaceF2, algorithm4_build_partition,
                         algorithm5_learn_partition, classical_collision_baseline,
                         gamma_hat_partition, partition_query_cap, simon_partition_learn)
from .qsim import FunctionOracle, OracleSpec
from .rng import SplitMix64, derive_seed
from .zoo import ClassSpec, PrefixedParityClass, SpecError, v_invariant_function

KINDS = ("gamma", "learn", "partition", "simon-gap", "pac-formulas", "bench")
LEARNER_NAMES = ("quantum", "halving", "nestedbv")
SUCCESS_THRESHOLD = 0.60
SEPARATION_FACTOR = 4
DEFAULT_SEED = 0
DEFAULT_TRIALS = {"learn": 300, "simon-gap": 100, "partition": 0}

ROW_COLUMNS = ("experiment", "class_spec", "class_size", "n", "gamma_hat", "learner", "trials",
               "success_rate", "q_min", "q_med", "q_max", "c_min", "c_med", "c_max",
               "bounds", "nq2_loglog", "q1_ratio", "flags", "passed")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    class_spec: str | None = None
    learner: str = "quantum"
    k: int | None = None
    m: int | None = None
    l: int | None = None
    trials: int | None = None
    seed: int = DEFAULT_SEED
    out: str | None = None
    format: str = "csv"
    figures: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.kind in ("gamma", "learn", "partition") and not self.class_spec:
            raise ConfigError(f"{self.kind} needs --class")
        if self.kind == "learn" and self.learner not in LEARNER_NAMES:
            raise ConfigError(f"unknown learner {self.learner!r}")
        if self.kind == "partition" and self.k is None:
            raise ConfigError("partition needs --k")
        if self.kind == "simon-gap" and (self.m is None or self.l is None):
            raise ConfigError("simon-gap needs --m and --l")
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if not 0 <= int(self.seed) < 1 << 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return self

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = {k.replace("-", "_"): v for k, v in doc.items()}
        if "class" in doc:
            doc["class_spec"] = doc.pop("class")
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**doc)


@dataclass
class ReportRow:
    experiment: str
    class_spec: str = ""
    class_size: int | None = None
    n: int | None = None
    gamma_hat: Fraction | None = None
    learner: str = ""
    trials: int | None = None
    success_rate: float | None = None
    quantum: tuple = ()
    classical: tuple = ()
    bounds: dict = field(default_factory=dict)
    nq2_loglog: float | None = None
    q1_ratio: float | None = None
    flags: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def cells(self) -> dict:
        q = tuple(self.quantum) or (None, None, None)
        c = tuple(self.classical) or (None, None, None)
        return {
            "experiment": self.experiment,
            "class_spec": self.class_spec,
            "class_size": self.class_size,
            "n": self.n,
            "gamma_hat": self.gamma_hat,
            "learner": self.learner,
            "trials": self.trials,
            "success_rate": self.success_rate,
            "q_min": q[0], "q_med": q[1], "q_max": q[2],
            "c_min": c[0], "c_med": c[1], "c_max": c[2],
            "bounds": ";".join(f"{k}={_fmt(v)}" for k, v in self.bounds.items()),
            "nq2_loglog": self.nq2_loglog,
            "q1_ratio": self.q1_ratio,
            "flags": ";".join(f"{k}={'pass' if v else 'FAIL'}" for k, v in self.flags.items()),
            "passed": self.passed,
        }


@dataclass
class Report:
    kind: str
    columns: tuple
    rows: list  # dicts keyed by columns
    passed: bool
    records: list = field(default_factory=list)  # ReportRow objects, when applicable

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(row[c]) for c in self.columns])
        return buf.getvalue()

    def to_jsonl(self) -> str:
        lines = [json.dumps({c: _jsonable(row[c]) for c in self.columns}, sort_keys=False)
                 for row in self.rows]
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_jsonl()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}" if value.denominator != 1 else str(value.numerator)
    if isinstance(value, float):
        if value.is_integer() and abs(value) < 1e15:
            return str(int(value))
        return f"{value:.6g}" if abs(value) >= 1e-4 or value == 0 else f"{value:.3e}"
    return str(value)


def _jsonable(value):
    if isinstance(value, Fraction):
        return _fmt(value)
    return value


def _from_rows(kind: str, records: list[ReportRow]) -> Report:
    return Report(kind, ROW_COLUMNS, [r.cells() for r in records],
                  all(r.passed for r in records), records)


# -- class helpers ---------------------------------------------------------

def _parse(spec_text: str) -> ClassSpec:
    return ClassSpec.parse(spec_text)


def _explicit(spec: ClassSpec) -> ConceptClass:
    return spec.build_explicit()


def _gamma_or_none(cls: ConceptClass) -> Fraction | None:
    try:
        return gamma_hat(cls).gamma_hat
    except ConceptError:
        return None


# -- experiments -----------------------------------------------------------

def gamma_row(spec_text: str) -> ReportRow:
    spec = _parse(spec_text)
    cls = _explicit(spec)
    report = gamma_hat(cls)
    g = report.gamma_hat
    inputs = build_semirich_set(cls)
    rescored, _ = gamma_of_subset(cls, report.witness_subset)
    bounds = {"exhaustive": report.exhaustive, "witness_size": len(report.witness_subset),
              "I": len(inputs), "floor_inv_gamma": math.floor(1 / g), "vc": vc_dimension(cls)}
    flags = {
        "gamma_in_range": Fraction(1, cls.N + 1) <= g <= Fraction(1, 2),
        "witness_rescored": rescored == g,
        "semirich_size": len(inputs) <= math.floor(1 / g),
        "semirich_condition": semi_rich_check(cls, inputs, g),
    }
    return ReportRow("gamma", spec.text, len(cls), cls.n, g, bounds=bounds, flags=flags)


def _q1_ratio(r_measured, q_measured, n) -> float | None:
    if r_measured is None or q_measured is None:
        return None
    denom = n * q_measured + q_measured ** 2
    return r_measured / denom if denom else None


def _nq2_loglog(n: int, q_measured, size: int) -> float | None:
    if q_measured is None or size < 4:
        return None
    return n * q_measured ** 2 * math.log2(math.log2(size))


def learn_row(spec_text: str, learner: str, trials: int, seed: int) -> ReportRow:
    spec = _parse(spec_text)
    built = spec.build()
    cls = built.materialize() if isinstance(built, PrefixedParityClass) else built
    size = len(cls)
    g = _gamma_or_none(cls)
    fn = get_learner(learner, spec)
    report = run_trials(fn, cls, seed, trials)
    bounds: dict = {}
    flags: dict = {}
    if learner == "quantum":
        flags["success_rate"] = report.success_rate >= SUCCESS_THRESHOLD
        bounds["outer_cap"] = ceil_log2(size)
        flags["outer_iterations"] = report.max_outer_iterations <= ceil_log2(size)
        if g is not None:
            cap = quantum_query_cap(size, g)
            bounds["quantum_cap"] = cap
            flags["quantum_cap"] = report.quantum_quantiles[2] <= cap
    elif learner == "halving":
        flags["exact"] = report.success_rate == 1.0
        if g is not None:
            bound = halving_query_bound(size, g)
            bounds["halving_bound"] = bound
            flags["halving_bound"] = report.classical_quantiles[2] <= bound
        if spec.kind == "prefixed_parity":
            need = (1 << spec.params["k"]) * (spec.params["n"] - spec.params["k"])
            bounds["info_bound"] = need
            flags["info_bound"] = report.classical_quantiles[0] >= need
    else:
        flags["exact"] = report.success_rate == 1.0
        blocks = report.max_outer_iterations
        bounds["blocks"] = blocks
        flags["one_query_per_block"] = report.quantum_quantiles == (blocks, blocks, blocks)
    row = ReportRow("learn", spec.text, size, cls.n, g, learner, report.trials, report.success_rate,
                    report.quantum_quantiles, report.classical_quantiles, bounds, flags=flags)
    return row


def compare_row(spec_text: str, quantum_learner: str, trials: int, seed: int) -> ReportRow:
    """Measured R and Q side by side with the derived comparison columns.

    R is the worst-case halving count over targets; Q is the worst-case total
    (quantum plus classical) count of the chosen quantum learner.
    """
    spec = _parse(spec_text)
    built = spec.build()
    cls = built.materialize() if isinstance(built, PrefixedParityClass) else built
    size = len(cls)
    halving = run_trials(classical_halving_learn, cls, seed, max(trials, size) if size <= 4096 else trials)
    quantum = run_trials(get_learner(quantum_learner, spec), cls, seed, trials)
    r = halving.classical_quantiles[2]
    q = max(x.ledger.quantum_queries + x.ledger.classical_queries for x in quantum.results)
    row = ReportRow("compare", spec.text, size, cls.n, _gamma_or_none(cls), f"halving|{quantum_learner}",
                    quantum.trials, quantum.success_rate, quantum.quantum_quantiles,
                    halving.classical_quantiles,
                    {"R_measured": r, "Q_measured": q},
                    _nq2_loglog(cls.n, q, size), _q1_ratio(r, q, cls.n))
    return row


def partition_rows(spec_text: str, k_values, seed: int = DEFAULT_SEED) -> list[ReportRow]:
    spec = _parse(spec_text)
    cls = _explicit(spec)
    size = len(cls)
    g = gamma_hat(cls).gamma_hat
    rows = []
    for k in k_values:
        build = algorithm4_build_partition(cls, k)
        part = build.partition
        cap = partition_query_cap(k, g)
        counts, correct = [], 0
        for t in range(size):
            res = algorithm5_learn_partition(part, build.memo, OracleSpec(cls.matrix[t]), t)
            counts.append(res.ledger.classical_queries)
            correct += bool(res.success)
        gp = gamma_hat_partition(cls, part).gamma_hat_p
        ratios = all(Fraction(1, 4) < s.zero_ratio <= Fraction(1, 2) <= s.one_ratio < 1
                     for s in build.splits)
        shrink_cap = 1 + math.ceil(math.log(size) / math.log(4 / 3))
        bounds = {"k": k, "query_cap": cap, "outer_iterations": build.outer_iterations,
                  "log2k_plus_1": ceil_log2(k) + 1, "counting_floor": round(math.log2(k) / math.log2(cls.N + 1), 6),
                  "gamma_hat_p": gp}
        flags = {
            "k_pieces": len(part) == k,
            "split_ratios": ratios,
            "alg5_exact": correct == size,
            "query_cap": max(counts) <= cap,
            "counting_floor": max(counts) >= math.log2(k) / math.log2(cls.N + 1),
            "gamma_p_equals_gamma": gp == g,
            "outer_shrink_bound": build.outer_iterations <= shrink_cap,
        }
        rows.append(ReportRow("partition", spec.text, size, cls.n, g, "alg5", size, correct / size,
                              (), quantiles(counts), bounds, flags=flags))
    return rows


def random_subspace(m: int, ell: int, rng: SplitMix64) -> SubspaceF2:
    basis: list[int] = []
    while len(basis) < ell:
        v = rng.randbelow(1 << m)
        if v and gf2.rank(basis + [v]) == len(basis) + 1:
            basis.append(v)
    return SubspaceF2.from_vectors(basis, m)


@dataclass
class SimonMeasurement:
    m: int
    ell: int
    trials: int
    correct: int
    quantum: list
    classical: list
    samples_in_perp: bool


def measure_simon(m: int, ell: int, trials: int, seed: int) -> SimonMeasurement:
    correct, q_counts, c_counts = 0, [], []
    in_perp = True
    for t in range(trials):
        rng = SplitMix64(derive_seed(seed, "simon", t))
        v = random_subspace(m, ell, rng)
        f = v_invariant_function(v.basis, m, rng.next_u64())
        res = simon_partition_learn(FunctionOracle(f), m, ell, rng)
        correct += res.subspace == v
        q_counts.append(res.queries)
        perp = v.perp()
        in_perp &= all(perp.contains(y) for y in res.samples)
        base = classical_collision_baseline(FunctionOracle(f), m, ell, rng)
        if base.subspace is not None and base.subspace != v:
            raise PartitionError("collision baseline returned a wrong subspace")
        c_counts.append(base.queries)
    return SimonMeasurement(m, ell, trials, correct, q_counts, c_counts, in_perp)


def simon_rows(m: int, ell: int, trials: int, seed: int, check_separation: bool = True) -> list[ReportRow]:
    meas = measure_simon(m, ell, trials, seed)
    spec = f"vinv:m={m},l={ell}"
    q = quantiles(meas.quantum)
    c = quantiles(meas.classical)
    rate = meas.correct / trials
    quantum_row = ReportRow("simon-gap", spec, None, m + (max(0, (m - 1).bit_length()) if m > 1 else 0),
                            None, "simon", trials, rate, q, (),
                            {"budget_3m": 3 * m, "f_tilde_factor": m},
                            flags={"success_rate": rate >= SUCCESS_THRESHOLD,
                                   "within_3m": q[2] <= 3 * m,
                                   "samples_in_perp": meas.samples_in_perp})
    ratio = c[1] / q[1] if q[1] else math.inf
    classical_row = ReportRow("simon-gap", spec, None, quantum_row.n, None, "collision", trials, 1.0,
                              q, c, {"median_ratio": round(ratio, 6),
                                     "required_ratio": SEPARATION_FACTOR, "scale_2^(m-l)": 1 << (m - ell)},
                              flags={"quantum_median_within_3m": q[1] <= 3 * m})
    if check_separation:
        classical_row.flags["separation"] = ratio >= SEPARATION_FACTOR
    return [quantum_row, classical_row]


def pac_report() -> Report:
    rows = formula_rows()
    for r in rows:
        r["abs_err"] = float(r["abs_err"])
    return Report("pac-formulas", PAC_COLUMNS, rows, validate_rows(rows))


def pac_summary_row() -> ReportRow:
    rows = formula_rows()
    worst = max(r["abs_err"] for r in rows)
    return ReportRow("pac-formulas", "grid", None, None, None, "", len(rows),
                     bounds={"max_abs_err": worst, "tolerance": 1e-9,
                             "classical_lb_d8": classical_pac_sample_bound(8),
                             "quantum_lb_d8_eps1/32": quantum_pac_sample_bound(8, 1 / 32)},
                     flags={"formulas_match": validate_rows(rows)})


# -- bench -----------------------------------------------------------------

BENCH_GAMMA = ("parity:n=2", "delta:n=3", "parity:n=4")
BENCH_LEARN = (
    ("delta:n=5", "quantum", 300),
    ("parity:n=6", "quantum", 300),
    ("delta:n=5", "halving", 32),
    ("parity:n=6", "halving", 64),
    ("parity:n=8", "nestedbv", 256),
    ("nestedbv:n=9,d=2", "nestedbv", 512),
    ("prefixed:n=5,k=2", "nestedbv", 200),
    ("prefixed:n=5,k=2", "halving", 4096),
)
BENCH_COMPARE = (
    ("delta:n=5", "quantum", 100),
    ("parity:n=6", "nestedbv", 64),
    ("nestedbv:n=9,d=2", "nestedbv", 512),
    ("prefixed:n=5,k=2", "nestedbv", 200),
)
BENCH_PARTITION = (("delta:n=3", (2, 4, 8)), ("rand:n=4,size=12,seed=1", (2, 4, 8, 12)))
# (m, l, trials, check the classical/quantum median ratio)
BENCH_SIMON = ((6, 2, 200, False), (8, 5, 100, True))


def bench_suite(seed: int = DEFAULT_SEED) -> Report:
    records: list[ReportRow] = [gamma_row(s) for s in BENCH_GAMMA]
    for i, (spec, learner, trials) in enumerate(BENCH_LEARN):
        records.append(learn_row(spec, learner, trials, derive_seed(seed, "learn", i)))
    for i, (spec, learner, trials) in enumerate(BENCH_COMPARE):
        records.append(compare_row(spec, learner, trials, derive_seed(seed, "compare", i)))
    for spec, ks in BENCH_PARTITION:
        records += partition_rows(spec, ks)
    for i, (m, ell, trials, separation) in enumerate(BENCH_SIMON):
        records += simon_rows(m, ell, trials, derive_seed(seed, "simon", i), separation)
    records.append(pac_summary_row())
    return _from_rows("bench", records)


# -- entry point -----------------------------------------------------------

def run(config: ExperimentConfig) -> Report:
    """Run one experiment; raises :class:`ConfigError` or :class:`SpecError` on bad input."""
    config.validate()
    kind = config.kind
    seed = int(config.seed)
    if kind == "gamma":
        return _from_rows(kind, [gamma_row(config.class_spec)])
    if kind == "learn":
        trials = config.trials or DEFAULT_TRIALS["learn"]
        return _from_rows(kind, [learn_row(config.class_spec, config.learner, trials, seed)])
    if kind == "partition":
        return _from_rows(kind, partition_rows(config.class_spec, [config.k], seed))
    if kind == "simon-gap":
        trials = config.trials or DEFAULT_TRIALS["simon-gap"]
        return _from_rows(kind, simon_rows(config.m, config.l, trials, seed))
    if kind == "pac-formulas":
        return pac_report()
    return bench_suite(seed)


def write_report(report: Report, config: ExperimentConfig) -> str:
    text = report.render(config.format)
    if config.out:
        with open(config.out, "w", newline="") as fh:
            fh.write(text)
    return text


__all__ = ["ExperimentConfig", "Report", "ReportRow", "ConfigError", "SpecError", "run",
           "bench_suite", "write_report", "KINDS", "ROW_COLUMNS"]
