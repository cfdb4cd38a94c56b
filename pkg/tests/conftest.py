import numpy as np
import pytest

from qlearn.concepts import ConceptClass


@pytest.fixture
def two_concepts():
    # differ first at input 2
    return ConceptClass(2, [[0, 1, 0, 1], [0, 1, 1, 1]])


def table(bits: str) -> np.ndarray:
    """Truth table from a string written in input order 0, 1, 2, ..."""
    return np.array([c == "1" for c in bits], dtype=bool)



# criterion number -> [(ok, detail), ...]; a criterion split over several tests passes only if all parts do
ACCEPTANCE: dict[int, list] = {}


@pytest.fixture
def criterion():
    """Record the verdict of (part of) an acceptance criterion."""
    def record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE.setdefault(number, []).append((bool(ok), detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        ok = all(p for p, _ in parts)
        detail = " | ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
