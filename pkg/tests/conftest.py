import numpy as np
import pytest

from opgyro import build_composite, couple_basis, ferromagnetic_state
from opgyro.halfint import HalfInt
from opgyro.oracle import PropagatorCache

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def ferro_setup(n, i_spin, mode="full"):
    """(system, initial, basis, cache) for N spin-1/2 from the ferromagnetic start."""
    system = build_composite(n, "1/2", i_spin, mode)
    initial = ferromagnetic_state(system, -HalfInt.parse(i_spin))
    return system, initial, couple_basis(system, initial.M_J), PropagatorCache.build(system)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(label: str, passed: bool, detail: str = ""):
        ACCEPTANCE_RESULTS.append((label, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
