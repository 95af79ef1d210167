import numpy as np
import pytest

from adiabatic_spp import (
    DriverParams,
    Schedule,
    build_cost_spectrum,
    enumerate_residues,
    generate_instance,
)

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, passed, detail)``."""

    def record(number, passed, detail):
        _ACCEPTANCE.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {detail}")


def make_problem(n, K, seed=1, b=25):
    inst = generate_instance(n, b, seed)
    table = enumerate_residues(inst)
    costs = build_cost_spectrum(inst, table, K)
    return inst, table, costs, DriverParams.uniform(n), Schedule()


@pytest.fixture
def small_problem():
    return make_problem(6, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
