import numpy as np
import pytest

from operlab.connection import make_spec

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str):
    ACCEPTANCE[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def a1_spec():
    return make_spec("A1", 0.4, [0.3])


@pytest.fixture(scope="session")
def a2_spec():
    return make_spec("A2", 0.4, [0.31, 0.17])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
