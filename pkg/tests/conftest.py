import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from adelheat import Filtration, HeatKernelFin

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BUILTIN_NAMES = ["factorial", "prime_power(2)", "lcm"]


@pytest.fixture(scope="session")
def fact():
    return Filtration.factorial()


@pytest.fixture(scope="session")
def two():
    return Filtration.prime_power(2)


@pytest.fixture(scope="session")
def lcm():
    return Filtration.lcm()


@pytest.fixture(scope="session", params=BUILTIN_NAMES)
def builtin(request):
    return Filtration.from_config(request.param)


@pytest.fixture(scope="session")
def kernel(fact):
    return HeatKernelFin(fact, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion and assert it."""

    def record(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
