import math
import random

import pytest
from hypothesis import reject, strategies as st

from usage_pricing.market import Group, Market, validate_market

# Seed for every randomized market family in the suite.
SEED = 20240601


def random_market(rng: random.Random, max_groups: int = 6, min_groups: int = 1) -> Market:
    """theta log-uniform on [0.1, 100] (adjacent ratio >= 1 + 1e-3), N in 1..50, S log-uniform on [0.01, 1e3]."""
    size = rng.randint(min_groups, max_groups)
    while True:
        thetas = sorted(
            (math.exp(rng.uniform(math.log(0.1), math.log(100.0))) for _ in range(size)), reverse=True
        )
        if all(a / b >= 1 + 1e-3 for a, b in zip(thetas, thetas[1:])):
            break
    groups = tuple(Group(t, rng.randint(1, 50)) for t in thetas)
    return Market(groups, math.exp(rng.uniform(math.log(0.01), math.log(1e3))))


def random_markets(count: int, seed: int = SEED, **kwargs) -> list[Market]:
    rng = random.Random(seed)
    return [random_market(rng, **kwargs) for _ in range(count)]


@st.composite
def markets(draw, max_groups: int = 6, min_groups: int = 1):
    size = draw(st.integers(min_groups, max_groups))
    log_thetas = draw(
        st.lists(st.floats(math.log(0.1), math.log(100.0)), min_size=size, max_size=size)
    )
    thetas = sorted((math.exp(x) for x in log_thetas), reverse=True)
    for a, b in zip(thetas, thetas[1:]):
        if a / b < 1 + 1e-3:
            reject()
    counts = draw(st.lists(st.integers(1, 50), min_size=size, max_size=size))
    supply = math.exp(draw(st.floats(math.log(0.01), math.log(1e3))))
    return Market(tuple(Group(t, n) for t, n in zip(thetas, counts)), supply)


@pytest.fixture
def two_group():
    return validate_market([(4, 1), (1, 1)], 4)


@pytest.fixture
def five_group():
    return validate_market([(16, 2), (8, 3), (4, 5), (2, 10), (1, 80)], 100)


_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        measured = "; ".join(f"{k}={v}" for k, v in report.user_properties)
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome.upper(), measured))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, measured in _ACCEPTANCE:
        line = f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {name}"
        terminalreporter.write_line(f"{line}  [{measured}]" if measured else line)
