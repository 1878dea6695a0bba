import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from altcsit.states import from_weights, symmetric_pmf

settings.register_profile("default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# weight palette that hits zero masses and ties often
WEIGHTS = (0, 0, 1, 2, 3, 5, 7)


@st.composite
def pmfs(draw, max_weight: int = 12):
    """Random symmetric rational pmf over the six free masses (pp, pd, pn, dd, dn, nn)."""
    w = draw(st.lists(st.integers(0, max_weight), min_size=6, max_size=6).filter(lambda ws: sum(ws) > 0))
    return from_weights(w)


def random_pmfs(count: int, seed: int = 1, palette=WEIGHTS):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        w = [rng.choice(palette) for _ in range(6)]
        if sum(w):
            out.append(from_weights(w))
    return out


@pytest.fixture
def pd_dp():
    return symmetric_pmf(pd=Fraction(1, 2))


# acceptance lines collected by tests/test_acceptance.py, echoed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
