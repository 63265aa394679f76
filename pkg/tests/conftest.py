import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from liechart.formal_algebra import FormalVectorField
from liechart.multiindex import monomials
from liechart.rational import Q

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

small_q = st.builds(Q, st.integers(-6, 6), st.integers(1, 5))


@st.composite
def fields(draw, nu=None, N=None, lo=2, max_terms=6):
    """Sparse vector fields with leading degree >= lo."""
    nu = draw(st.integers(1, 3)) if nu is None else nu
    N = draw(st.integers(lo, 7)) if N is None else N
    keys = [(i, a) for d in range(lo, N + 1) for a in monomials(nu, d) for i in range(nu)]
    chosen = draw(st.lists(st.sampled_from(keys), max_size=max_terms, unique=True)) if keys else []
    comps = [{} for _ in range(nu)]
    for i, a in chosen:
        comps[i][a] = draw(small_q)
    return FormalVectorField(nu, N, comps)


def random_field(rng, nu, N, lo=2, terms=8):
    keys = [(i, a) for d in range(lo, N + 1) for a in monomials(nu, d) for i in range(nu)]
    comps = [{} for _ in range(nu)]
    for i, a in rng.sample(keys, min(terms, len(keys))):
        comps[i][a] = Q(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 7))
    return FormalVectorField(nu, N, comps)


@pytest.fixture
def rng():
    return random.Random(20240917)


def graded_field(rng, nu, N, lo=2, per_degree=3):
    """Random field with a few terms in every degree lo..N, denser at low degree."""
    comps = [{} for _ in range(nu)]
    for d in range(lo, N + 1):
        keys = [(i, a) for a in monomials(nu, d) for i in range(nu)]
        for i, a in rng.sample(keys, min(len(keys), max(1, per_degree - (d - lo) // 3))):
            comps[i][a] = Q(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
    return FormalVectorField(nu, N, comps)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
