import numpy as np
import pytest
from hypothesis import strategies as st

from hawkdove.domain import Microgrid, Role, Scenario, classify_role

# -- scenario strategies ------------------------------------------------------

_unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def microgrids(draw, i=0, with_role=True):
    capacity = draw(st.floats(min_value=0.5, max_value=20.0, allow_nan=False))
    a, b, c = sorted(draw(st.tuples(_unit, _unit, _unit)))
    bt, st_ = a * capacity, b * capacity
    # energy anywhere in [0, capacity], thresholds ordered
    energy = draw(st.one_of(st.just(c * capacity), st.sampled_from([bt, st_]), _unit.map(lambda u: u * capacity)))
    cycles_max = draw(st.integers(min_value=1, max_value=10000))
    cycles = draw(st.integers(min_value=0, max_value=cycles_max))
    role = None
    if with_role:
        role = classify_role(Microgrid(i, energy, bt, st_, capacity, cycles, cycles_max), draw(st.booleans()))
    return Microgrid(i, energy, bt, st_, capacity, cycles, cycles_max, role)


@st.composite
def scenarios(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    mgs = tuple(draw(microgrids(i)) for i in range(n))
    thv = draw(st.floats(min_value=0.1, max_value=10.0, allow_nan=False))
    line_limit = draw(st.floats(min_value=0.1, max_value=20.0, allow_nan=False))
    return Scenario(mgs, thv=thv, line_limit=line_limit)


@st.composite
def scenario_and_matrix(draw, min_n=1, max_n=8):
    sc = draw(scenarios(min_n, max_n))
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    rng = np.random.default_rng(seed)
    # proposals up to 1.5*THV so clamping and THV caps both get exercised
    m = rng.uniform(0, 1.5 * sc.thv, size=(sc.n, sc.n))
    np.fill_diagonal(m, 0.0)
    return sc, m


def make_scenario(rows, thv=5.0, line_limit=10.0):
    """rows: (energy, bt, st, capacity, role) or with trailing cycles_remaining, cycles_max."""
    mgs = []
    for i, r in enumerate(rows):
        energy, bt, st_, cap, role = r[:5]
        cyc, cyc_max = (r[5], r[6]) if len(r) > 5 else (3000, 6000)
        mgs.append(Microgrid(i, energy, bt, st_, cap, cyc, cyc_max, role))
    return Scenario(tuple(mgs), thv=thv, line_limit=line_limit)


@pytest.fixture
def two_party():
    """Seller (E=10, BT=4, ST=8) and buyer (E=2, BT=5, ST=8)."""
    return make_scenario([(10, 4, 8, 12, Role.HAWK_SELLER), (2, 5, 8, 12, Role.BUYER)])


# -- acceptance reporting -----------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
