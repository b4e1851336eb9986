import numpy as np
import pytest

from deltaloops.config import RandomScatterers
from deltaloops.field import IncidentWave, ScattererSet, solve_field_state
from deltaloops.tracer import TraceConfig, trace_all

# ten alpha = 0 centers at k = 2, seeded positions
TEN_CENTER_RANDOM = RandomScatterers(seed=0, count=10, box=((-1.5, 1.5),) * 3, alpha=0.0, min_separation=0.4)
TEN_CENTER_TRACE = TraceConfig(bounds=((-3.0, 3.0),) * 3, seed_resolution=60)

ACCEPTANCE_LINES = []


def single_state(alpha, k=2.0):
    return solve_field_state(ScattererSet([[0.0, 0.0, 0.0]], [alpha]), IncidentWave(k))


def random_state(rng, n=None, box=2.0, alpha_range=(-1.0, 1.0), k_range=(0.5, 4.0), min_sep=0.2):
    n = int(rng.integers(1, 11)) if n is None else n
    pos = []
    while len(pos) < n:
        p = rng.uniform(-box, box, 3)
        if all(np.linalg.norm(p - q) >= min_sep for q in pos):
            pos.append(p)
    alpha = rng.uniform(*alpha_range, n)
    k = rng.uniform(*k_range)
    return solve_field_state(ScattererSet(np.array(pos).reshape(-1, 3), alpha), IncidentWave(k))


@pytest.fixture(scope="session")
def ring_state():
    return single_state(0.0)


@pytest.fixture(scope="session")
def ring_loops(ring_state):
    return trace_all(ring_state, TraceConfig())


@pytest.fixture(scope="session")
def ten_center_state():
    pos = TEN_CENTER_RANDOM.generate()
    return solve_field_state(ScattererSet(pos, np.zeros(len(pos))), IncidentWave(2.0))


@pytest.fixture(scope="session")
def ten_center_loops(ten_center_state):
    return trace_all(ten_center_state, TEN_CENTER_TRACE)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
