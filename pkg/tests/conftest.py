import math

import pytest

from kgkms.bundled import corpus_graph, valid_entries, with_dynamics
from kgkms.exact import parse_rate
from kgkms.kms import CriticalState
from kgkms.spectral import common_pf, normalize_dynamics


@pytest.fixture(scope="session")
def g23():
    return corpus_graph("one-vertex-2-3")


@pytest.fixture(scope="session")
def s23(g23):
    return common_pf(g23)


@pytest.fixture(scope="session")
def dyn23(s23):
    return normalize_dynamics(s23, [1.0, math.log(3)])


@pytest.fixture(scope="session")
def dyn23_exact(s23):
    return normalize_dynamics(s23, [parse_rate("1"), parse_rate("ln3")], exact=True)


@pytest.fixture(scope="session")
def crit23(g23, s23, dyn23):
    return CriticalState(g23, s23, dyn23)


@pytest.fixture(scope="session")
def crit23_exact(g23, s23, dyn23_exact):
    return CriticalState(g23, s23, dyn23_exact)


def _critical(entry):
    g = corpus_graph(entry.name)
    s = common_pf(g)
    dyn = normalize_dynamics(s, [parse_rate(x) for x in entry.rates])
    return CriticalState(g, s, dyn)


@pytest.fixture(scope="session")
def corpus_states():
    """Critical state for every corpus graph that carries default dynamics."""
    return {e.name: _critical(e) for e in with_dynamics()}


@pytest.fixture(scope="session")
def corpus_graphs():
    return {e.name: corpus_graph(e.name) for e in valid_entries()}


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=20240601,
                     help="seed for the randomized acceptance triples")


@pytest.fixture(scope="session")
def seed(request):
    return request.config.getoption("--seed")


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num])
