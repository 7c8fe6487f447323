import numpy as np
import pytest

from wfabounds import Alphabet, WeightedAutomaton
from wfabounds.experiments import random_contractive

ACCEPTANCE_LINES = []


def toy_automaton():
    return WeightedAutomaton(
        Alphabet(("a", "b")), [1, 3, 4], [2, 1, 1],
        {"a": [[0, 0, 3], [0, 0, 3], [1, 0, 0]], "b": [[0, 1, 0], [2, 0, 0], [0, 0, 4]]})


def geometric(c=0.5):
    """One state, one symbol: f(a^t) = c^t."""
    return WeightedAutomaton(Alphabet.of_size(1), [1.0], [1.0], [[[c]]])


@pytest.fixture
def toy():
    return toy_automaton()


@pytest.fixture
def contractive_family():
    rng = np.random.default_rng(2024)
    out = []
    for i in range(12):
        k = 1 + i % 2
        n = 1 + i % 3
        out.append(random_contractive(rng, k, n, rho=0.5))
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
