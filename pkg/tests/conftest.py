import itertools

import numpy as np
import pytest


def assert_within_sigma(estimate, target, stderr, k=4.0):
    """Monte Carlo agreement at ``k`` standard errors."""
    assert abs(estimate - target) <= k * stderr, (
        f"{estimate} vs {target}: {abs(estimate - target) / stderr:.2f} sigma"
    )


def enumerate_nn_chain(beta_J, sites):
    """Exact Gibbs law of a free nearest-neighbour chain by brute force."""
    configs = np.array(list(itertools.product([-1, 1], repeat=sites)))
    weights = np.exp(beta_J * np.sum(configs[:, 1:] * configs[:, :-1], axis=1))
    return configs, weights / weights.sum()


@pytest.fixture
def nn_chain():
    return enumerate_nn_chain


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    """Log one acceptance verdict; the lines are repeated in the terminal summary."""
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
