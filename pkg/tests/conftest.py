"""Shared fixtures, instance builders, and the acceptance summary hook."""

import numpy as np
import pytest
from hypothesis import strategies as st

from qnetopt.estimation import EstimationProblem
from qnetopt.instances import (random_memory_comb, random_problem,
                               random_product_pair, random_product_tester,
                               random_state_problem)
from qnetopt.networks import CombSpace, comb_of_state
from qnetopt.operators import LabeledOperator, SystemLabel

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LOG = []


def record_acceptance(number: int, label: str, ok: bool, detail: str = ""):
    mark = "PASS" if ok else "FAIL"
    line = "criterion %d [%s] %s" % (number, mark, label)
    if detail:
        line += "  (%s)" % detail
    ACCEPTANCE_LOG.append((number, line))
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LOG):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


# hypothesis strategies draw a seed and build instances through numpy's
# Generator, so shrinking works on a single integer
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def state_problems(draw, max_states=4, max_dim=4):
    g = np.random.default_rng(draw(seeds))
    n = draw(st.integers(2, max_states))
    d = draw(st.integers(2, max_dim))
    delta = draw(st.booleans())
    return random_state_problem(g, n, d, delta=delta)


@st.composite
def comb_spaces(draw, max_steps=2, max_dim=3, prefix="h"):
    n = draw(st.integers(1, max_steps))
    steps = []
    for k in range(n):
        d_in = draw(st.integers(1, max_dim))
        d_out = draw(st.integers(2, max_dim))
        steps.append((SystemLabel("%si%d" % (prefix, k), d_in),
                      SystemLabel("%so%d" % (prefix, k), d_out)))
    return CombSpace(tuple(steps))


@st.composite
def memory_combs(draw, prefix="h"):
    space = draw(comb_spaces(prefix=prefix))
    g = np.random.default_rng(draw(seeds))
    return random_memory_comb(g, space)


def qubit_state_problem(tag, vectors, priors, payoff=None):
    lab = SystemLabel(tag, len(vectors[0]))
    combs = tuple(comb_of_state(LabeledOperator((lab,), np.outer(v, v.conj())))
                  for v in vectors)
    if payoff is None:
        payoff = np.eye(len(vectors))
    return EstimationProblem(combs[0].space, tuple(range(len(vectors))),
                             np.asarray(priors, float), combs, np.asarray(payoff))


def helstrom_problem(tag="hel"):
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    return qubit_state_problem(tag, [np.array([1.0, 0.0]), plus], [0.5, 0.5])


HELSTROM_VALUE = 0.5 * (1.0 + np.sqrt(2.0) / 2.0)  # 0.8535533905932737
