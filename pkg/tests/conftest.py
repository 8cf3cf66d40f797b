import numpy as np
import pytest

from aniso_bvp.energy import ProblemSpec
from aniso_bvp.nonlinearity import Nonlinearity, NodeFunction, Term
from aniso_bvp.problem import load_problem
from aniso_bvp.sequence_space import ExponentProfile


def cubic_spec(lam=1.0):
    """T=1, p=2, f=t^3: J(x) = x^2 - lam x^4/4."""
    nl = Nonlinearity((NodeFunction((Term(1.0, 0.0, 3),)),), q=[3], hypotheses={"H3": {"c": [1.0]}})
    return ProblemSpec(1, ExponentProfile.constant(2, 1), nl, lam)


def zero_spec(T=2, p=2.0, lam=1.0):
    return ProblemSpec(T, ExponentProfile.constant(p, T), Nonlinearity.zero(T), lam)


@pytest.fixture
def example():
    return load_problem("bundled:worked-example").spec


@pytest.fixture
def example_nl(example):
    return example.nl


@pytest.fixture
def cubic():
    return cubic_spec()


def random_term_nl(rng, T, max_terms=3, gamma=False):
    nodes = []
    for _ in range(T):
        terms = []
        for _ in range(rng.integers(1, max_terms + 1)):
            coef = float(rng.uniform(-3, 3))
            shift = float(rng.uniform(-1, 1))
            if gamma and rng.random() < 0.3:
                terms.append(Term(coef, shift, gamma=float(rng.uniform(0.5, 4.0))))
            else:
                terms.append(Term(coef, shift, int(rng.integers(0, 6))))
        nodes.append(NodeFunction(tuple(terms)))
    return Nonlinearity(tuple(nodes))


def interior(x):
    return np.concatenate(([0.0], np.asarray(x, float), [0.0]))


def random_spec(rng, p_low=2.0, p_high=4.0, T_max=6):
    """A random problem with p(k) in [p_low, p_high] and random term-list f."""
    T = int(rng.integers(1, T_max + 1))
    p = ExponentProfile(rng.uniform(p_low, p_high, T + 1))
    return ProblemSpec(T, p, random_term_nl(rng, T), float(rng.uniform(0.1, 10)))


def fd_gradient(spec, x, h=None):
    from aniso_bvp.energy import energy

    h = h if h is not None else 1e-6 * max(1.0, float(np.linalg.norm(x)))
    out = np.empty(x.size)
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = h
        out[j] = (energy(spec, x + e) - energy(spec, x - e)) / (2 * h)
    return out


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
