import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from guessleak.prob_core import Distribution, JointSource

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_joint(rng, nx, ny):
    """Flat Dirichlet joint; the generator used throughout the suite."""
    return JointSource.of(rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny))


def masses(allow_zeros=True):
    """Entries that are exactly zero or at least 1e-6; subnormals only test float overflow."""
    pos = st.floats(1e-6, 1.0)
    return st.one_of(st.just(0.0), pos) if allow_zeros else pos


@st.composite
def distributions(draw, min_size=1, max_size=6, allow_zeros=True):
    n = draw(st.integers(min_size, max_size))
    w = np.array(draw(st.lists(masses(allow_zeros), min_size=n, max_size=n)))
    if w.sum() <= 0:
        w[0] = 1.0
    return Distribution.of(w / w.sum())


@st.composite
def joints(draw, max_x=4, max_y=4, allow_zeros=True):
    nx = draw(st.integers(1, max_x))
    ny = draw(st.integers(1, max_y))
    w = np.array(draw(st.lists(masses(allow_zeros), min_size=nx * ny, max_size=nx * ny)))
    if w.sum() <= 0:
        w[0] = 1.0
    return JointSource.of((w / w.sum()).reshape(nx, ny))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_split(rng, pu):
    """A random pair A + B = 2 P_U with sum(A) = 1: A = 2 P_U * clip(r + t, 0, 1), t solved for."""
    from scipy.optimize import brentq

    from guessleak.constructions import MassVector, SplitPair

    two_p = 2 * pu.probs
    r = rng.random(len(pu))
    t = brentq(lambda t: np.sum(two_p * np.clip(r + t, 0, 1)) - 1.0, -1.0, 1.0, xtol=1e-15)
    a = two_p * np.clip(r + t, 0, 1)
    a = a / a.sum()
    b = np.clip(two_p - a, 0.0, None)
    return SplitPair(MassVector(pu.labels, a), MassVector(pu.labels, b), pu)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
