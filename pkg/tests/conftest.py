import numpy as np
import pytest
from hypothesis import strategies as st

from lattice_ldp import SparseMeasure, srw


@pytest.fixture(scope="session")
def srw1():
    return srw(1)


@pytest.fixture(scope="session")
def srw2():
    return srw(2)


def points(dim, lo=-6, hi=6):
    return st.tuples(*[st.integers(lo, hi)] * dim)


@st.composite
def measures(draw, dim=1, max_sites=8, radius=6, max_mass=1.0):
    pts = draw(st.lists(points(dim, -radius, radius), min_size=1, max_size=max_sites,
                        unique=True))
    w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=len(pts), max_size=len(pts))))
    m = draw(st.floats(0.05, max_mass))
    w = w / w.sum() * m
    return SparseMeasure(dict(zip(pts, w.tolist())), dim=dim)


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
        n_pass = sum(line.startswith("[PASS]") for line in RESULTS.values())
        terminalreporter.write_line(f"{n_pass}/{len(RESULTS)} criteria passed")
