import numpy as np
import pytest
from hypothesis import strategies as st

from cranemarket.dataset import RevenuePanel, load_sample_panel

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def sample_panel():
    return load_sample_panel()


def make_panel(values, start=2017):
    values = np.asarray(values, dtype=float)
    names = [f"C{i}" for i in range(len(values))]
    return RevenuePanel(names, range(start, start + values.shape[1]), values)


def random_panel(rng, n, t, start=2017):
    """Positive, non-constant revenue rows."""
    values = rng.uniform(50, 500, size=(n, t))
    return make_panel(values, start)


@st.composite
def panels(draw, min_n=2, max_n=8, min_t=3, max_t=8):
    n = draw(st.integers(min_n, max_n))
    t = draw(st.integers(min_t, max_t))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_panel(np.random.default_rng(seed), n, t)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, desc, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:>2}. {desc}  ({detail})")
