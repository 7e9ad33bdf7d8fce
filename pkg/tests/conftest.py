import sys
import numpy as np
from hypothesis import strategies as st

from measure_rates.measure_space import Interval, new_atomic

INTERVALS = [Interval(0, 1), Interval(1, 1), Interval(0.5, 2.0), Interval(3, 0.25)]

finite = dict(allow_nan=False, allow_infinity=False)


@st.composite
def intervals(draw):
    a = draw(st.sampled_from([0.0, 0.25, 1.0, 2.5]))
    b = draw(st.sampled_from([0.0, 0.5, 1.0, 3.0]))
    if a + b == 0:
        b = 1.0
    return Interval(a, b)


@st.composite
def atomic_measures(draw, interval=None, max_atoms=20, signed=True):
    iv = interval if interval is not None else draw(intervals())
    n = draw(st.integers(1, max_atoms))
    pts = draw(st.lists(st.floats(iv.left, iv.right, **finite), min_size=n, max_size=n))
    lo = -1.0 if signed else 0.0
    w = draw(st.lists(st.floats(lo, 1.0, **finite), min_size=n, max_size=n))
    return new_atomic(iv, pts, w)


def random_atomic(rng, iv, max_atoms=20, signed=True):
    n = int(rng.integers(1, max_atoms + 1))
    pts = rng.uniform(iv.left, iv.right, n)
    w = rng.uniform(-1 if signed else 0, 1, n)
    return new_atomic(iv, pts, w)


def random_probability(rng, iv, max_atoms=20, points=None):
    if points is None:
        n = int(rng.integers(1, max_atoms + 1))
        points = np.unique(rng.uniform(iv.left, iv.right, n))
    return new_atomic(iv, points, rng.dirichlet(np.ones(len(points))))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
