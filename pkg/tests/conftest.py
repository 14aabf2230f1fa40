import numpy as np
import pytest


def multiset_gap(xs, ys):
    """Greedy matching distance between two root multisets."""
    xs = list(xs)
    ys = list(ys)
    assert len(xs) == len(ys)
    worst = 0.0
    for x in xs:
        i = min(range(len(ys)), key=lambda j: abs(x - ys[j]))
        worst = max(worst, abs(x - ys[i]) / (1.0 + abs(x)))
        ys.pop(i)
    return worst


def flatten_roots(roots):
    return [r for r, m in roots for _ in range(m)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
