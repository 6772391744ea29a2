from fractions import Fraction

import numpy as np
import pytest

from priomet.metric import WeightedTree


def floyd_warshall(edges, n):
    """Reference all-pairs shortest paths (exact when weights are Fractions)."""
    INF = None
    D = [[INF] * n for _ in range(n)]
    for i in range(n):
        D[i][i] = Fraction(0)
    for u, v, w in edges:
        w = Fraction(w)
        if D[u][v] is None or w < D[u][v]:
            D[u][v] = D[v][u] = w
    for k in range(n):
        for i in range(n):
            if D[i][k] is None:
                continue
            for j in range(n):
                if D[k][j] is None:
                    continue
                cand = D[i][k] + D[k][j]
                if D[i][j] is None or cand < D[i][j]:
                    D[i][j] = cand
    return D


def linf(a, b):
    return max((abs(x - y) for x, y in zip(a, b)), default=0)


# Tree consistent with the folding figure: t1 and t2 at distance 8 around c.
FIG1_NAMES = ["c", "p1", "x1", "p3", "t1", "q1", "x2", "q3", "t2", "y1", "y2", "v", "a", "z", "b"]


@pytest.fixture
def fig1_tree():
    ix = {name: i for i, name in enumerate(FIG1_NAMES)}
    raw = [("c", "p1", 1), ("p1", "x1", 1), ("x1", "p3", 1), ("p3", "t1", 1),
           ("c", "q1", 1), ("q1", "x2", 1), ("x2", "q3", 1), ("q3", "t2", 1),
           ("x1", "y1", 1), ("y1", "y2", 2), ("y2", "v", 1), ("v", "a", 1),
           ("p3", "z", 1), ("x2", "b", 1)]
    T = WeightedTree([(ix[a], ix[b], Fraction(w)) for a, b, w in raw], vertices=range(len(FIG1_NAMES)))
    return T, ix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    """Store a PASS/FAIL line for an acceptance criterion."""

    def _record(key, ok, detail=""):
        ACCEPTANCE[key] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(str(k).split()[0]), str(k))):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}")
