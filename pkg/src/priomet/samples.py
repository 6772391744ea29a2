"""Seeded random inputs for benchmarks and tests."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .metric import MetricSpace, PointSet, WeightedTree, metric_from_graph


def random_graph_metric(n: int, seed: int, extra: float = 1.0, max_weight: int = 10,
                        rational: bool = True) -> MetricSpace:
    """Shortest-path metric of a random connected graph.

    A random spanning tree plus about ``extra * n`` further edges, with integer
    weights in ``1..max_weight`` (halved to non-integers one time in four, so
    the exact kernel sees real fractions).
    """
    rng = np.random.default_rng(seed)
    edges = []
    for v in range(1, n):
        edges.append((int(rng.integers(v)), v))
    for _ in range(int(extra * n)):
        u, v = rng.integers(n, size=2)
        if u != v:
            edges.append((int(u), int(v)))
    out = []
    for u, v in edges:
        w = Fraction(int(rng.integers(1, max_weight + 1)))
        if rng.random() < 0.25:
            w /= 2
        out.append((u, v, w if rational else float(w)))
    return metric_from_graph(out, n)


def random_float_metric(n: int, seed: int, dim: int = 3) -> MetricSpace:
    """Euclidean distances of Gaussian points (float kernel)."""
    from .metric import metric_from_points

    rng = np.random.default_rng(seed)
    return metric_from_points(PointSet(rng.standard_normal((n, dim)), 2.0))


def random_tree(n: int, seed: int, zero_prob: float = 0.0, max_weight: int = 8,
                shape: str = "random") -> WeightedTree:
    """Random tree on vertices ``0..n-1`` with rational weights.

    ``shape`` is ``"random"`` (uniform attachment), ``"path"`` or
    ``"caterpillar"``.  Each edge has weight zero with probability ``zero_prob``.
    """
    rng = np.random.default_rng(seed)
    edges = []
    spine = max(1, n // 2)
    for v in range(1, n):
        if shape == "path":
            u = v - 1
        elif shape == "caterpillar":
            u = v - 1 if v < spine else int(rng.integers(spine))
        else:
            u = int(rng.integers(v))
        if rng.random() < zero_prob:
            w = Fraction(0)
        else:
            w = Fraction(int(rng.integers(1, max_weight + 1)), int(rng.integers(1, 4)))
        edges.append((u, v, w))
    return WeightedTree(edges, vertices=range(n))


def gaussian_points(n: int, dim: int, seed: int) -> PointSet:
    rng = np.random.default_rng(seed)
    return PointSet(rng.standard_normal((n, dim)), 2.0)


def rational_points(n: int, dim: int, seed: int, p: float = 1.0, span: int = 20) -> PointSet:
    """Integer-valued points with halves mixed in, as exact Fractions."""
    rng = np.random.default_rng(seed)
    raw = rng.integers(-span, span + 1, size=(n, dim))
    half = rng.random((n, dim)) < 0.3
    vals = np.empty((n, dim), dtype=object)
    for i in range(n):
        for c in range(dim):
            vals[i, c] = Fraction(int(raw[i, c]), 2 if half[i, c] else 1)
    return PointSet(vals, p)
