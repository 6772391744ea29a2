"""Metric spaces, trees, point sets, priority orderings and embedding matrices.

All values are immutable after construction.  Exact (rational) data lives in
numpy object arrays of :class:`fractions.Fraction`; float data in ``float64``.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernel as K
from .errors import (
    DimensionMismatch,
    DisconnectedGraph,
    InvalidOrdering,
    InvalidTree,
    NegativeWeight,
    SizeMismatch,
)


# ---------------------------------------------------------------------------
# MetricSpace
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Dense symmetric distance matrix over ``n`` indexed points.

    ``exact`` tags the kernel: object array of Fractions when True, float64
    otherwise.  Construction only checks the shape; use :func:`validate_metric`
    for the metric axioms.
    """

    dist: np.ndarray
    exact: bool
    names: tuple | None = None

    def __post_init__(self):
        d = self.dist
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionMismatch(f"distance matrix must be square, got {d.shape}")
        if self.names is not None and len(self.names) != d.shape[0]:
            raise DimensionMismatch("names length differs from point count")

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def pseudometric(self) -> bool:
        """True when two distinct points sit at distance zero."""
        off = self.dist[~np.eye(self.n, dtype=bool)]
        return bool(np.any(off == 0))

    def __getitem__(self, ij):
        return self.dist[ij]

    def label(self, i: int):
        return self.names[i] if self.names is not None else i

    @classmethod
    def from_matrix(cls, rows, exact: bool | None = None, names=None) -> "MetricSpace":
        """Build from nested lists; rationals may be given as ``"p/q"`` strings."""
        flat = [x for row in rows for x in row]
        if exact is None:
            exact = all(K.is_rational_value(x) for x in flat)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise DimensionMismatch("distance matrix rows have unequal length")
        if exact:
            dist = K.fraction_array(rows) if n else np.zeros((0, 0), dtype=object)
        else:
            dist = np.array([[K.parse_number(x, False) for x in r] for r in rows], dtype=float)
            dist = dist.reshape(n, n)
        return cls(dist, exact, tuple(names) if names is not None else None)

    def as_float(self) -> np.ndarray:
        return self.dist.astype(float) if self.exact else self.dist

    def submetric(self, idx: Sequence[int]) -> "MetricSpace":
        idx = list(idx)
        names = tuple(self.label(i) for i in idx) if self.names is not None else None
        return MetricSpace(self.dist[np.ix_(idx, idx)], self.exact, names)


# ---------------------------------------------------------------------------
# WeightedTree
# ---------------------------------------------------------------------------


class WeightedTree:
    """Tree with exact nonnegative rational edge weights.

    Vertices are integer ids; ``names`` optionally maps ids to display labels.
    Zero weights are allowed and make the tree metric a pseudometric.
    """

    def __init__(self, edges: Iterable, vertices: Iterable[int] | None = None,
                 root: int | None = None, names: dict | None = None):
        adj: dict[int, dict[int, Fraction]] = {}
        if vertices is not None:
            for v in vertices:
                adj.setdefault(int(v), {})
        m = 0
        for u, v, w in edges:
            u, v = int(u), int(v)
            try:
                w = K.to_fraction(w)
            except TypeError as exc:
                raise InvalidTree(f"tree weights must be rational, got {w!r}") from exc
            if w < 0:
                raise NegativeWeight(f"edge ({u},{v}) has negative weight {w}")
            if u == v:
                raise InvalidTree(f"self loop at {u}")
            if v in adj.get(u, {}):
                raise InvalidTree(f"duplicate edge ({u},{v})")
            adj.setdefault(u, {})[v] = w
            adj.setdefault(v, {})[u] = w
            m += 1
        if not adj:
            raise InvalidTree("a tree needs at least one vertex")
        if m != len(adj) - 1:
            raise InvalidTree(f"{len(adj)} vertices but {m} edges")
        if len(_reach(adj, next(iter(adj)))) != len(adj):
            raise InvalidTree("tree is not connected")
        if root is not None and root not in adj:
            raise InvalidTree(f"root {root} is not a vertex")
        self._adj = adj
        self.root = root
        self.names = dict(names) if names else None

    @classmethod
    def _from_adj(cls, adj: dict[int, dict[int, Fraction]], names=None) -> "WeightedTree":
        t = cls.__new__(cls)
        t._adj = adj
        t.root = None
        t.names = names
        return t

    @property
    def n(self) -> int:
        return len(self._adj)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self._adj))

    @property
    def adjacency(self) -> dict[int, dict[int, Fraction]]:
        """A fresh copy of the adjacency map."""
        return {v: dict(nb) for v, nb in self._adj.items()}

    def edges(self) -> list[tuple[int, int, Fraction]]:
        return sorted((u, v, w) for u, nb in self._adj.items() for v, w in nb.items() if u < v)

    def neighbors(self, v: int) -> dict[int, Fraction]:
        return dict(self._adj[v])

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def is_leaf(self, v: int) -> bool:
        return len(self._adj[v]) <= 1

    def __contains__(self, v) -> bool:
        return v in self._adj

    @property
    def pseudometric(self) -> bool:
        return any(w == 0 for nb in self._adj.values() for w in nb.values())

    def distances_from(self, v: int) -> dict[int, Fraction]:
        return tree_distances(self._adj, v)

    def distance(self, u: int, v: int) -> Fraction:
        return self.distances_from(u)[v]

    def path(self, u: int, v: int) -> list[int]:
        return tree_path(self._adj, u, v)

    def label(self, v: int):
        return self.names.get(v, v) if self.names else v

    def __repr__(self):
        return f"WeightedTree(n={self.n}, edges={len(self.edges())})"


def _reach(adj, src) -> set:
    seen = {src}
    stack = [src]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def tree_distances(adj: dict, src) -> dict:
    """Exact distances from ``src`` to every vertex of a tree adjacency map."""
    dist = {src: Fraction(0)}
    stack = [src]
    while stack:
        x = stack.pop()
        dx = dist[x]
        for y, w in adj[x].items():
            if y not in dist:
                dist[y] = dx + w
                stack.append(y)
    return dist


def tree_hops(adj: dict, src) -> dict:
    hops = {src: 0}
    q = deque([src])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y not in hops:
                hops[y] = hops[x] + 1
                q.append(y)
    return hops


def tree_path(adj: dict, u, v) -> list:
    parent = {u: None}
    q = deque([u])
    while q:
        x = q.popleft()
        if x == v:
            break
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                q.append(y)
    if v not in parent:
        raise InvalidTree(f"no path between {u} and {v}")
    out = [v]
    while out[-1] != u:
        out.append(parent[out[-1]])
    return out[::-1]


# ---------------------------------------------------------------------------
# PointSet, PriorityOrdering, EmbeddingMatrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointSet:
    """``n`` points in R^m under the l_p norm (``p`` may be ``math.inf``)."""

    points: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        if self.points.ndim != 2:
            raise DimensionMismatch("points must form an (n, m) array")
        if not (self.p >= 1):
            raise DimensionMismatch(f"norm parameter p must be >= 1, got {self.p}")

    @classmethod
    def from_rows(cls, rows, p=2.0, exact: bool | None = None) -> "PointSet":
        rows = [list(r) for r in rows]
        if rows and len({len(r) for r in rows}) != 1:
            raise DimensionMismatch("points have different dimensions")
        if exact is None:
            exact = all(K.is_rational_value(x) for r in rows for x in r)
        if not rows:
            return cls(np.zeros((0, 0)), float(p))
        if exact:
            return cls(K.fraction_array(rows), float(p))
        return cls(np.array([[K.parse_number(x, False) for x in r] for r in rows], dtype=float), float(p))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    @property
    def exact(self) -> bool:
        return self.points.dtype == object or self.points.dtype.kind in "iu"


@dataclass(frozen=True, eq=False)
class PriorityOrdering:
    """A priority permutation ``perm = (x_1, ..., x_n)`` of point ids.

    Ranks are 1-based: ``rank(perm[0]) == 1``.
    """

    perm: tuple

    def __post_init__(self):
        if len(set(self.perm)) != len(self.perm):
            raise InvalidOrdering("priority ordering repeats a point")
        object.__setattr__(self, "_rank", {x: j + 1 for j, x in enumerate(self.perm)})

    @property
    def n(self) -> int:
        return len(self.perm)

    def rank(self, x: Hashable) -> int:
        return self._rank[x]

    def point(self, j: int):
        return self.perm[j - 1]

    def prefix(self, k: int) -> tuple:
        return self.perm[:k]

    def check_covers(self, items: Iterable) -> None:
        if set(items) != set(self.perm):
            raise InvalidOrdering("priority ordering does not cover the point set")

    @classmethod
    def identity(cls, n: int) -> "PriorityOrdering":
        return cls(tuple(range(n)))

    @classmethod
    def random(cls, items, seed: int) -> "PriorityOrdering":
        items = list(range(items)) if isinstance(items, int) else list(items)
        rng = np.random.default_rng(seed)
        return cls(tuple(items[i] for i in rng.permutation(len(items))))


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """``n x d`` embedding into l_infinity; row per point, column per coordinate.

    ``row_ids`` names the point behind each row (defaults to ``0..n-1``);
    ``blocks`` carries optional provenance records for column ranges.
    """

    values: np.ndarray
    exact: bool
    row_ids: tuple | None = None
    blocks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.values.ndim != 2:
            raise DimensionMismatch("embedding must be a 2-d array")
        if self.row_ids is None:
            object.__setattr__(self, "row_ids", tuple(range(self.values.shape[0])))
        elif len(self.row_ids) != self.values.shape[0]:
            raise SizeMismatch("row_ids length differs from row count")
        if not self.exact and not np.all(np.isfinite(self.values)):
            raise ValueError("embedding entries must be finite")
        object.__setattr__(self, "_row_of", {r: i for i, r in enumerate(self.row_ids)})

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def row(self, point) -> np.ndarray:
        return self.values[self._row_of[point]]

    def row_index(self, point) -> int:
        return self._row_of[point]

    def support(self, point) -> int:
        """1-based index of the last nonzero column of ``point`` (0 if none)."""
        nz = np.nonzero(self.row(point) != 0)[0]
        return int(nz[-1]) + 1 if nz.size else 0

    def supports(self) -> np.ndarray:
        nz = self.values != 0
        last = np.where(nz.any(axis=1), self.d - np.argmax(nz[:, ::-1], axis=1), 0)
        return last.astype(int)

    def trimmed(self) -> "EmbeddingMatrix":
        """Drop trailing all-zero columns."""
        keep = int(self.supports().max()) if self.n and self.d else 0
        return EmbeddingMatrix(self.values[:, :keep], self.exact, self.row_ids, self.blocks)

    def as_float(self) -> np.ndarray:
        return self.values.astype(float) if self.exact else self.values

    @classmethod
    def empty(cls, row_ids, exact=True) -> "EmbeddingMatrix":
        vals = np.zeros((len(row_ids), 0), dtype=object if exact else float)
        return cls(vals, exact, tuple(row_ids))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def metric_from_graph(edges: Iterable, n: int, allow_zero: bool = False,
                      names=None) -> MetricSpace:
    """Shortest-path metric of a connected undirected weighted graph.

    Runs Dijkstra from every source.  The result is rational-tagged iff every
    weight is rational (int, Fraction or ``"p/q"``).
    """
    edges = list(edges)
    exact = all(K.is_rational_value(w) for _, _, w in edges)
    zero = Fraction(0) if exact else 0.0
    adj: list[dict[int, object]] = [dict() for _ in range(n)]
    for u, v, w in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise DimensionMismatch(f"edge ({u},{v}) outside 0..{n - 1}")
        w = K.parse_number(w, exact)
        if w < 0:
            raise NegativeWeight(f"edge ({u},{v}) has negative weight {w}")
        if w == 0 and not allow_zero:
            raise NegativeWeight(f"edge ({u},{v}) has zero weight (pass allow_zero=True)")
        if u == v:
            continue
        if v not in adj[u] or w < adj[u][v]:
            adj[u][v] = w
            adj[v][u] = w
    dist = np.empty((n, n), dtype=object if exact else float)
    for s in range(n):
        row = _dijkstra(adj, s, zero)
        if len(row) != n:
            missing = next(t for t in range(n) if t not in row)
            raise DisconnectedGraph(f"vertex {missing} unreachable from {s}")
        for t, d in row.items():
            dist[s, t] = d
    return MetricSpace(dist, exact, tuple(names) if names is not None else None)


def _dijkstra(adj, src, zero) -> dict:
    best = {src: zero}
    done = set()
    heap = [(zero, 0, src)]
    tick = 1
    while heap:
        d, _, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, w in adj[x].items():
            nd = d + w
            if y not in best or nd < best[y]:
                best[y] = nd
                heapq.heappush(heap, (nd, tick, y))
                tick += 1
    return best


def metric_from_points(P: PointSet) -> MetricSpace:
    """l_p distances between the points of ``P``.

    Exact when the coordinates are rational and ``p`` is 1 or infinity.
    """
    n = P.n
    if P.exact and P.p in (1.0, math.inf):
        pts = P.points if P.points.dtype == object else K.fraction_array(P.points.tolist())
        dist = np.zeros((n, n), dtype=object)
        dist[:] = Fraction(0)
        for c in range(P.m):
            col = pts[:, c]
            diff = np.abs(col[:, None] - col[None, :])
            dist = dist + diff if P.p == 1.0 else np.maximum(dist, diff)
        return MetricSpace(dist, True)
    pts = P.points.astype(float)
    if n == 0:
        return MetricSpace(np.zeros((0, 0)), False)
    if P.p == math.inf:
        dist = cdist(pts, pts, metric="chebyshev")
    elif P.p == 1.0:
        dist = cdist(pts, pts, metric="cityblock")
    elif P.p == 2.0:
        dist = cdist(pts, pts, metric="euclidean")
    else:
        dist = cdist(pts, pts, metric="minkowski", p=P.p)
    np.fill_diagonal(dist, 0.0)
    dist = (dist + dist.T) / 2
    return MetricSpace(dist, False)


def metric_from_tree(T: WeightedTree) -> MetricSpace:
    """Exact path-length metric; rows follow ``T.vertices`` (sorted ids)."""
    verts = T.vertices
    idx = {v: i for i, v in enumerate(verts)}
    adj = T._adj
    den = math.lcm(1, *(w.denominator for nb in adj.values() for w in nb.values()))
    iadj = {v: {u: w.numerator * (den // w.denominator) for u, w in nb.items()} for v, nb in adj.items()}
    n = len(verts)
    num = np.zeros((n, n), dtype=object)
    for v in verts:
        dist = {v: 0}
        stack = [v]
        while stack:
            x = stack.pop()
            dx = dist[x]
            for y, w in iadj[x].items():
                if y not in dist:
                    dist[y] = dx + w
                    stack.append(y)
        row = num[idx[v]]
        for y, d in dist.items():
            row[idx[y]] = Fraction(d, den)
    names = tuple(T.label(v) for v in verts) if T.names else tuple(verts)
    return MetricSpace(num, True, names)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    diagonal: list = field(default_factory=list)
    negative: list = field(default_factory=list)
    symmetry: list = field(default_factory=list)
    triangle: list = field(default_factory=list)
    tol: float = K.FLOAT_TOL
    exact: bool = False

    @property
    def ok(self) -> bool:
        return not (self.diagonal or self.negative or self.symmetry or self.triangle)

    def __bool__(self):
        return self.ok

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "exact": self.exact,
            "tol": self.tol,
            "diagonal": self.diagonal,
            "negative": self.negative,
            "symmetry": self.symmetry,
            "triangle": self.triangle,
        }


def validate_metric(M: MetricSpace, tol: float = K.FLOAT_TOL, limit: int = 1000) -> ValidationReport:
    """List diagonal, sign, symmetry and triangle-inequality violations.

    Triangle violations are reported as ``(i, j, k)`` meaning
    ``d(i,k) > d(i,j) + d(j,k)`` with ``i < k`` and ``j`` the middle point.
    Exact comparison in the rational kernel; relative tolerance ``tol``
    otherwise.  At most ``limit`` entries are kept per category.
    """
    rep = ValidationReport(tol=0.0 if M.exact else tol, exact=M.exact)
    n = M.n
    if M.exact:
        (D,), _ = K.to_common_ints(M.dist)
        scale = 0.0
        slack = lambda ref: 0  # noqa: E731
    else:
        D = M.dist
        scale = float(np.max(np.abs(D))) if D.size else 0.0
        slack = lambda ref: tol * np.maximum(np.abs(ref), scale * 1e-3)  # noqa: E731
    for i in range(n):
        if D[i, i] != 0 and abs(D[i, i]) > (0 if M.exact else tol * max(scale, 1.0)):
            rep.diagonal.append(i)
    neg = np.argwhere(D < 0)
    rep.negative = [tuple(map(int, x)) for x in neg[:limit]]
    asym = np.abs(D - D.T) > slack(D)
    rep.symmetry = [(int(i), int(j)) for i, j in np.argwhere(np.triu(asym, 1))[:limit]]
    for j in range(n):
        via = D[:, j][:, None] + D[j, :][None, :]
        bad = (D - via) > slack(D)
        bad[j, :] = False
        bad[:, j] = False
        for i, k in np.argwhere(np.triu(bad | bad.T, 1)):
            if len(rep.triangle) >= limit:
                break
            rep.triangle.append((int(i), j, int(k)))
    rep.triangle.sort()
    return rep
