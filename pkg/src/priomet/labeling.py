"""Distance labeling schemes with prioritized label sizes.

Two schemes are provided:

* ``exact`` -- the label of the rank-``j`` point stores ``j`` and its distances
  to the ``j-1`` higher-priority points; queries are exact.
* ``jl`` -- layered Johnson-Lindenstrauss labels for l_2 (and l_1 through the
  squared-l_2 snowflake).  Layer ``i`` serves the first ``2**(2**i)`` points;
  a rank-``j`` label carries layers ``0..layer_index(j)``.

Sizes are counted in words: one word per stored distance, coordinate or index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernel as K
from .errors import BadEpsilon, SchemeMismatch, UnsupportedNorm
from .metric import MetricSpace, PointSet, PriorityOrdering

EXACT_SCHEME = "exact"

# Default multiplier in the per-layer JL target dimension.
C_JL = 8.0

PRNG_NAME = "numpy.PCG64/SeedSequence([seed, layer])"


@dataclass(frozen=True, eq=False)
class Label:
    """One point's label.

    ``payload`` is the tuple of stored words (distances or coordinates).
    ``blocks`` gives the per-layer word counts of a JL payload; it is derived
    from the scheme parameters, so it is not counted as label words.
    """

    rank: int
    payload: tuple
    scheme: str
    point: object = None
    blocks: tuple = ()

    @property
    def size_in_words(self) -> int:
        return 1 + len(self.payload)


@dataclass(frozen=True, eq=False)
class JLLayerMap:
    layer: int
    source_dim: int
    target_dim: int
    terminals: int
    seed: int
    matrix: np.ndarray = field(repr=False)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return X @ self.matrix.T


@dataclass(frozen=True, eq=False)
class LabelSet:
    labels: tuple
    scheme: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(lab.scheme != self.scheme for lab in self.labels):
            raise SchemeMismatch("labels carry different scheme ids")
        ranks = sorted(lab.rank for lab in self.labels)
        if ranks != list(range(1, len(ranks) + 1)):
            raise SchemeMismatch("label ranks do not cover 1..n")
        object.__setattr__(self, "_by_point", {lab.point: lab for lab in self.labels})

    @property
    def n(self) -> int:
        return len(self.labels)

    def by_rank(self, j: int) -> Label:
        return self.labels[j - 1]

    def of(self, point) -> Label:
        return self._by_point[point]

    def sizes(self) -> list[int]:
        return [lab.size_in_words for lab in self.labels]

    def query(self, a, b):
        """Answer a distance query between two points by their ids."""
        la, lb = self.of(a), self.of(b)
        if self.scheme == EXACT_SCHEME:
            return exact_query(la, lb)
        return jl_query(la, lb)


# ---------------------------------------------------------------------------
# Exact prioritized labels
# ---------------------------------------------------------------------------


def exact_labels(M: MetricSpace, order: PriorityOrdering) -> LabelSet:
    """Label of ``x_j`` = ``(j, d(x_1,x_j), ..., d(x_{j-1},x_j))``."""
    order.check_covers(range(M.n))
    labels = []
    for j, x in enumerate(order.perm, start=1):
        payload = tuple(M.dist[order.perm[i], x] for i in range(j - 1))
        labels.append(Label(j, payload, EXACT_SCHEME, point=x))
    return LabelSet(tuple(labels), EXACT_SCHEME, {"n": M.n, "exact": M.exact})


def exact_query(la: Label, lb: Label):
    if la.scheme != EXACT_SCHEME or lb.scheme != EXACT_SCHEME:
        raise SchemeMismatch(f"exact decoder got {la.scheme!r} and {lb.scheme!r}")
    if la.rank == lb.rank:
        return 0
    lo, hi = (la, lb) if la.rank < lb.rank else (lb, la)
    if len(hi.payload) != hi.rank - 1:
        raise SchemeMismatch(f"label of rank {hi.rank} holds {len(hi.payload)} distances")
    return hi.payload[lo.rank - 1]


# ---------------------------------------------------------------------------
# Layered JL labels
# ---------------------------------------------------------------------------


def layer_index(j: int) -> int:
    """Smallest ``i >= 0`` with ``j <= 2**(2**i)``."""
    if j < 1:
        raise ValueError("ranks start at 1")
    i = 0
    while j > 2 ** (2**i):
        i += 1
    return i


def layer_size(i: int, n: int) -> int:
    """Number of terminals of layer ``i``: ``min(n, 2**(2**i))``."""
    return min(n, 2 ** (2**i))


def jl_target_dim(terminals: int, eps: float, c_jl: float = C_JL) -> int:
    return math.ceil(c_jl * eps**-2 * math.log(max(terminals, 2)))


def jl_word_constant(c_jl: float = C_JL) -> float:
    """Constant ``C`` in the size bound ``C * eps**-2 * log2(j+1) + O(1)``.

    Layers ``0..L`` cost at most ``c_jl*eps**-2*ln2*(2**(L+1)-1) + L+1`` words
    and ``2**(L-1) < log2 j`` once ``L >= 1``, so ``4*c_jl*ln 2`` suffices.
    """
    return 4 * c_jl * math.log(2)


def jl_layer_eps(eps: float, p: float = 2.0) -> float:
    """Projection accuracy needed so that decoded answers land within 1+eps.

    The l_1 path squares its answers, which squares the projection error too.
    """
    return math.sqrt(1 + eps) - 1 if p == 1.0 else eps


def jl_word_bound(j: int, eps: float, c_jl: float = C_JL, p: float = 2.0) -> float:
    return jl_word_constant(c_jl) * jl_layer_eps(eps, p) ** -2 * math.log2(j + 1) + layer_index(j) + 2


def draw_layer_map(layer: int, source_dim: int, terminals: int, eps: float,
                   seed: int, c_jl: float = C_JL) -> JLLayerMap:
    d = jl_target_dim(terminals, eps, c_jl)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, layer])))
    G = rng.standard_normal((d, source_dim)) / math.sqrt(d)
    return JLLayerMap(layer, source_dim, d, terminals, seed, G)


def snowflake_indicators(P: PointSet) -> tuple[list[Fraction], np.ndarray]:
    """Interval-indicator features of an l_1 point set.

    For each coordinate with sorted distinct values ``v_1 < ... < v_k`` emit
    ``k-1`` features ``[x >= v_{t+1}]`` of weight ``v_{t+1} - v_t``.  Returns the
    weights (exact when the input is) and the 0/1 indicator matrix, so that
    ``sum(w * (b_x - b_y)**2) == |x - y|_1``.
    """
    if P.p != 1.0:
        raise UnsupportedNorm(f"snowflake map needs an l_1 point set, got p={P.p}")
    exact = P.exact
    pts = P.points
    weights: list = []
    cols = []
    for c in range(P.m):
        column = [K.to_fraction(x) if exact else float(x) for x in pts[:, c]]
        vals = sorted(set(column))
        for lo, hi in zip(vals, vals[1:]):
            weights.append(hi - lo)
            cols.append([1 if x >= hi else 0 for x in column])
    bits = np.array(cols, dtype=np.uint8).T if cols else np.zeros((P.n, 0), dtype=np.uint8)
    return weights, bits


def l1_snowflake_to_l2(P: PointSet) -> PointSet:
    """Map an l_1 point set into l_2 so squared l_2 distances equal l_1 distances."""
    weights, bits = snowflake_indicators(P)
    scale = np.sqrt(np.array([float(w) for w in weights], dtype=float))
    return PointSet(bits.astype(float) * scale[None, :], p=2.0)


def jl_scheme_id(p: float, eps: float, c_jl: float, seed: int, n: int) -> str:
    norm = "l1" if p == 1.0 else "l2"
    return f"jl-{norm}/eps={eps!r}/c={c_jl!r}/seed={seed}/n={n}"


def jl_layered_labels(P: PointSet, order: PriorityOrdering, eps: float, seed: int,
                      c_jl: float = C_JL) -> LabelSet:
    """Prioritized (1+eps)-labels of size O(eps^-2 log j) for l_2 / l_1 inputs.

    Every layer uses a plain Gaussian JL map applied to all points, so the
    guarantee for pairs outside the layer's terminal set is empirical.
    """
    if not (0 < eps < 1):
        raise BadEpsilon(f"eps must lie in (0, 1), got {eps}")
    if P.p not in (1.0, 2.0):
        raise UnsupportedNorm(f"JL labels support p in {{1, 2}}, got p={P.p}")
    order.check_covers(range(P.n))
    X = l1_snowflake_to_l2(P).points if P.p == 1.0 else P.points.astype(float)
    n = P.n
    top = layer_index(max(n, 1))
    inner = jl_layer_eps(eps, P.p)
    maps = [draw_layer_map(i, X.shape[1], layer_size(i, n), inner, seed, c_jl) for i in range(top + 1)]
    images = [m.apply(X) for m in maps]
    scheme = jl_scheme_id(P.p, eps, c_jl, seed, n)
    labels = []
    for j, x in enumerate(order.perm, start=1):
        L = layer_index(j)
        parts = [images[i][x] for i in range(L + 1)]
        payload = tuple(float(v) for part in parts for v in part)
        labels.append(Label(j, payload, scheme, point=x, blocks=tuple(len(p) for p in parts)))
    meta = {
        "n": n,
        "p": P.p,
        "eps": eps,
        "layer_eps": inner,
        "c_jl": c_jl,
        "seed": seed,
        "prng": PRNG_NAME,
        "layer_dims": [m.target_dim for m in maps],
        "word_constant": jl_word_constant(c_jl),
        "squared": P.p == 1.0,
        "note": "per-layer Gaussian JL on all points; pairs beyond S_i x S_i hold empirically",
    }
    return LabelSet(tuple(labels), scheme, meta)


def _layer_vector(lab: Label, layer: int) -> np.ndarray:
    if layer >= len(lab.blocks):
        raise SchemeMismatch(f"label of rank {lab.rank} lacks layer {layer}")
    start = sum(lab.blocks[:layer])
    stop = start + lab.blocks[layer]
    if stop > len(lab.payload):
        raise SchemeMismatch(f"label of rank {lab.rank} is truncated")
    return np.asarray(lab.payload[start:stop], dtype=float)


def jl_query(la: Label, lb: Label) -> float:
    if la.scheme != lb.scheme or not la.scheme.startswith("jl-"):
        raise SchemeMismatch(f"jl decoder got {la.scheme!r} and {lb.scheme!r}")
    j = min(la.rank, lb.rank)
    layer = layer_index(j)
    va, vb = _layer_vector(la, layer), _layer_vector(lb, layer)
    if va.shape != vb.shape:
        raise SchemeMismatch("layer vectors differ in length")
    dist = float(np.linalg.norm(va - vb))
    return dist * dist if la.scheme.startswith("jl-l1") else dist
