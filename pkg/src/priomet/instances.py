"""Generators for the lower-bound instances and their companion constructions.

Each generator re-checks its advertised properties with the auditor (or a
direct recomputation) before returning, and records the outcome in the
instance's ``properties`` dict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .audit import audit_distortion, coordinate_satisfaction
from .errors import BadParameter, RetriesExhausted
from .general import hstack, sign_code_embedding, uniform_clique_embedding
from .metric import (
    EmbeddingMatrix,
    MetricSpace,
    PointSet,
    PriorityOrdering,
    metric_from_graph,
    metric_from_points,
)

MAX_CUBE_DIM = 24


@dataclass
class HardInstance:
    kind: str
    metric: MetricSpace | None = None
    points: PointSet | None = None
    structure: dict = field(default_factory=dict)
    ordering: PriorityOrdering | None = None
    properties: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return all(v for k, v in self.properties.items() if isinstance(v, bool))


def _check(inst: HardInstance) -> HardInstance:
    failed = [k for k, v in inst.properties.items() if v is False]
    if failed:
        raise AssertionError(f"{inst.kind} instance failed its own checks: {failed}")
    return inst


# ---------------------------------------------------------------------------
# cycles
# ---------------------------------------------------------------------------


def cycle_instance(n: int) -> HardInstance:
    """The unit cycle ``C_{2n}`` with its ``n`` antipodal pairs.

    The ordering puts ``v_n`` and ``v_{n+1}`` first.
    """
    if n < 2:
        raise BadParameter("cycle instance needs n >= 2")
    m = 2 * n
    M = metric_from_graph([(i, (i + 1) % m, 1) for i in range(m)], m)
    pairs = [(i, i + n) for i in range(n)]
    rest = [v for v in range(m) if v not in (n, (n + 1) % m)]
    order = PriorityOrdering((n, (n + 1) % m, *rest))
    props = {
        "antipodal_pairs": len(pairs),
        "diameter": M.dist.max(),
        "antipodal_at_diameter": all(M.dist[a, b] == n for a, b in pairs),
        "diameter_is_n": M.dist.max() == n,
    }
    inst = HardInstance("cycle", M, structure={"n": n, "antipodal_pairs": pairs}, ordering=order,
                        properties=props, params={"n": n})
    return _check(inst)


def cycle_optimal_embedding(n: int) -> EmbeddingMatrix:
    """Isometric embedding of ``C_{2n}`` into exactly ``n`` columns.

    Column ``i`` is the cycle distance to ``v_i`` with sign ``(-1)**i``,
    shifted so that ``v_0`` sits at the origin; it realises the antipodal pair
    ``{v_i, v_{i+n}}``.
    """
    if n < 2:
        raise BadParameter("cycle embedding needs n >= 2")
    m = 2 * n
    dist = lambda a, b: min((a - b) % m, (b - a) % m)  # noqa: E731
    vals = np.empty((m, n), dtype=object)
    for i in range(n):
        sign = 1 if i % 2 == 0 else -1
        for v in range(m):
            vals[v, i] = Fraction(sign * (dist(v, i) - dist(0, i)))
    F = EmbeddingMatrix(vals, True, blocks=({"kind": "cycle-optimal", "n": n},))
    rep = audit_distortion(cycle_instance(n).metric, F)
    if not (rep.passed and rep.stats["expansion"] == 1 and rep.stats["contraction"] == 1):
        raise AssertionError("cycle embedding failed its isometry audit")
    return F


# ---------------------------------------------------------------------------
# antipodal basis
# ---------------------------------------------------------------------------


def antipodal_basis(n: int, p: float = 2.0) -> HardInstance:
    """``{e_1, -e_1, ..., e_n, -e_n}`` in l_p; point ``2i`` is ``e_i``, ``2i+1`` is ``-e_i``."""
    if n < 1 or not p >= 1:
        raise BadParameter("antipodal basis needs n >= 1 and p >= 1")
    pts = np.zeros((2 * n, n), dtype=int)
    for i in range(n):
        pts[2 * i, i] = 1
        pts[2 * i + 1, i] = -1
    P = PointSet(pts, float(p))
    M = metric_from_points(P)
    pairs = [(2 * i, 2 * i + 1) for i in range(n)]
    cross = 2.0 ** (1 / p) if p != math.inf else 1.0
    props = {"pair_distance_2": all(float(M.dist[a, b]) == 2.0 for a, b in pairs)}
    if n > 1:
        measured = float(M.dist[0, 3])
        props["cross_distance"] = measured
        props["cross_matches"] = math.isclose(measured, cross, rel_tol=1e-12)
    inst = HardInstance("antipodal", M, P, {"antipodal_pairs": pairs, "cross_distance": cross, "p": p},
                        properties=props, params={"n": n, "p": p})
    return _check(inst)


# ---------------------------------------------------------------------------
# hypercube code and padded prefix set
# ---------------------------------------------------------------------------


def _cube_points(idx: np.ndarray, n: int) -> np.ndarray:
    """Index -> {+-1}^n with coordinate 0 as the most significant bit (bit 1 = +1)."""
    shifts = np.arange(n - 1, -1, -1)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return (2 * bits - 1).astype(int)


def _popcount_table(n: int) -> np.ndarray:
    table = np.zeros(1 << n, dtype=np.uint8)
    for b in range(n):
        table += ((np.arange(1 << n) >> b) & 1).astype(np.uint8)
    return table


def code_threshold(n: int, eps) -> tuple[Fraction, int]:
    eps_p = 3 * Fraction(eps)
    return eps_p, math.floor(eps_p * n)


def hypercube_code(n: int, eps) -> HardInstance:
    """Symmetric greedy code in ``{+-1}^n`` with pairwise Hamming distance ``> 3*eps*n``.

    Picks the lexicographically smallest surviving point ``x`` (with -1 < +1),
    adds ``x`` and ``-x``, and deletes every point within Hamming distance
    ``floor(3*eps*n)`` of either.
    """
    eps = Fraction(eps) if not isinstance(eps, float) else Fraction(eps).limit_denominator(10**9)
    if not (0 < eps < Fraction(1, 6)):
        raise BadParameter(f"eps must lie in (0, 1/6), got {eps}")
    if not (2 <= n <= MAX_CUBE_DIM):
        raise BadParameter(f"hypercube code needs 2 <= n <= {MAX_CUBE_DIM}")
    eps_p, radius = code_threshold(n, eps)
    full = (1 << n) - 1
    pop = _popcount_table(n)
    alive = np.ones(1 << n, dtype=bool)
    idx = np.arange(1 << n)
    chosen = []
    while True:
        live = np.flatnonzero(alive)
        if live.size == 0:
            break
        x = int(live[0])
        chosen.extend([x, full ^ x])
        alive &= pop[idx ^ x] > radius
        alive &= pop[idx ^ (full ^ x)] > radius
    code = np.array(chosen, dtype=np.int64)
    pts = _cube_points(code, n)
    bound = Fraction(2**n, 2 * math.comb(n, radius))
    # exhaustive recheck of separation and symmetry
    dmin = n
    for a in range(len(code)):
        dmin = min(dmin, int(pop[code[a] ^ code[a + 1:]].min())) if a + 1 < len(code) else dmin
    keys = set(code.tolist())
    props = {
        "size": len(code),
        "size_bound": bound,
        "meets_size_bound": len(code) >= bound,
        "symmetric": all((full ^ c) in keys for c in keys),
        "min_hamming": dmin,
        "separated": dmin > eps_p * n,
        "antipodal_l2": math.sqrt(4 * n),
    }
    pairs = [(2 * i, 2 * i + 1) for i in range(len(code) // 2)]
    inst = HardInstance("hypercube-code", None, PointSet(pts, 2.0),
                        {"antipodal_pairs": pairs, "radius": radius, "eps_prime": eps_p},
                        properties=props, params={"n": n, "eps": eps})
    return _check(inst)


def padded_prefix_set(n: int, eps_prime) -> HardInstance:
    """All sign patterns on the first ``floor(eps'*n)`` coordinates, zero elsewhere."""
    eps_prime = Fraction(eps_prime) if not isinstance(eps_prime, float) else \
        Fraction(eps_prime).limit_denominator(10**9)
    if not (0 < eps_prime < 1) or n < 1:
        raise BadParameter("padded prefix set needs n >= 1 and 0 < eps' < 1")
    k = math.floor(eps_prime * n)
    idx = np.arange(1 << k)
    pts = np.zeros((1 << k, n), dtype=int)
    if k:
        pts[:, :k] = _cube_points(idx, k)
    props = {"size": len(pts), "size_is_2^k": len(pts) == 2**k, "prefix_length": k,
             "unrounded_length": eps_prime * n}
    return _check(HardInstance("padded-prefix", None, PointSet(pts, 2.0), {"prefix_length": k},
                               properties=props, params={"n": n, "eps_prime": eps_prime}))


def prefix_match(x: np.ndarray, k: int) -> np.ndarray:
    """The point of the padded prefix set agreeing with ``x`` on the first ``k`` coordinates."""
    y = np.zeros_like(x)
    y[:k] = x[:k]
    return y


def code_with_prefix(n: int, eps) -> HardInstance:
    """Padded prefix set ``Y`` followed by the code ``A``, with ``Y`` ranked first.

    Reports the triangle chain ``2(1+eps)sqrt((1-eps')n) < sqrt(4n)`` that stops
    a coordinate vanishing on ``Y`` from satisfying any antipodal pair of ``A``.
    """
    code = hypercube_code(n, eps)
    eps_f = Fraction(code.params["eps"])
    eps_p = code.structure["eps_prime"]
    Y = padded_prefix_set(n, eps_p)
    k = Y.structure["prefix_length"]
    A = code.points.points
    pts = np.vstack([Y.points.points, A])
    ny = len(Y.points.points)
    chain_lhs = 2 * (1 + float(eps_f)) * math.sqrt((1 - k / n) * n)
    chain_rhs = math.sqrt(4 * n)
    # direct recomputation: |x - y| + |(-x) - (-y)| for the prefix match y of x
    worst_pair_sum = 0.0
    for x in A:
        y = prefix_match(x, k)
        worst_pair_sum = max(worst_pair_sum, 2 * float(np.linalg.norm(x - y)))
    # |Y|^(1/(6 eps)) against 2^(n/2); equal only when 3*eps*n is integral
    prefix_power = float(ny) ** (1 / (6 * float(eps_f)))
    props = {
        "Y_size": ny,
        "A_size": len(A),
        "chain_lhs": chain_lhs,
        "chain_rhs": chain_rhs,
        "chain_holds": chain_lhs < chain_rhs,
        "pair_sum_matches": math.isclose(worst_pair_sum, 2 * math.sqrt((1 - k / n) * n)),
        "prefix_power": prefix_power,
        "half_cube": 2.0 ** (n / 2),
    }
    pairs = [(ny + a, ny + b) for a, b in code.structure["antipodal_pairs"]]
    order = PriorityOrdering(tuple(range(len(pts))))
    inst = HardInstance("code-with-prefix", None, PointSet(pts, 2.0),
                        {"antipodal_pairs": pairs, "Y": list(range(ny)), "prefix_length": k},
                        ordering=order, properties=props, params={"n": n, "eps": eps_f})
    return inst


# ---------------------------------------------------------------------------
# bipartite hard family
# ---------------------------------------------------------------------------


def bipartite_failure_bound(n: int) -> float:
    """Union bound on failing properties (1) or (2) for one uniform sample."""
    return 2 * math.comb(n, 2) * 0.75**n + 2 * n * 0.5**n


def random_bipartite_hard(n: int, seed: int, max_retries: int = 1000) -> HardInstance:
    """Random bipartite ``G`` on ``L+R`` (``|L| = |R| = n``) plus apexes ``l``, ``r``.

    ``L = 0..n-1``, ``R = n..2n-1``, ``l = 2n`` (adjacent to all of ``R``),
    ``r = 2n+1`` (adjacent to all of ``L``).  Samples until every same-side
    pair has distance 2 and nothing is isolated.
    """
    if n < 4:
        raise BadParameter("bipartite instance needs n >= 4")
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_retries + 1):
        adjm = rng.random((n, n)) < 0.5  # adjm[a, b]: edge L_a - R_b
        if not (adjm.any(axis=1).all() and adjm.any(axis=0).all()):
            continue
        common_L = adjm.astype(int) @ adjm.T.astype(int)
        common_R = adjm.T.astype(int) @ adjm.astype(int)
        if (common_L == 0).any() or (common_R == 0).any():
            continue
        break
    else:
        raise RetriesExhausted(
            f"no valid sample in {max_retries} tries (failure bound {bipartite_failure_bound(n):.3g})")
    l, r = 2 * n, 2 * n + 1
    edges = [(a, n + b, 1) for a in range(n) for b in range(n) if adjm[a, b]]
    edges += [(l, n + b, 1) for b in range(n)] + [(r, a, 1) for a in range(n)]
    M = metric_from_graph(edges, 2 * n + 2)
    D = M.dist
    L, R = list(range(n)), list(range(n, 2 * n))
    A = {1: [], 2: [], 3: []}
    for u in range(2 * n + 2):
        for v in range(u + 1, 2 * n + 2):
            A[int(D[u, v])].append((u, v))
    rest = [v for v in range(2 * n + 2) if v not in (l, r)]
    props = {
        "same_side_distance_2": all(D[u, v] == 2 for side in (L, R) for u in side for v in side if u < v),
        "no_isolated": bool(adjm.any(axis=1).all() and adjm.any(axis=0).all()),
        "cross_in_1_3": all(D[u, v] in (1, 3) for u in L for v in R),
        "apex_adjacent": all(min(D[v, l], D[v, r]) == 1 for v in range(2 * n)),
        "distances_in_1_2_3": set(int(x) for x in D[np.triu_indices(2 * n + 2, 1)]) <= {1, 2, 3},
        "attempts": attempt,
        "failure_bound": bipartite_failure_bound(n),
    }
    structure = {"L": L, "R": R, "apex": [l, r], "A1": A[1], "A2": A[2], "A3": A[3],
                 "edges": [[u, v] for u, v, _ in edges]}
    inst = HardInstance("bipartite", M, structure=structure,
                        ordering=PriorityOrdering((l, r, *rest)), properties=props,
                        params={"n": n, "seed": seed})
    return _check(inst)


def bipartite_A12_embedding(inst: HardInstance) -> EmbeddingMatrix:
    """O(log n) columns satisfying every distance-1 and distance-2 pair of ``G'``.

    Block (a): distinct 0/1 codes on all vertices (scale 1).  Block (b):
    distinct +-1 codes on ``L'`` with ``R'`` at 0, then the same with sides
    swapped; same-side pairs are at distance 2 and get a gap of 2.
    """
    st = inst.structure
    N = inst.metric.n
    l, r = st["apex"]
    Lp = st["L"] + [l]
    Rp = st["R"] + [r]
    clique = uniform_clique_embedding(N, 1)
    F = hstack(clique, sign_code_embedding(Lp, N, 1), sign_code_embedding(Rp, N, 1))
    sat = coordinate_satisfaction(inst.metric, F)
    A12 = set(map(tuple, st["A1"])) | set(map(tuple, st["A2"]))
    if any(p in A12 for p in sat.unsatisfied):
        raise AssertionError("helper embedding left a distance-1/2 pair unsatisfied")
    return EmbeddingMatrix(F.values, True, F.row_ids,
                           ({"kind": "A1-clique", "start": 1, "stop": clique.d},
                            {"kind": "A2-sign-codes", "start": clique.d + 1, "stop": F.d}))


def A12_width_bound(n: int) -> int:
    """Columns used by :func:`bipartite_A12_embedding` on ``2n+2`` vertices."""
    return math.ceil(math.log2(2 * n + 2)) + 2 * math.ceil(math.log2(n + 1))
