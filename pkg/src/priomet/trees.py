"""Exact isometric embeddings of weighted trees into l_infinity.

Three constructions, all in rational arithmetic:

* :func:`llr_tree_embedding` -- the classic separator recursion, O(log n) columns.
* :func:`terminal_embed` -- terminal folding: O(log k) columns ``f`` plus a
  1-Lipschitz map ``g`` into a folded tree where all terminals coincide, such
  that ``max(|f(x)-f(y)|_inf, d_folded(g(x), g(y))) == d(x, y)`` for all pairs.
* :func:`prioritized_tree_embedding` -- terminal folding iterated over the
  priority prefixes of size ``2**(2**i)``; isometric with O(log j) columns
  for the rank-``j`` point.

Trees are handled internally as adjacency maps ``{v: {u: Fraction}}`` with
integer vertex ids.  New vertices (path midpoints, leaf dummies) draw ids from
a shared counter so that pieces built in separate recursion branches never
clash when glued back together.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EmptyTerminals, InvalidTree, NoSeparator, SameVertex
from .metric import (
    EmbeddingMatrix,
    PriorityOrdering,
    WeightedTree,
    tree_distances,
    tree_hops,
    tree_path,
)

# Width constant of the terminal lemma: width(k) <= ceil(A_TERMINAL * log2 k).
A_TERMINAL = 2 / math.log2(1.5)

ZERO = Fraction(0)


def terminal_width_bound(k: int) -> int:
    return math.ceil(A_TERMINAL * math.log2(k)) if k > 1 else 0


# ---------------------------------------------------------------------------
# small adjacency helpers
# ---------------------------------------------------------------------------


def _copy(adj):
    return {v: dict(nb) for v, nb in adj.items()}


def _add_edge(adj, u, v, w):
    adj.setdefault(u, {})[v] = w
    adj.setdefault(v, {})[u] = w


def _induced(adj, keep: set):
    return {v: {u: w for u, w in adj[v].items() if u in keep} for v in keep}


def _components_without(adj, s):
    """Vertex sets of the components of ``adj - s``, one per neighbour of ``s``."""
    comps = []
    for nb in sorted(adj[s]):
        seen = {nb}
        stack = [nb]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y != s and y not in seen:
                    seen.add(y)
                    stack.append(y)
        comps.append(seen)
    return comps


def _contract_zero_edges(adj):
    """Merge the endpoints of every zero-weight edge.

    Returns the contracted tree and the map old vertex -> representative
    (smallest id of its zero-weight component).
    """
    rep = {}
    for v in sorted(adj):
        if v in rep:
            continue
        rep[v] = v
        stack = [v]
        while stack:
            x = stack.pop()
            for y, w in adj[x].items():
                if w == 0 and y not in rep:
                    rep[y] = v
                    stack.append(y)
    out = {r: {} for r in set(rep.values())}
    for u, nb in adj.items():
        for v, w in nb.items():
            if rep[u] != rep[v]:
                out[rep[u]][rep[v]] = w
    return out, rep


def _best_partition(weights: list[int], total: int) -> tuple[int, list[int]]:
    """Split component weights into two groups minimising the heavier group.

    Returns ``(heavier, group1_indices)``.  Subset-sum over achievable totals.
    """
    reach = {0: None}
    for idx, w in enumerate(weights):
        for s in list(reach):
            if s + w not in reach:
                reach[s + w] = (s, idx)
    best = min(reach, key=lambda s: (max(s, total - s), -s))
    group = []
    s = best
    while reach[s] is not None:
        prev, idx = reach[s]
        group.append(idx)
        s = prev
    return max(best, total - best), sorted(group)


# ---------------------------------------------------------------------------
# separators
# ---------------------------------------------------------------------------


def _rooted(adj, root):
    order = [root]
    parent = {root: None}
    for x in order:
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                order.append(y)
    return order, parent


def _terminal_eccentricity(adj, terminals):
    """Hop distance from every vertex to its farthest terminal."""
    t0 = min(terminals)
    h0 = tree_hops(adj, t0)
    a = max(terminals, key=lambda t: (h0[t], -t))
    ha = tree_hops(adj, a)
    b = max(terminals, key=lambda t: (ha[t], -t))
    hb = tree_hops(adj, b)
    return {v: max(ha[v], hb[v]) for v in adj}


def _separator(adj, weight: set | None):
    """Balanced split vertex.

    With ``weight`` a terminal set, only non-terminals are candidates and each
    component of ``adj - s`` weighs its terminal count; with ``weight=None``
    every vertex counts (classic vertex separator).  Candidates are ranked by
    the heavier side, then by hop eccentricity to the weighted vertices, then
    by id.  Returns ``(s, side1, side2, heavier)``.
    """
    verts = sorted(adj)
    marked = set(verts) if weight is None else weight
    total = len(marked)
    order, parent = _rooted(adj, verts[0])
    sub = {}
    for x in reversed(order):
        sub[x] = (1 if x in marked else 0) + sum(sub[y] for y in adj[x] if parent.get(y) == x)
    cands = []
    for v in verts:
        if weight is not None and v in weight:
            continue
        own = 1 if v in marked else 0
        comp_w = [sub[y] for y in adj[v] if parent.get(y) == v]
        if parent[v] is not None:
            comp_w.append(total - sub[v])
        cands.append((max(comp_w, default=0), v, own, comp_w))
    if not cands:
        raise NoSeparator("no non-terminal vertex available")
    # the heavier side is never lighter than the largest component
    cands.sort()
    scored = []
    best = math.inf
    for biggest, v, own, comp_w in cands:
        if biggest > best:
            break
        heavy, _ = _best_partition(comp_w, total - own)
        best = min(best, heavy)
        scored.append((heavy, v))
    top = min(h for h, _ in scored)
    tied = [v for h, v in scored if h == top]
    if len(tied) > 1:
        ecc = _terminal_eccentricity(adj, marked)
        tied.sort(key=lambda v: (ecc[v], v))
    s = tied[0]
    comps = _components_without(adj, s)
    comp_w = [len(c & marked) for c in comps]
    heavy, group = _best_partition(comp_w, total - (1 if s in marked else 0))
    side1 = {s}.union(*[comps[i] for i in group]) if group else {s}
    side2 = {s}.union(*[comps[i] for i in range(len(comps)) if i not in group])
    return s, side1, side2, heavy


@dataclass
class Separation:
    s: int
    T1: WeightedTree
    T2: WeightedTree
    terminals1: frozenset
    terminals2: frozenset


def tree_separator(T: WeightedTree, K) -> Separation:
    """Split ``T`` at a non-terminal vertex so each side holds <= ceil(2k/3) terminals.

    Terminals must be leaves.  Every subtree hanging at ``s`` goes wholly to
    one side; both sides contain ``s``.
    """
    K = frozenset(K)
    if len(K) < 2:
        raise NoSeparator("a separator needs at least two terminals")
    if not K <= set(T.vertices):
        raise InvalidTree("terminals must be tree vertices")
    adj = T._adj
    if any(len(adj[t]) > 1 for t in K):
        raise InvalidTree("terminals must be leaves (see leafify_terminals)")
    s, side1, side2, heavy = _separator(adj, set(K))
    if heavy > math.ceil(2 * len(K) / 3):
        raise NoSeparator(f"best split leaves {heavy} of {len(K)} terminals on one side")
    T1 = WeightedTree._from_adj(_induced(adj, side1))
    T2 = WeightedTree._from_adj(_induced(adj, side2))
    return Separation(s, T1, T2, K & frozenset(side1), K & frozenset(side2))


# ---------------------------------------------------------------------------
# leafification and folding
# ---------------------------------------------------------------------------


def _leafify(adj, K, fresh):
    adj = _copy(adj)
    new_k = []
    dummy_of = {}
    for t in sorted(K):
        if len(adj[t]) > 1:
            d = next(fresh)
            _add_edge(adj, t, d, ZERO)
            dummy_of[t] = d
            new_k.append(d)
        else:
            new_k.append(t)
    return adj, new_k, dummy_of


def _fresh_after(adj):
    return itertools.count(max(adj) + 1)


def leafify_terminals(T: WeightedTree, K) -> tuple[WeightedTree, list[int], dict]:
    """Hang a weight-0 dummy leaf under every non-leaf terminal.

    Returns ``(T', K', dummy_of)``; distances among the original vertices are
    unchanged and every vertex of ``K'`` is a leaf of ``T'``.
    """
    adj, new_k, dummy_of = _leafify(T._adj, set(K), _fresh_after(T._adj))
    return WeightedTree._from_adj(adj, T.names), new_k, dummy_of


def _fold(adj, t1, t2, fresh):
    """Fold the ``t1``-``t2`` path around its midpoint.

    Returns ``(adj_c, f, folded, g, c)``: the tree with the midpoint ``c``
    inserted, the signed distance-to-``c`` coordinate, the folded tree, and the
    vertex map into it (defined on every vertex of ``adj_c``).
    """
    if t1 == t2:
        raise SameVertex(f"fold needs two distinct terminals, got {t1} twice")
    adj = _copy(adj)
    path = tree_path(adj, t1, t2)
    pos = [ZERO]
    for a, b in zip(path, path[1:]):
        pos.append(pos[-1] + adj[a][b])
    half = pos[-1] / 2
    hit = [k for k, p in enumerate(pos) if p == half]
    if hit:
        c = path[hit[0]]
        ci = hit[0]
    else:
        k = max(i for i, p in enumerate(pos) if p < half)
        a, b = path[k], path[k + 1]
        c = next(fresh)
        del adj[a][b], adj[b][a]
        _add_edge(adj, a, c, half - pos[k])
        _add_edge(adj, c, b, pos[k + 1] - half)
        path.insert(k + 1, c)
        pos.insert(k + 1, half)
        ci = k + 1
    dc = tree_distances(adj, c)
    # side 2: the component of adj - c that contains t2; everything else is side 1
    side2 = set()
    if t2 != c:
        nb2 = path[ci + 1]
        side2 = {nb2}
        stack = [nb2]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y != c and y not in side2:
                    side2.add(y)
                    stack.append(y)
    f = {v: (-dc[v] if v in side2 else dc[v]) for v in adj}
    half1 = path[ci::-1]
    half2 = path[ci:]
    rep = {}
    for v in itertools.chain(half1, half2):
        rep.setdefault(dc[v], v)
    on_path = set(path)
    g = {v: (rep[dc[v]] if v in on_path else v) for v in adj}
    path_edges = {frozenset(e) for e in zip(path, path[1:])}
    folded = {}
    for v in adj:
        if v not in on_path or rep[dc[v]] == v:
            folded[v] = {}
    for u, nb in adj.items():
        for v, w in nb.items():
            if frozenset((u, v)) in path_edges:
                continue
            folded[g[u]][g[v]] = w
    radii = sorted(rep)
    for r0, r1 in zip(radii, radii[1:]):
        _add_edge(folded, rep[r0], rep[r1], r1 - r0)
    return adj, f, folded, g, c


@dataclass
class FoldMap:
    """Vertex map ``g`` from ``source`` into ``target`` (1-Lipschitz)."""

    source: WeightedTree
    target: WeightedTree
    g: dict

    def __call__(self, v):
        return self.g[v]


@dataclass
class FoldResult:
    tree: WeightedTree  # input tree with the midpoint inserted
    f: dict
    fold: FoldMap
    c: int
    auxiliary: bool  # True when c was created by subdividing an edge


def fold_two_terminals(T: WeightedTree, t1: int, t2: int) -> FoldResult:
    """Signed-distance coordinate around the ``t1``-``t2`` midpoint plus the folded tree."""
    if t1 not in T or t2 not in T:
        raise InvalidTree("fold terminals must be tree vertices")
    adj_c, f, folded, g, c = _fold(T._adj, t1, t2, _fresh_after(T._adj))
    src = WeightedTree._from_adj(adj_c, T.names)
    return FoldResult(src, f, FoldMap(src, WeightedTree._from_adj(folded), g), c, c not in T)


# ---------------------------------------------------------------------------
# terminal lemma
# ---------------------------------------------------------------------------


@dataclass
class _Piece:
    F: dict  # vertex -> tuple of Fractions (all vertices of the input adjacency)
    width: int
    tree: dict  # folded tree adjacency
    g: dict  # input vertex -> folded-tree vertex
    hub: int  # the folded-tree vertex all terminals map to
    trace: list = field(default_factory=list)


def _embed_leaves(adj, K: list, fresh) -> _Piece:
    """Terminal lemma on a tree whose terminals are all leaves."""
    k = len(K)
    if k == 1:
        return _Piece({v: () for v in adj}, 0, adj, {v: v for v in adj}, K[0])
    if k == 2:
        t1, t2 = sorted(K)
        _, f, folded, g, _ = _fold(adj, t1, t2, fresh)
        F = {v: (f[v],) for v in adj}
        return _Piece(F, 1, folded, {v: g[v] for v in adj}, g[t1], [(2, 1, 1, 1)])
    s, side1, side2, _ = _separator(adj, set(K))
    h = tree_distances(adj, s)
    K1 = [t for t in K if t in side1]
    K2 = [t for t in K if t in side2]
    p1 = _embed_leaves(_induced(adj, side1), K1, fresh)
    p2 = _embed_leaves(_induced(adj, side2), K2, fresh)
    w = max(p1.width, p2.width)
    F_til = {}
    for piece, side, sign in ((p1, side1, 1), (p2, side2, -1)):
        base = piece.F[s]
        pad = (ZERO,) * (w - piece.width)
        for v in side:
            row = tuple(a - b for a, b in zip(piece.F[v], base)) + pad
            F_til[v] = row + (sign * h[v] if v != s else ZERO,)
    # glue the two folded trees at the images of s
    a, b = p1.g[s], p2.g[s]
    rename = {b: a}
    t2 = {rename.get(v, v): {rename.get(u, u): wt for u, wt in nb.items()} for v, nb in p2.tree.items()}
    shared = set(p1.tree) & set(t2)
    if shared != {a}:
        raise AssertionError(f"folded trees overlap outside the glue vertex: {sorted(shared)}")
    glued = _copy(p1.tree)
    for v, nb in t2.items():
        glued.setdefault(v, {}).update(nb)
    g_til = {v: p1.g[v] for v in side1}
    g_til.update({v: rename.get(p2.g[v], p2.g[v]) for v in side2 if v != s})
    hub1, hub2 = p1.hub, rename.get(p2.hub, p2.hub)
    trace = [(k, len(K1), len(K2), None)] + p1.trace + p2.trace
    if hub1 == hub2:
        F = F_til
        width = w + 1
        tree, g, hub = glued, g_til, hub1
    else:
        _, fh, tree, gh, _ = _fold(glued, hub1, hub2, fresh)
        F = {v: F_til[v] + (fh[g_til[v]],) for v in adj}
        g = {v: gh[g_til[v]] for v in adj}
        hub = gh[hub1]
        width = w + 2
    trace[0] = (k, len(K1), len(K2), width)
    return _Piece(F, width, tree, g, hub, trace)


def _terminal_embed_adj(adj, K, fresh) -> _Piece:
    """Terminal lemma for arbitrary terminals; results restricted to ``adj``'s vertices."""
    K = set(K)
    if not K:
        raise EmptyTerminals("terminal set is empty")
    if len(K) == 1:
        (t,) = K
        return _Piece({v: () for v in adj}, 0, _copy(adj), {v: v for v in adj}, t)
    work, leaves, _ = _leafify(adj, K, fresh)
    piece = _embed_leaves(work, sorted(leaves), fresh)
    tree, rep = _contract_zero_edges(piece.tree)
    g = {v: rep[piece.g[v]] for v in adj}
    F = {v: piece.F[v] for v in adj}
    return _Piece(F, piece.width, tree, g, rep[piece.hub], piece.trace)


@dataclass
class TerminalEmbedding:
    """Output of the terminal lemma.

    ``F`` has one row per vertex of the input tree (``F.row_ids``), ``fold`` maps
    those vertices into the folded tree, and ``trace`` records each recursion
    node as ``(k, k1, k2, width)``.
    """

    F: EmbeddingMatrix
    fold: FoldMap
    terminals: frozenset
    width: int
    trace: list

    @property
    def hub(self):
        return self.fold.g[next(iter(self.terminals))]


def terminal_embed(T: WeightedTree, K) -> TerminalEmbedding:
    """Embed ``T`` so terminal pairs and all other pairs are preserved by ``max(F, folded tree)``."""
    K = frozenset(K)
    if not K:
        raise EmptyTerminals("terminal set is empty")
    if not K <= set(T.vertices):
        raise InvalidTree("terminals must be tree vertices")
    piece = _terminal_embed_adj(T._adj, K, _fresh_after(T._adj))
    verts = T.vertices
    vals = np.empty((len(verts), piece.width), dtype=object)
    for i, v in enumerate(verts):
        vals[i, :] = piece.F[v]
    F = EmbeddingMatrix(vals, True, verts, ({"kind": "terminal", "k": len(K), "width": piece.width},))
    fold = FoldMap(T, WeightedTree._from_adj(piece.tree), piece.g)
    return TerminalEmbedding(F, fold, K, piece.width, piece.trace)


# ---------------------------------------------------------------------------
# prioritized embedding
# ---------------------------------------------------------------------------


def tree_layer_count(n: int) -> int:
    """Number of terminal layers: ``max(1, ceil(log2 log2 n))``."""
    i = 1
    while 2 ** (2**i) < n:
        i += 1
    return i


def prioritized_tree_embedding(T: WeightedTree, order: PriorityOrdering) -> EmbeddingMatrix:
    """Exactly isometric embedding with O(log j) support for the rank-``j`` vertex.

    Layer ``i`` runs the terminal lemma on the current folded tree with
    terminals the images of the first ``min(n, 2**(2**i))`` vertices, translated
    so the previous layer's hub sits at the origin.  After the last layer every
    vertex folds onto one point, so the concatenated blocks alone are isometric.
    """
    order.check_covers(T.vertices)
    verts = T.vertices
    n = len(verts)
    fresh = _fresh_after(T._adj)
    cur = T._adj
    G = {v: v for v in verts}
    anchor = order.point(1)
    blocks = []
    cols = []
    start = 1
    for i in range(1, tree_layer_count(n) + 1):
        size = min(n, 2 ** (2**i))
        terms = {G[x] for x in order.prefix(size)}
        piece = _terminal_embed_adj(cur, terms, fresh)
        base = piece.F[anchor]
        block = [tuple(a - b for a, b in zip(piece.F[G[v]], base)) for v in verts]
        cols.append(block)
        blocks.append({"kind": "tree-layer", "layer": i, "terminals": size,
                       "start": start, "stop": start + piece.width - 1, "width": piece.width})
        start += piece.width
        G = {v: piece.g[G[v]] for v in verts}
        anchor = piece.hub
        cur = piece.tree
    width = start - 1
    vals = np.empty((n, width), dtype=object)
    for r, v in enumerate(verts):
        vals[r, :] = tuple(itertools.chain.from_iterable(block[r] for block in cols))
    return EmbeddingMatrix(vals, True, verts, tuple(blocks))


# ---------------------------------------------------------------------------
# classic separator embedding
# ---------------------------------------------------------------------------


def _llr(adj) -> tuple[dict, int]:
    verts = list(adj)
    if len(verts) == 1:
        return {verts[0]: ()}, 0
    if len(verts) == 2:
        u, v = sorted(verts)
        return {u: (ZERO,), v: (adj[u][v],)}, 1
    s, side1, side2, _ = _separator(adj, None)
    h = tree_distances(adj, s)
    parts = []
    for side in (side1, side2):
        parts.append(_llr(_induced(adj, side)) if len(side) > 1 else ({s: ()}, 0))
    w = max(p[1] for p in parts)
    F = {}
    for (Fi, wi), side, sign in zip(parts, (side1, side2), (1, -1)):
        base = Fi[s]
        pad = (ZERO,) * (w - wi)
        for v in side:
            F[v] = tuple(a - b for a, b in zip(Fi[v], base)) + pad + ((sign * h[v]) if v != s else ZERO,)
    return F, w + 1


def llr_tree_embedding(T: WeightedTree) -> EmbeddingMatrix:
    """Classic isometric separator embedding of a tree into l_inf^{O(log n)}."""
    F, width = _llr(T._adj)
    verts = T.vertices
    vals = np.empty((len(verts), width), dtype=object)
    for i, v in enumerate(verts):
        vals[i, :] = F[v]
    return EmbeddingMatrix(vals, True, verts, ({"kind": "llr", "width": width},))
