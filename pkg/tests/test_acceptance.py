"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is repeated in the terminal summary.
"""
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from priomet import _kernel as K
from priomet.audit import (
    antipodal_coordinate_check,
    audit_distortion,
    audit_labels,
    audit_prioritized_contractive,
    audit_prioritized_dimension,
    bipartite_certify,
    coordinate_satisfaction,
)
from priomet.general import chi, dimension_bound, hstack, meta_embedding, preset_beta
from priomet.instances import (
    A12_width_bound,
    antipodal_basis,
    bipartite_A12_embedding,
    code_with_prefix,
    cycle_instance,
    cycle_optimal_embedding,
    hypercube_code,
    padded_prefix_set,
    random_bipartite_hard,
)
from priomet.labeling import (
    exact_labels,
    exact_query,
    jl_layered_labels,
    jl_query,
    jl_word_bound,
    jl_word_constant,
    snowflake_indicators,
)
from priomet.metric import (
    EmbeddingMatrix,
    PriorityOrdering,
    metric_from_graph,
    metric_from_points,
    metric_from_tree,
)
from priomet.samples import gaussian_points, random_float_metric, random_graph_metric, random_tree, rational_points
from priomet.trees import A_TERMINAL, prioritized_tree_embedding, terminal_embed, terminal_width_bound

from conftest import floyd_warshall, linf

BETAS = {"2^i": preset_beta("exp", 1), "2^(2i)": preset_beta("exp", 2), "2^(2^i)": preset_beta("dexp")}


def test_c1_exact_labels(record):
    rng = np.random.default_rng(101)
    ok = True
    sizes = []
    for k in range(50):
        n = int(rng.integers(8, 129))
        M = random_graph_metric(n, 1000 + k)
        order = PriorityOrdering.random(n, k)
        L = exact_labels(M, order)
        rep = audit_labels(M, L, exact_query, t=1, lower=1, size_bound=lambda j: j)
        words = [lab.size_in_words for lab in L.labels]
        ok &= rep.passed and words == list(range(1, n + 1))
        sizes.append(n)
    record(1, ok, f"50 metrics, n in [{min(sizes)}, {max(sizes)}], exact answers and j-word labels")
    assert ok


def _meta_metrics():
    rng = np.random.default_rng(202)
    out = []
    for k in range(25):
        n = int(rng.integers(8, 257))
        out.append(random_float_metric(n, k) if k % 5 == 4 else random_graph_metric(n, 2000 + k))
    return out


@pytest.fixture(scope="module")
def meta_runs():
    runs = []
    for k, M in enumerate(_meta_metrics()):
        order = PriorityOrdering.random(M.n, 50 + k)
        for name, beta in BETAS.items():
            runs.append((name, beta, M, order, meta_embedding(M, order, beta)))
    return runs


def test_c2_meta_embedding(meta_runs, record):
    ok = True
    notes = set()
    for name, beta, M, order, F in meta_runs:
        prio = audit_prioritized_contractive(M, order, F, lambda j: 2 * chi(beta, j))
        dist = audit_distortion(M, F)
        dim = audit_prioritized_dimension(F, order, lambda j: dimension_bound(beta, j))
        ok &= prio.passed and dist.stats["expansion"] <= 1 + (0 if M.exact else 1e-9) and dim.passed
        if name == "2^i":
            ok &= audit_prioritized_dimension(F, order, lambda j: 2 * j).passed
        if name == "2^(2^i)":
            sq = audit_prioritized_dimension(F, order, lambda j: j * j)
            ranks = {w["rank"] for w in sq.witnesses}
            ok &= ranks <= {1}
            if ranks:
                notes.add("j^2 holds for j >= 2; rank 1 needs 4 columns (see strict xfail)")
    exact = sum(M.exact for _, _, M, _, _ in meta_runs) // 3
    record(2, ok, f"25 metrics ({exact} rational, {25 - exact} float) x 3 schedules; "
                  f"2*chi contraction, expansion <= 1, dimension beta(chi); " + "; ".join(sorted(notes)))
    assert ok


@pytest.mark.xfail(strict=True, reason="doubly-exponential schedule gives rank 1 four columns, not 1")
def test_c2_literal_square_bound_at_rank_one(meta_runs, record):
    ok = all(audit_prioritized_dimension(F, order, lambda j: j * j).passed
             for name, _, _, order, F in meta_runs if name == "2^(2^i)")
    record("2 (literal j^2 at j=1)", ok, "dimension <= j^2 for every rank including j=1")
    assert ok


@pytest.fixture(scope="module")
def tree_suite():
    rng = np.random.default_rng(303)
    shapes = ["random"] * 7 + ["path", "caterpillar", "random"]
    suite = []
    for k in range(100):
        n = int(rng.integers(2, 513)) if k % 10 else 512
        shape = shapes[k % 10]
        zero = 0.15 if k % 10 == 9 else 0.0
        T = random_tree(n, 3000 + k, zero_prob=zero, shape=shape)
        suite.append((T, metric_from_tree(T)))
    return suite


def _tree_ints(M, F, vertices):
    rows = [F.row_index(v) for v in vertices]
    (D, X), _ = K.to_common_ints(M.dist, F.values[rows])
    return D, X


def test_c3_prioritized_tree(tree_suite, record):
    ok = True
    c_tree = 0.0
    for k, (T, M) in enumerate(tree_suite):
        order = PriorityOrdering.random(T.vertices, k)
        F = prioritized_tree_embedding(T, order)
        D, X = _tree_ints(M, F, T.vertices)
        ok &= bool((K.pairwise_linf(X) == D).all())
        sup = F.supports()
        for j, x in enumerate(order.perm, start=1):
            if j > 1:
                c_tree = max(c_tree, int(sup[F.row_index(x)]) / math.log2(j + 1))
            else:
                ok &= int(sup[F.row_index(x)]) <= 3 * A_TERMINAL
    ok &= c_tree <= 3 * A_TERMINAL
    record(3, ok, f"100 trees n <= 512 exactly isometric; C_tree = {c_tree:.3f} <= 3a = {3 * A_TERMINAL:.3f}")
    assert ok


def test_c4_terminal_lemma(tree_suite, record):
    rng = np.random.default_rng(404)
    ok = True
    worst = 0.0
    for T, M in tree_suite:
        k = int(rng.integers(1, min(64, T.n) + 1))
        K_set = [int(v) for v in rng.choice(T.n, size=k, replace=False)]
        E = terminal_embed(T, K_set)
        Tf = E.fold.target
        folded = np.empty((T.n, T.n), dtype=object)
        for u in T.vertices:
            du = Tf.distances_from(E.fold(u))
            for v in T.vertices:
                folded[u, v] = du[E.fold(v)]
        rows = [E.F.row_index(v) for v in T.vertices]
        (D, X, DF), _ = K.to_common_ints(M.dist, E.F.values[rows], folded)
        emb = K.pairwise_linf(X)
        ok &= bool((emb <= D).all()) and bool((np.maximum(emb, DF) == D).all())
        ok &= len({E.fold(t) for t in K_set}) == 1
        ok &= E.width <= terminal_width_bound(k)
        if k > 1:
            worst = max(worst, E.width / math.log2(k))
    record(4, ok, f"100 terminal sets k <= 64: Lipschitz, max(F, fold) = d, one hub; "
                  f"max width/log2 k = {worst:.3f} (a = {A_TERMINAL:.3f})")
    assert ok


def test_c5_cycle(record):
    ok = True
    for n in range(2, 33):
        inst = cycle_instance(n)
        F = cycle_optimal_embedding(n)
        rep = audit_distortion(inst.metric, F)
        ok &= rep.exact and rep.stats["expansion"] == 1 and rep.stats["contraction"] == 1 and F.d == n
        pairs = inst.structure["antipodal_pairs"]
        S = coordinate_satisfaction(inst.metric, F, pairs=pairs)
        ok &= all(len(col) == 1 for col in S.columns) and not S.unsatisfied
        ok &= len({col[0] for col in S.columns}) == n
    record(5, ok, "n = 2..32: isometric with n columns, each column satisfies exactly one antipodal pair")
    assert ok


def _antipodal_candidates(n, rng):
    pairs = [(2 * i, 2 * i + 1) for i in range(n)]
    grid = np.linspace(-4.0, 6.0, 401)
    for a, b in itertools.combinations(pairs, 2):
        for x in grid:
            for s in (1, -1):
                v = np.zeros(2 * n)
                v[a[1]] = 2.0
                v[b[0]], v[b[1]] = x, x + 2.0 * s
                yield v
    for _ in range(300):
        v = rng.uniform(-3, 3, size=2 * n)
        a, b = rng.choice(n, size=2, replace=False) if n > 1 else (0, 0)
        for i in {int(a), int(b)}:
            v[2 * i + 1] = v[2 * i] + rng.choice([-2.0, 2.0]) * rng.uniform(1, 1.2)
        yield v


def test_c6_antipodal(record):
    rng = np.random.default_rng(606)
    ok = True
    tight = {}
    for p in (1.0, 2.0, math.inf):
        for n in range(1, 17):
            inst = antipodal_basis(n, p)
            cross = inst.structure["cross_distance"]
            pairs = inst.structure["antipodal_pairs"]
            if n > 1:
                ok &= math.isclose(float(inst.metric.dist[0, 2]), cross, rel_tol=1e-12)
            lowest = None
            for v in _antipodal_candidates(n, rng):
                res = antipodal_coordinate_check(v, pairs, cross, p)
                ok &= res["ok"]
                if res["min_cross_ratio"] is not None:
                    lowest = res["min_cross_ratio"] if lowest is None else min(lowest, res["min_cross_ratio"])
            if lowest is not None:
                tight[p] = min(tight.get(p, math.inf), lowest / res["required"])
    record(6, ok, "n <= 16, p in {1, 2, inf}: no coordinate satisfies two pairs below ratio 2^(1-1/p); "
                  "closest approach / required = " + ", ".join(f"p={p}: {r:.6f}" for p, r in tight.items()))
    assert ok


def test_c7_hypercube(record):
    eps = Fraction(1, 9)
    ok = True
    rows = []
    for n in range(8, 21):
        code = hypercube_code(n, eps)
        pr = code.properties
        ok &= pr["symmetric"] and pr["separated"] and pr["meets_size_bound"]
        k = math.floor(code.structure["eps_prime"] * n)
        Y = padded_prefix_set(n, code.structure["eps_prime"])
        ok &= Y.properties["size"] == 2**k
        chain = code_with_prefix(n, eps).properties
        rows.append(f"n={n}:{'holds' if chain['chain_holds'] else 'inactive'}")
        ok &= chain["chain_holds"]
    record(7, ok, "n = 8..20, eps = 1/9: symmetric, separated, size bound met; chain " + " ".join(rows))
    assert ok


def test_c8_jl_labels(record):
    eps = 0.5
    ok = True
    rates = []
    for seed in range(5):
        P = gaussian_points(1000, 20, 800 + seed)
        M = metric_from_points(P)
        order = PriorityOrdering.random(1000, seed)
        L = jl_layered_labels(P, order, eps, seed)
        rep = audit_labels(M, L, jl_query, t=1 + eps, lower=1 / (1 + eps),
                           size_bound=lambda j: jl_word_bound(j, eps), min_pass_rate=0.99)
        ok &= rep.passed
        rates.append(rep.stats["pass_rate"])
    snow = True
    for seed in range(5):
        P = rational_points(20, 5, 900 + seed, p=1)
        w, bits = snowflake_indicators(P)
        M = metric_from_points(P)
        for a in range(20):
            for b in range(20):
                sq = sum((wt * (int(x) - int(y)) ** 2 for wt, x, y in zip(w, bits[a], bits[b])), Fraction(0))
                snow &= sq == M.dist[a, b]
    ok &= snow
    record(8, ok, f"n = 1000 in R^20, eps = 0.5, 5 seeds: min pass rate {min(rates):.4f}, "
                  f"C = {jl_word_constant():.3f}; l1 snowflake identity exact on 5 x 20 points")
    assert ok


def test_c9_bipartite(record):
    ok = True
    widths = {}
    for n in (8, 16):
        for seed in range(10):
            inst = random_bipartite_hard(n, seed)
            pr = inst.properties
            ok &= pr["same_side_distance_2"] and pr["no_isolated"] and pr["cross_in_1_3"]
            M = inst.metric
            F = bipartite_A12_embedding(inst)
            ok &= audit_distortion(M, F).checks["non_expansive"]
            S = coordinate_satisfaction(M, F)
            A12 = {tuple(p) for p in inst.structure["A1"] + inst.structure["A2"]}
            ok &= not A12 & set(S.unsatisfied)
            ok &= F.d == A12_width_bound(n) <= 5 * math.log2(n)
            widths[n] = F.d
            ok &= bipartite_certify(inst, F, 1.0).passed
            frechet = EmbeddingMatrix(M.dist.copy(), True)
            stretched = EmbeddingMatrix(M.dist * Fraction(5, 4), True)
            for emb, t in ((frechet, 1.0), (stretched, 1.25), (hstack(F, frechet), 1.0)):
                ok &= audit_distortion(M, emb).stats["distortion"] < Fraction(3, 2)
                ok &= bipartite_certify(inst, emb, t).passed
    record(9, ok, f"20 instances n in {{8, 16}}: properties hold, A1+A2 helper widths "
                  f"{widths} <= 5 log2 n, certifier clean on the helper and on Frechet, 5/4-stretched Frechet and helper+Frechet (distortion 1)")
    assert ok


def test_c10_oracles(record):
    rng = np.random.default_rng(1010)
    ok = True
    checks = 0
    for k in range(30):
        n = int(rng.integers(2, 25))
        edges = [(int(rng.integers(v)), v, Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 4))))
                 for v in range(1, n)]
        edges += [(int(a), int(b), Fraction(int(rng.integers(1, 20)), 2))
                  for a, b in rng.integers(n, size=(n, 2)) if a != b]
        M = metric_from_graph(edges, n)
        ref = floyd_warshall(edges, n)
        ok &= all(M.dist[i, j] == ref[i][j] for i in range(n) for j in range(n))

        T = random_tree(n, 5000 + k)
        MT = metric_from_tree(T)
        ref = floyd_warshall(T.edges(), n)
        ok &= all(MT.dist[i, j] == ref[i][j] for i in range(n) for j in range(n))
        F = prioritized_tree_embedding(T, PriorityOrdering.random(n, k))
        ok &= all(linf(F.row(i), F.row(j)) == MT.dist[i, j] for i in range(n) for j in range(n))

        P = rational_points(n, 3, 6000 + k, p=1)
        MP = metric_from_points(P)
        ok &= all(MP.dist[i, j] == sum(abs(x - y) for x, y in zip(P.points[i], P.points[j]))
                  for i in range(n) for j in range(n))

        order = PriorityOrdering.random(n, 70 + k)
        for beta in BETAS.values():
            E = meta_embedding(M, order, beta)
            for j in range(1, n + 1):
                lvl = chi(beta, j)
                S = list(order.prefix(min(n, beta(lvl - 1)))) if lvl > 1 else []
                S.append(order.point(j))
                ok &= all(E.values[x, j - 1] == min(M.dist[x, s] for s in S) for x in range(n))
            fast, slow = audit_distortion(M, E), audit_distortion(M, E, brute=True)
            ok &= all(fast.stats[key] == slow.stats[key] for key in ("expansion", "contraction", "distortion"))
            alpha = lambda j: 2 * chi(beta, j)  # noqa: E731
            fast = audit_prioritized_contractive(M, order, E, alpha)
            slow = audit_prioritized_contractive(M, order, E, alpha, brute=True)
            ok &= fast.passed == slow.passed
            tight = lambda j: 1  # noqa: E731
            fast = audit_prioritized_contractive(M, order, E, tight)
            slow = audit_prioritized_contractive(M, order, E, tight, brute=True)
            ok &= fast.passed == slow.passed
            checks += 4
        L = exact_labels(M, order)
        ok &= all(L.query(a, b) == M.dist[a, b] for a in range(n) for b in range(n))

        S = coordinate_satisfaction(M, E)
        for c, col in enumerate(S.columns):
            want = [(a, b) for a in range(n) for b in range(a + 1, n)
                    if M.dist[a, b] != 0 and abs(E.values[a, c] - E.values[b, c]) >= M.dist[a, b]]
            ok &= sorted(col) == want
        ok &= bool((K.pairwise_linf(E.values) == np.array(
            [[linf(E.values[a], E.values[b]) for b in range(n)] for a in range(n)], dtype=object)).all())
        checks += 8
    for n in (6, 8, 10):
        code = hypercube_code(n, Fraction(1, 9))
        pts = code.points.points
        ham = min(int((pts[a] != pts[b]).sum()) for a in range(len(pts)) for b in range(a + 1, len(pts)))
        ok &= ham == code.properties["min_hamming"]
        checks += 1
    record(10, ok, f"30 random instances n <= 24, {checks} optimized-vs-oracle comparisons, all exact")
    assert ok
