import math
from fractions import Fraction

import numpy as np
import pytest

from priomet.audit import audit_distortion, bipartite_certify, coordinate_satisfaction
from priomet.errors import BadParameter, NotAnEmbeddingOfGPrime, RetriesExhausted
from priomet.instances import (
    A12_width_bound,
    antipodal_basis,
    bipartite_A12_embedding,
    bipartite_failure_bound,
    code_with_prefix,
    cycle_instance,
    cycle_optimal_embedding,
    hypercube_code,
    padded_prefix_set,
    random_bipartite_hard,
)
from priomet.metric import EmbeddingMatrix


def test_cycle_small():
    inst = cycle_instance(2)
    assert inst.structure["antipodal_pairs"] == [(0, 2), (1, 3)]
    assert inst.metric.dist.max() == 2
    assert inst.ordering.perm[:2] == (2, 3)
    inst8 = cycle_instance(8)
    assert all(inst8.metric.dist[a, b] == 8 for a, b in inst8.structure["antipodal_pairs"])
    with pytest.raises(BadParameter):
        cycle_instance(1)


def test_cycle_embedding_n2_rows():
    F = cycle_optimal_embedding(2)
    assert F.values.tolist() == [[0, 0], [1, 1], [2, 0], [1, -1]]


def test_cycle_embedding_n4():
    F = cycle_optimal_embedding(4)
    rep = audit_distortion(cycle_instance(4).metric, F, brute=True)
    assert F.d == 4 and rep.stats["distortion"] == 1


def test_antipodal_basis():
    one = antipodal_basis(1)
    assert one.structure["antipodal_pairs"] == [(0, 1)] and float(one.metric.dist[0, 1]) == 2
    assert antipodal_basis(3, 2).structure["cross_distance"] == pytest.approx(math.sqrt(2))
    assert antipodal_basis(3, 1).structure["cross_distance"] == 2
    assert antipodal_basis(3, math.inf).structure["cross_distance"] == 1
    with pytest.raises(BadParameter):
        antipodal_basis(0)


def test_hypercube_n3():
    inst = hypercube_code(3, Fraction(1, 9))
    pts = inst.points.points
    assert len(pts) >= 2
    assert all(np.sum(pts[a] != pts[b]) >= 2 for a in range(len(pts)) for b in range(a + 1, len(pts)))


def test_hypercube_exhaustive_recheck():
    inst = hypercube_code(10, Fraction(1, 9))
    pts = inst.points.points
    keys = {tuple(p) for p in pts}
    assert all(tuple(-p) in keys for p in pts)
    ham = (pts[:, None, :] != pts[None, :, :]).sum(axis=2)
    np.fill_diagonal(ham, 99)
    assert ham.min() > Fraction(1, 3) * 10
    for a, b in inst.structure["antipodal_pairs"]:
        assert (pts[a] == -pts[b]).all()


def test_hypercube_n16_bound():
    inst = hypercube_code(16, Fraction(1, 9))
    assert inst.properties["size"] >= Fraction(2**16, 2 * math.comb(16, 5))


def test_hypercube_greedy_is_lexicographic():
    inst = hypercube_code(6, Fraction(1, 9))
    assert inst.points.points[0].tolist() == [-1] * 6


def test_hypercube_errors():
    with pytest.raises(BadParameter):
        hypercube_code(8, Fraction(1, 5))
    with pytest.raises(BadParameter):
        hypercube_code(25, Fraction(1, 9))


def test_padded_prefix():
    Y = padded_prefix_set(3, Fraction(1, 3))
    assert sorted(map(tuple, Y.points.points.tolist())) == [(-1, 0, 0), (1, 0, 0)]
    assert padded_prefix_set(6, Fraction(1, 3)).properties["size"] == 4
    assert padded_prefix_set(7, Fraction(1, 3)).properties["prefix_length"] == 2


def test_code_with_prefix_chain_n16():
    inst = code_with_prefix(16, Fraction(1, 9))
    p = inst.properties
    assert p["chain_holds"] and p["pair_sum_matches"]
    assert p["chain_lhs"] == pytest.approx(2 * (1 + 1 / 9) * math.sqrt((1 - 5 / 16) * 16))
    ny = p["Y_size"]
    assert inst.ordering.perm[:ny] == tuple(range(ny))


def test_bipartite_properties():
    inst = random_bipartite_hard(8, 7)
    n = 8
    D = inst.metric.dist
    L, R = inst.structure["L"], inst.structure["R"]
    l, r = inst.structure["apex"]
    assert all(D[u, v] == 2 for side in (L, R) for u in side for v in side if u != v)
    assert all(D[u, v] in (1, 3) for u in L for v in R)
    assert all(min(D[v, l], D[v, r]) == 1 for v in range(2 * n))
    assert inst.ordering.perm[:2] == (l, r)
    assert inst.properties["failure_bound"] == pytest.approx(2 * 28 * 0.75**8 + 16 * 0.5**8)
    assert bipartite_failure_bound(16) > 1 > bipartite_failure_bound(64)


def test_bipartite_retries():
    with pytest.raises(RetriesExhausted):
        random_bipartite_hard(4, 0, max_retries=0)
    with pytest.raises(BadParameter):
        random_bipartite_hard(3, 0)


def test_bipartite_helper_embedding():
    inst = random_bipartite_hard(8, 3)
    F = bipartite_A12_embedding(inst)
    assert audit_distortion(inst.metric, F).checks["non_expansive"]
    S = coordinate_satisfaction(inst.metric, F)
    A12 = {tuple(p) for p in inst.structure["A1"] + inst.structure["A2"]}
    assert not A12 & set(S.unsatisfied)
    clique = F.blocks[0]
    S1 = coordinate_satisfaction(inst.metric, EmbeddingMatrix(F.values[:, : clique["stop"]], True))
    assert not set(map(tuple, inst.structure["A1"])) & set(S1.unsatisfied)
    assert F.d == A12_width_bound(8) <= 5 * math.log2(8)
    assert bipartite_certify(inst, F, 1.0).passed


def test_bipartite_certify_flags_contradiction():
    inst = random_bipartite_hard(8, 1)
    u, v = inst.structure["A3"][0]
    l, r = inst.structure["apex"]
    col = np.zeros((inst.metric.n, 1), dtype=object)
    col[:] = Fraction(0)
    col[u, 0], col[v, 0] = Fraction(0), Fraction(3)
    rep = bipartite_certify(inst, EmbeddingMatrix(col, True), 1.2)
    assert not rep.passed
    w = rep.witnesses[0]
    assert w["pair"] == [u, v] and w["implied_expansion"] >= Fraction(3, 2)


def test_bipartite_certify_rejects_other_instances():
    with pytest.raises(NotAnEmbeddingOfGPrime):
        bipartite_certify(cycle_instance(3), cycle_optimal_embedding(3), 1.0)
