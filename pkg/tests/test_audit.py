import math
from fractions import Fraction

import numpy as np
import pytest

from priomet.audit import (
    antipodal_coordinate_check,
    audit_distortion,
    audit_labels,
    audit_prioritized_contractive,
    audit_prioritized_dimension,
    coordinate_satisfaction,
)
from priomet.errors import ExpansionViolation, SizeMismatch
from priomet.general import chi, meta_embedding, preset_beta
from priomet.instances import cycle_instance, cycle_optimal_embedding
from priomet.labeling import Label, LabelSet, exact_labels, exact_query
from priomet.metric import EmbeddingMatrix, MetricSpace, PriorityOrdering, metric_from_tree
from priomet.samples import random_float_metric, random_graph_metric, random_tree
from priomet.trees import llr_tree_embedding, prioritized_tree_embedding

EXP = preset_beta("exp", 1)


def _scaled(F, s):
    return EmbeddingMatrix(F.values * s, F.exact, F.row_ids, F.blocks)


def test_isometric_tree_exact_one():
    T = random_tree(40, 1)
    rep = audit_distortion(metric_from_tree(T), llr_tree_embedding(T))
    assert rep.exact and rep.stats["expansion"] == 1 and rep.stats["contraction"] == 1


def test_scaled_half():
    T = random_tree(30, 2)
    rep = audit_distortion(metric_from_tree(T), _scaled(llr_tree_embedding(T), Fraction(1, 2)))
    assert rep.stats["contraction"] == 2 and rep.stats["expansion"] <= 1 and rep.passed


def test_witnesses_reproduce():
    M = random_graph_metric(30, 4)
    order = PriorityOrdering.random(30, 1)
    F = meta_embedding(M, order, EXP)
    rep = audit_distortion(M, F)
    i, j = rep.stats["contraction_witness"]
    e = max(abs(a - b) for a, b in zip(F.values[i], F.values[j]))
    assert M.dist[i, j] / e == rep.stats["contraction"]
    i, j = rep.stats["expansion_witness"]
    e = max(abs(a - b) for a, b in zip(F.values[i], F.values[j]))
    assert e / M.dist[i, j] == rep.stats["expansion"]


def test_size_mismatch():
    M = random_graph_metric(5, 0)
    F = EmbeddingMatrix(np.zeros((4, 1), dtype=object), True)
    with pytest.raises(SizeMismatch):
        audit_prioritized_contractive(M, PriorityOrdering.identity(5), F, lambda j: 1)


def test_zero_distance_pairs_reported():
    T = random_tree(20, 3, zero_prob=0.4)
    rep = audit_distortion(metric_from_tree(T), llr_tree_embedding(T))
    assert rep.pseudometric and rep.stats["distortion"] == 1


def test_isometric_alpha_one_passes():
    T = random_tree(30, 5)
    o = PriorityOrdering.random(T.vertices, 0)
    F = prioritized_tree_embedding(T, o)
    assert audit_prioritized_contractive(metric_from_tree(T), o, F, lambda j: 1).passed


def test_dimension_zero_matrix():
    F = EmbeddingMatrix(np.zeros((5, 3)), False)
    assert audit_prioritized_dimension(F, PriorityOrdering.identity(5), lambda j: 0).passed


def test_satisfaction_cycle():
    for n in (2, 5, 9):
        inst = cycle_instance(n)
        S = coordinate_satisfaction(inst.metric, cycle_optimal_embedding(n), pairs=inst.structure["antipodal_pairs"])
        assert [c for c in S.columns] == [[(i, i + n)] for i in range(n)]


def test_satisfaction_isometry_covers_all():
    T = random_tree(25, 0)
    S = coordinate_satisfaction(metric_from_tree(T), llr_tree_embedding(T))
    assert S.unsatisfied == []


def test_satisfaction_expansion_violation():
    M = MetricSpace.from_matrix([[0, 1], [1, 0]])
    with pytest.raises(ExpansionViolation):
        coordinate_satisfaction(M, EmbeddingMatrix(np.array([[0], [2]], dtype=object), True))


def test_satisfaction_monotone_in_columns():
    M = random_graph_metric(15, 2)
    F = meta_embedding(M, PriorityOrdering.identity(15), EXP)
    part = EmbeddingMatrix(F.values[:, :7], True)
    a = coordinate_satisfaction(M, part)
    b = coordinate_satisfaction(M, F)
    assert set(b.unsatisfied) <= set(a.unsatisfied)
    assert audit_distortion(M, F).stats["contraction"] <= audit_distortion(M, part).stats["contraction"]


def test_antipodal_check():
    pairs = [(0, 1), (2, 3)]
    # optimal single coordinate: e1 -> 0, -e1 -> 2, e2 -> 0, -e2 -> 2 would put cross pairs at gap 2
    res = antipodal_coordinate_check([0, 2, 0, 2], pairs, math.sqrt(2), 2)
    assert res["satisfied"] == pairs and res["min_cross_ratio"] == pytest.approx(math.sqrt(2)) and res["ok"]
    res = antipodal_coordinate_check([0, 2, 1, 1], pairs, math.sqrt(2), 2)
    assert res["satisfied"] == [(0, 1)] and res["min_cross_ratio"] is None


def test_audit_labels_exact_and_corrupted():
    M = random_graph_metric(30, 1)
    L = exact_labels(M, PriorityOrdering.random(30, 2))
    assert audit_labels(M, L, exact_query, size_bound=lambda j: j).passed
    labs = list(L.labels)
    labs[10] = Label(11, labs[10].payload[:3], "exact", point=labs[10].point)
    bad = LabelSet(tuple(labs), "exact")
    rep = audit_labels(M, bad, exact_query)
    assert not rep.passed and rep.stats["decode_errors"] > 0
    labs = list(L.labels)
    labs[5] = Label(6, tuple(x + 1 for x in labs[5].payload), "exact", point=labs[5].point)
    assert not audit_labels(M, LabelSet(tuple(labs), "exact"), exact_query).passed


# brute-force oracle equivalence ------------------------------------------------


def _same(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return a == pytest.approx(b, rel=1e-12)
    return a == b


@pytest.mark.parametrize("seed", range(6))
def test_distortion_matches_brute(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 25))
    cases = []
    M = random_graph_metric(n, seed)
    o = PriorityOrdering.random(n, seed)
    cases.append((M, meta_embedding(M, o, EXP)))
    T = random_tree(n, seed, zero_prob=0.2)
    cases.append((metric_from_tree(T), prioritized_tree_embedding(T, PriorityOrdering.random(T.vertices, seed))))
    Mf = random_float_metric(n, seed)
    cases.append((Mf, meta_embedding(Mf, o, preset_beta("dexp"))))
    Fn = EmbeddingMatrix(rng.standard_normal((n, 3)), False)
    cases.append((Mf, Fn))
    for M, F in cases:
        fast, slow = audit_distortion(M, F), audit_distortion(M, F, brute=True)
        assert fast.checks == slow.checks
        for key in ("expansion", "contraction", "distortion", "pairs"):
            assert _same(fast.stats[key], slow.stats[key])


@pytest.mark.parametrize("seed", range(6))
def test_prioritized_matches_brute(seed):
    n = 5 + 3 * seed
    M = random_graph_metric(n, seed)
    o = PriorityOrdering.random(n, seed + 1)
    for beta in (EXP, preset_beta("dexp")):
        F = meta_embedding(M, o, beta)
        for alpha in (lambda j: 2 * chi(beta, j), lambda j: chi(beta, j), lambda j: 1):
            fast = audit_prioritized_contractive(M, o, F, alpha)
            slow = audit_prioritized_contractive(M, o, F, alpha, brute=True)
            assert fast.checks == slow.checks
            assert {tuple(w["ranks"]) for w in fast.witnesses} == {tuple(w["ranks"]) for w in slow.witnesses}
