"""Verification engine for embeddings and labelings.

Every audit returns an :class:`AuditReport`.  In the exact kernel all
comparisons are done on integer numerators over a common denominator, so
witnesses and verdicts carry no rounding.  In the float kernel comparisons use
a relative tolerance (default ``1e-9``).

Pairs at distance zero are skipped in every ratio and listed in the report's
``pseudometric`` section.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import _kernel as K
from .errors import (
    BadParameter,
    ExpansionViolation,
    NotAnEmbeddingOfGPrime,
    SchemeMismatch,
    SizeMismatch,
)
from .metric import EmbeddingMatrix, MetricSpace, PriorityOrdering

MAX_WITNESSES = 25


@dataclass
class AuditReport:
    scheme: str
    checks: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    satisfaction: list | None = None
    pseudometric: list = field(default_factory=list)
    tolerance: float = 0.0
    exact: bool = False

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def __bool__(self):
        return self.passed

    def merge(self, other: "AuditReport") -> "AuditReport":
        self.checks.update(other.checks)
        self.witnesses.extend(other.witnesses)
        self.stats.update(other.stats)
        self.pseudometric = self.pseudometric or other.pseudometric
        if other.satisfaction is not None:
            self.satisfaction = other.satisfaction
        return self

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "passed": self.passed,
            "exact": self.exact,
            "tolerance": self.tolerance,
            "checks": dict(sorted(self.checks.items())),
            "stats": {k: _jsonable(v) for k, v in sorted(self.stats.items())},
            "witnesses": [_jsonable(w) for w in self.witnesses],
            "pseudometric_pairs": [list(p) for p in self.pseudometric],
            "satisfaction": self.satisfaction,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.as_dict(), **kw)

    def lines(self) -> list[str]:
        out = [f"{'PASS' if self.passed else 'FAIL'}  {self.scheme}"]
        for name, ok in sorted(self.checks.items()):
            out.append(f"  [{'ok' if ok else '!!'}] {name}")
        for k, v in sorted(self.stats.items()):
            if not isinstance(v, (list, dict)):
                out.append(f"  {k} = {_jsonable(v)}")
        return out


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return K.format_number(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


# ---------------------------------------------------------------------------
# shared pair machinery
# ---------------------------------------------------------------------------


@dataclass
class _Pairs:
    """Distances ``D`` and the per-column coordinates ``X`` in one kernel.

    In the exact kernel both are integer arrays over the same denominator
    ``den``; ratios between them are therefore plain integer ratios.
    """

    D: np.ndarray
    X: np.ndarray
    exact: bool
    den: int = 1

    def value(self, x):
        return Fraction(int(x), self.den) if self.exact else float(x)

    def ratio(self, a, b):
        if b == 0:
            return math.inf
        return Fraction(int(a), int(b)) if self.exact else float(a) / float(b)


def _pairs(M: MetricSpace, F: EmbeddingMatrix, rows=None) -> _Pairs:
    if F.n != M.n:
        raise SizeMismatch(f"embedding has {F.n} rows, metric has {M.n} points")
    vals = F.values if rows is None else F.values[rows]
    if M.exact and F.exact:
        if vals.shape[1]:
            (D, X), den = K.to_common_ints(M.dist, vals)
        else:
            (D,), den = K.to_common_ints(M.dist)
            X = np.zeros((M.n, 0), dtype=D.dtype)
        return _Pairs(D, X, True, den)
    X = vals.astype(float) if vals.dtype == object else vals
    return _Pairs(M.as_float(), X, False)


def _emb(P: _Pairs) -> np.ndarray:
    return K.pairwise_linf(P.X) if P.X.shape[1] else np.zeros_like(P.D)


def _upper(n):
    return np.triu(np.ones((n, n), dtype=bool), 1)


def _zero_pairs(D, limit=MAX_WITNESSES * 4):
    z = np.argwhere((D == 0) & _upper(D.shape[0]))
    return [tuple(map(int, p)) for p in z[:limit]]


def _le(a, b, exact, tol):
    """Elementwise ``a <= b`` with relative slack in the float kernel."""
    if exact:
        return a <= b
    return a <= b * (1 + tol) + tol * 1e-12


# ---------------------------------------------------------------------------
# distortion audits
# ---------------------------------------------------------------------------


def audit_distortion(M: MetricSpace, F: EmbeddingMatrix, tol: float = K.FLOAT_TOL,
                     brute: bool = False) -> AuditReport:
    """Expansion, contraction and distortion over all pairs with ``d > 0``.

    ``brute=True`` recomputes everything with a plain double loop (reference
    oracle for small inputs).
    """
    if brute:
        return _audit_distortion_brute(M, F, tol)
    P = _pairs(M, F)
    E = _emb(P)
    mask = _upper(M.n) & (P.D != 0)
    rep = AuditReport("distortion", exact=P.exact, tolerance=0.0 if P.exact else tol)
    rep.pseudometric = _zero_pairs(P.D)
    rep.stats["pairs"] = int(mask.sum())
    rep.stats["columns"] = F.d
    if not mask.any():
        rep.stats.update(expansion=0, contraction=1, distortion=0)
        rep.checks["non_expansive"] = True
        return rep
    exp_i, exp_j, expansion = _argmax_ratio(P, E, P.D, mask)
    if np.any(mask & (E == 0)):
        i, j = map(int, np.argwhere(mask & (E == 0))[0])
        con_i, con_j, contraction = i, j, math.inf
    else:
        con_i, con_j, contraction = _argmax_ratio(P, P.D, E, mask)
    rep.stats["expansion"] = expansion
    rep.stats["contraction"] = contraction
    rep.stats["distortion"] = expansion * contraction if contraction != math.inf else math.inf
    rep.stats["expansion_witness"] = [exp_i, exp_j]
    rep.stats["contraction_witness"] = [con_i, con_j]
    rep.checks["non_expansive"] = bool(np.all(_le(E[mask], P.D[mask], P.exact, tol)))
    rep.witnesses.append({"kind": "expansion", "pair": [exp_i, exp_j], "ratio": expansion})
    rep.witnesses.append({"kind": "contraction", "pair": [con_i, con_j], "ratio": contraction})
    return rep


def _argmax_ratio(P: _Pairs, num, den, mask):
    """Pair maximising ``num/den`` over ``mask`` (exact tie resolution)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(mask, num.astype(float) / np.where(den == 0, 1, den).astype(float), -np.inf)
    top = r.max()
    if not P.exact:
        i, j = np.unravel_index(np.argmax(r), r.shape)
        return int(i), int(j), float(top)
    cand = np.argwhere(mask & (r >= top * (1 - 1e-9)))
    best = None
    for i, j in cand:
        q = Fraction(int(num[i, j]), int(den[i, j]))
        if best is None or q > best[2]:
            best = (int(i), int(j), q)
    return best


def _audit_distortion_brute(M, F, tol):
    rep = AuditReport("distortion", exact=M.exact and F.exact, tolerance=0.0 if M.exact and F.exact else tol)
    exact = rep.exact
    vals = F.values if exact else F.as_float()
    dist = M.dist if exact else M.as_float()
    expansion, contraction = None, None
    ew = cw = None
    ok = True
    count = 0
    for i in range(M.n):
        for j in range(i + 1, M.n):
            d = dist[i, j]
            if d == 0:
                rep.pseudometric.append((i, j))
                continue
            count += 1
            e = max((abs(vals[i, c] - vals[j, c]) for c in range(F.d)), default=0)
            a = Fraction(e) / d if exact else e / d
            b = (Fraction(d) / e if exact else d / e) if e != 0 else math.inf
            if expansion is None or a > expansion:
                expansion, ew = a, [i, j]
            if contraction is None or b > contraction:
                contraction, cw = b, [i, j]
            if exact and e > d or not exact and e > d * (1 + tol):
                ok = False
    rep.stats["pairs"] = count
    rep.stats["columns"] = F.d
    if count:
        rep.stats.update(expansion=expansion, contraction=contraction,
                         distortion=expansion * contraction if contraction != math.inf else math.inf,
                         expansion_witness=ew, contraction_witness=cw)
    rep.checks["non_expansive"] = ok
    return rep


def audit_prioritized_contractive(M: MetricSpace, order: PriorityOrdering, F: EmbeddingMatrix,
                                  alpha: Callable[[int], float], tol: float = K.FLOAT_TOL,
                                  brute: bool = False) -> AuditReport:
    """Check ``d/alpha(j) <= |F(x_j)-F(x_i)|_inf <= d`` for every ``j < i``."""
    order.check_covers(range(M.n))
    if F.n != M.n:
        raise SizeMismatch(f"embedding has {F.n} rows, metric has {M.n} points")
    perm = list(order.perm)
    rows = [F.row_index(x) for x in perm]
    Mp = M.submetric(perm)
    P = _pairs(Mp, F, rows)
    rep = AuditReport("prioritized-contractive", exact=P.exact, tolerance=0.0 if P.exact else tol)
    n = M.n
    alphas = [alpha(j) for j in range(1, n + 1)]
    mask = _upper(n) & (P.D != 0)
    rep.pseudometric = [(perm[i], perm[j]) for i, j in _zero_pairs(P.D)]
    if brute:
        return _prio_brute(rep, P, alphas, perm, tol)
    E = _emb(P)
    upper_ok = _le(E, P.D, P.exact, tol) | ~mask
    if P.exact:
        avec = [Fraction(a) for a in alphas]
        aden = math.lcm(*(a.denominator for a in avec)) if avec else 1
        anum = np.array([a.numerator * (aden // a.denominator) for a in avec], dtype=object)
        lhs = K.widen(E, aden).astype(object) * anum[:, None]
        rhs = K.widen(P.D, aden)
        lower_ok = (lhs >= rhs) | ~mask
    else:
        avec = np.array(alphas, dtype=float)
        lower_ok = (E * avec[:, None] >= P.D * (1 - tol)) | ~mask
    bad = np.argwhere(~(upper_ok & lower_ok))
    for r, c in bad:
        if len(rep.witnesses) >= MAX_WITNESSES:
            break
        rep.witnesses.append(_prio_witness(P, E, alphas, perm, int(r), int(c)))
    rep.checks["prioritized_lower"] = bool(lower_ok.all())
    rep.checks["non_expansive"] = bool(upper_ok.all())
    rep.stats["violations"] = int(len(bad))
    rep.stats["pairs"] = int(mask.sum())
    worst = None
    if mask.any():
        with np.errstate(divide="ignore"):
            ratio = np.where(mask, P.D.astype(float) / np.maximum(E.astype(float), 1e-300), 0)
        ratio = ratio / np.array(alphas, dtype=float)[:, None]
        r, c = np.unravel_index(np.argmax(ratio), ratio.shape)
        worst = {"pair": [perm[r], perm[c]], "ranks": [int(r) + 1, int(c) + 1],
                 "contraction": P.ratio(P.D[r, c], E[r, c]), "alpha": alphas[r]}
    rep.stats["tightest"] = worst
    return rep


def _prio_witness(P, E, alphas, perm, r, c):
    return {"kind": "prioritized", "ranks": [r + 1, c + 1], "pair": [perm[r], perm[c]],
            "distance": P.value(P.D[r, c]), "embedded": P.value(E[r, c]),
            "contraction": P.ratio(P.D[r, c], E[r, c]), "alpha": alphas[r]}


def _prio_brute(rep, P, alphas, perm, tol):
    n = len(perm)
    lower = upper = True
    count = 0
    for r in range(n):
        for c in range(r + 1, n):
            d = P.D[r, c]
            if d == 0:
                continue
            count += 1
            e = max((abs(P.X[r, k] - P.X[c, k]) for k in range(P.X.shape[1])), default=0)
            a = alphas[r]
            if P.exact:
                lo_ok = Fraction(int(e)) * Fraction(a) >= int(d)
                up_ok = e <= d
            else:
                lo_ok = e * a >= d * (1 - tol)
                up_ok = e <= d * (1 + tol)
            lower &= lo_ok
            upper &= up_ok
            if not (lo_ok and up_ok) and len(rep.witnesses) < MAX_WITNESSES:
                rep.witnesses.append({"kind": "prioritized", "ranks": [r + 1, c + 1], "pair": [perm[r], perm[c]],
                                      "contraction": P.ratio(d, e), "alpha": a})
    rep.checks["prioritized_lower"] = bool(lower)
    rep.checks["non_expansive"] = bool(upper)
    rep.stats["pairs"] = count
    rep.stats["violations"] = len(rep.witnesses)
    return rep


def audit_prioritized_dimension(F: EmbeddingMatrix, order: PriorityOrdering,
                                bound: Callable[[int], float]) -> AuditReport:
    """Each rank-``j`` row must vanish beyond column ``bound(j)``."""
    order.check_covers(F.row_ids)
    rep = AuditReport("prioritized-dimension", exact=F.exact)
    sup = F.supports()
    worst = 0.0
    profile = []
    bad = 0
    for j, x in enumerate(order.perm, start=1):
        s = int(sup[F.row_index(x)])
        b = bound(j)
        profile.append(s)
        if b > 0:
            worst = max(worst, s / b)
        if s > b:
            bad += 1
            if len(rep.witnesses) < MAX_WITNESSES:
                rep.witnesses.append({"kind": "dimension", "rank": j, "point": x, "support": s, "bound": b})
    rep.checks["prioritized_dimension"] = bad == 0
    rep.stats["violations"] = bad
    rep.stats["max_support"] = max(profile, default=0)
    rep.stats["worst_support_over_bound"] = worst
    rep.stats["support_profile"] = profile
    return rep


# ---------------------------------------------------------------------------
# satisfaction
# ---------------------------------------------------------------------------


@dataclass
class SatisfactionTable:
    columns: list  # per column: sorted list of satisfied pairs (i, j), i < j
    unsatisfied: list
    exact: bool

    def satisfied_by(self, pair) -> list[int]:
        pair = tuple(sorted(pair))
        return [c for c, pairs in enumerate(self.columns) if pair in pairs]

    def as_list(self) -> list:
        return [[list(p) for p in sorted(c)] for c in self.columns]


def coordinate_satisfaction(M: MetricSpace, F: EmbeddingMatrix, tol: float = K.FLOAT_TOL,
                            pairs=None) -> SatisfactionTable:
    """Pairs each column realises in full (``|F_c(x)-F_c(y)| >= d(x,y)``).

    Raises :class:`ExpansionViolation` if a column expands a pair.  ``pairs``
    optionally restricts attention to a set of index pairs.
    """
    P = _pairs(M, F)
    n = M.n
    mask = _upper(n) & (P.D != 0)
    if pairs is not None:
        sel = np.zeros((n, n), dtype=bool)
        for i, j in pairs:
            i, j = min(i, j), max(i, j)
            sel[i, j] = True
        mask &= sel
    columns = []
    covered = np.zeros((n, n), dtype=bool)
    for c in range(P.X.shape[1]):
        col = P.X[:, c]
        diff = np.abs(col[:, None] - col[None, :])
        expand = ~_le(diff, P.D, P.exact, tol) & _upper(n)
        if expand.any():
            i, j = map(int, np.argwhere(expand)[0])
            raise ExpansionViolation(
                f"column {c} expands pair ({i},{j}): {P.value(diff[i, j])} > {P.value(P.D[i, j])}")
        sat = diff >= P.D if P.exact else diff >= P.D * (1 - tol)
        sat &= mask
        covered |= sat
        columns.append([tuple(map(int, p)) for p in np.argwhere(sat)])
    unsat = [tuple(map(int, p)) for p in np.argwhere(mask & ~covered)]
    return SatisfactionTable(columns, unsat, P.exact)


def antipodal_coordinate_check(values, pairs, cross_distance, p, tol: float = K.FLOAT_TOL,
                               pair_distance=2.0) -> dict:
    """Single-coordinate antipodal test for the signed basis ``{+-e_i}``.

    ``values`` maps point index -> coordinate; ``pairs`` lists antipodal index
    pairs at distance ``pair_distance``.  When two pairs are satisfied, the
    largest gap between a point of one pair and a point of the other is
    divided by the cross distance; it must reach ``2**(1-1/p)``.
    """
    sat = [pr for pr in pairs if abs(values[pr[0]] - values[pr[1]]) >= pair_distance * (1 - tol)]
    need = 2.0 ** (1 - 1 / p) if p != math.inf else 2.0
    worst = None
    for a, b in itertools.combinations(sat, 2):
        gap = max(abs(values[u] - values[v]) for u in a for v in b)
        ratio = gap / cross_distance
        worst = ratio if worst is None else min(worst, ratio)
    ok = worst is None or worst >= need * (1 - tol)
    return {"satisfied": sat, "min_cross_ratio": worst, "required": need, "ok": ok}


# ---------------------------------------------------------------------------
# labels
# ---------------------------------------------------------------------------


def audit_labels(M: MetricSpace, L, query: Callable, t: float = 1.0,
                 size_bound: Callable[[int], float] | None = None, lower: float = 1.0,
                 tol: float = K.FLOAT_TOL, min_pass_rate: float = 1.0) -> AuditReport:
    """Query every pair and check ``lower*d <= answer <= t*d`` plus label sizes.

    For the exact scheme use ``t = lower = 1``.  ``min_pass_rate`` allows an
    empirical acceptance level for randomized schemes.
    """
    from .labeling import EXACT_SCHEME

    if L.n != M.n:
        raise SizeMismatch(f"{L.n} labels for {M.n} points")
    rep = AuditReport(f"labels:{L.scheme}", exact=M.exact and L.scheme == EXACT_SCHEME,
                      tolerance=tol)
    exact = rep.exact
    total = good = 0
    errors = 0
    worst_hi, worst_lo = 0.0, math.inf
    for a in range(M.n):
        la = L.of(a)
        for b in range(a + 1, M.n):
            d = M.dist[a, b]
            try:
                ans = query(la, L.of(b))
            except SchemeMismatch as exc:
                errors += 1
                if len(rep.witnesses) < MAX_WITNESSES:
                    rep.witnesses.append({"kind": "decode-error", "pair": [a, b], "error": str(exc)})
                total += 1
                continue
            if d == 0:
                rep.pseudometric.append((a, b))
                ok = ans == 0 if exact else abs(float(ans)) <= tol
            elif exact:
                ok = Fraction(lower) * d <= ans <= Fraction(t) * d
            else:
                r = float(ans) / float(d)
                worst_hi, worst_lo = max(worst_hi, r), min(worst_lo, r)
                ok = lower * (1 - tol) <= r <= t * (1 + tol)
            total += 1
            good += ok
            if not ok and len(rep.witnesses) < MAX_WITNESSES:
                rep.witnesses.append({"kind": "query", "pair": [a, b], "distance": d, "answer": ans})
    rate = good / total if total else 1.0
    rep.stats.update(pairs=total, in_band=good, pass_rate=rate, decode_errors=errors)
    if not exact and total:
        rep.stats.update(max_ratio=worst_hi, min_ratio=worst_lo)
    rep.checks["decodable"] = errors == 0
    rep.checks["distortion_band"] = rate >= min_pass_rate
    if size_bound is not None:
        over = [(lab.rank, lab.size_in_words, size_bound(lab.rank)) for lab in L.labels
                if lab.size_in_words > size_bound(lab.rank)]
        rep.checks["label_size"] = not over
        rep.stats["max_words"] = max(L.sizes(), default=0)
        for j, s, b in over[:MAX_WITNESSES]:
            rep.witnesses.append({"kind": "label-size", "rank": j, "words": s, "bound": b})
    return rep


# ---------------------------------------------------------------------------
# bipartite hard instance
# ---------------------------------------------------------------------------


def bipartite_certify(instance, F: EmbeddingMatrix, t: float, tol: float = K.FLOAT_TOL) -> AuditReport:
    """Per-instance form of the apex argument on ``G'``.

    Every vertex of ``G'`` is adjacent to an apex ``l`` or ``r``; a column with
    ``F(l) == F(r)`` and expansion at most ``t < 3/2`` therefore spreads any
    two vertices by at most ``2t < 3`` and cannot satisfy a distance-3 pair.
    The report lists every column with ``F(l) == F(r)`` that does satisfy such
    a pair, together with the expanded apex edge that this forces.
    """
    st = getattr(instance, "structure", None) or {}
    if instance.kind != "bipartite" or "apex" not in st:
        raise NotAnEmbeddingOfGPrime("instance is not a bipartite hard instance")
    if not (0 < t < 1.5):
        raise BadParameter(f"certifier needs 1 <= t < 3/2, got {t}")
    M = instance.metric
    if F.n != M.n:
        raise NotAnEmbeddingOfGPrime(f"embedding has {F.n} rows, G' has {M.n} vertices")
    l, r = st["apex"]
    A3 = [tuple(p) for p in st["A3"]]
    P = _pairs(M, F)
    exact = P.exact
    one = P.den if exact else 1.0
    rep = AuditReport("bipartite-certify", exact=exact, tolerance=0.0 if exact else tol)
    equal_cols, diff_cols = [], []
    contradictions = []
    a3_sat_anywhere = set()
    for c in range(P.X.shape[1]):
        col = P.X[:, c]
        same = col[l] == col[r] if exact else abs(col[l] - col[r]) <= tol * max(1.0, abs(col[l]))
        hits = []
        for u, v in A3:
            gap = abs(col[u] - col[v])
            sat = gap >= P.D[u, v] if exact else gap >= P.D[u, v] * (1 - tol)
            if sat:
                a3_sat_anywhere.add((u, v))
                hits.append((u, v))
        if same:
            equal_cols.append(c)
            for u, v in hits:
                contradictions.append(_apex_witness(P, c, u, v, l, r, one))
        else:
            diff_cols.append(c)
    rep.checks["no_A3_on_equal_apex_columns"] = not contradictions
    rep.witnesses.extend(contradictions[:MAX_WITNESSES])
    rep.stats.update(columns=F.d, equal_apex_columns=len(equal_cols), distinct_apex_columns=len(diff_cols),
                     A3_pairs=len(A3), A3_satisfied=len(a3_sat_anywhere), t=t)
    return rep


def _apex_witness(P, c, u, v, l, r, one):
    col = P.X[:, c]
    spread = []
    for x in (u, v):
        apex = x if x in (l, r) else (l if P.D[x, l] == one else r)
        spread.append({"vertex": x, "apex": apex, "gap": P.value(abs(col[x] - col[apex]))})
    return {"kind": "apex-contradiction", "column": c, "pair": [u, v],
            "gap": P.value(abs(col[u] - col[v])), "apex_edges": spread,
            "implied_expansion": max(s["gap"] for s in spread)}
