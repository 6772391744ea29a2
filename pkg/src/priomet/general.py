"""Prioritized l_infinity embeddings of arbitrary finite metrics.

The meta-embedding assigns one coordinate per priority rank:
``f_j(x) = d(x, S_{chi(j)-1} | {x_j})`` where ``S_i`` are the first ``beta(i)``
points.  It is 1-Lipschitz, contracts pairs through ``x_j`` by at most
``2*chi(j)`` and keeps ``x_j`` inside the first ``beta(chi(j))`` coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._kernel import ceil_log2
from .errors import BadParameter, ScheduleExhausted
from .metric import EmbeddingMatrix, MetricSpace, PriorityOrdering


@dataclass(frozen=True)
class BetaSchedule:
    """Nondecreasing level thresholds ``beta(1), beta(2), ...``.

    ``kind`` is ``"exponential"`` (``2**(t*i)``), ``"doubly-exponential"``
    (``2**(2**i)``) or ``"custom"`` (finite ``table`` with ``table[i-1] = beta(i)``).
    """

    kind: str
    t: int = 1
    table: tuple = ()

    def __post_init__(self):
        if self.kind == "exponential" and self.t < 1:
            raise BadParameter("exponential schedule needs t >= 1")
        if self.kind == "custom":
            tab = self.table
            if not tab:
                raise BadParameter("custom schedule needs a nonempty table")
            if tab[0] < 1 or any(b <= a for a, b in zip(tab, tab[1:])):
                raise BadParameter("custom schedule must be >= 1 and strictly increasing")
        elif self.kind not in ("exponential", "doubly-exponential"):
            raise BadParameter(f"unknown schedule kind {self.kind!r}")

    @property
    def levels(self) -> int | None:
        """Number of defined levels (None when unbounded)."""
        return len(self.table) if self.kind == "custom" else None

    def __call__(self, i: int) -> int:
        if i < 1:
            raise ValueError("levels start at 1")
        if self.kind == "exponential":
            return 2 ** (self.t * i)
        if self.kind == "doubly-exponential":
            return 2 ** (2**i)
        if i > len(self.table):
            raise ScheduleExhausted(f"custom schedule has only {len(self.table)} levels")
        return self.table[i - 1]

    def describe(self) -> str:
        if self.kind == "exponential":
            return f"2^({self.t}i)"
        if self.kind == "doubly-exponential":
            return "2^(2^i)"
        return "custom" + str(list(self.table))


def preset_beta(kind: str, t: int = 1) -> BetaSchedule:
    aliases = {"exp": "exponential", "exponential": "exponential",
               "doubly-exp": "doubly-exponential", "dexp": "doubly-exponential",
               "doubly-exponential": "doubly-exponential"}
    if kind not in aliases:
        raise BadParameter(f"unknown beta preset {kind!r}")
    if aliases[kind] == "exponential" and (not isinstance(t, int) or t < 1):
        raise BadParameter(f"t must be a positive integer, got {t!r}")
    return BetaSchedule(aliases[kind], t)


def chi(beta: BetaSchedule, j: int) -> int:
    """Minimal level ``i >= 1`` with ``beta(i) >= j``."""
    if j < 1:
        raise ValueError("ranks start at 1")
    if beta.kind == "exponential":
        # smallest i >= 1 with t*i >= ceil(log2 j)
        return max(1, -(-ceil_log2(j) // beta.t))
    i = 1
    while beta(i) < j:
        i += 1
        if beta.levels is not None and i > beta.levels:
            raise ScheduleExhausted(f"no level of {beta.describe()} reaches rank {j}")
    return i


def distortion_bound(beta: BetaSchedule, j: int) -> int:
    return 2 * chi(beta, j)


def dimension_bound(beta: BetaSchedule, j: int) -> int:
    return beta(chi(beta, j))


def meta_embedding(M: MetricSpace, order: PriorityOrdering, beta: BetaSchedule) -> EmbeddingMatrix:
    """One column per rank; column ``j`` is the distance to ``S_{chi(j)-1} + {x_j}``.

    Rows follow the point indices of ``M``; columns follow priority ranks.
    """
    order.check_covers(range(M.n))
    n = M.n
    perm = list(order.perm)
    levels = [chi(beta, j) for j in range(1, n + 1)]
    # prefix[:, k] = d(x, {x_1..x_{k+1}})
    by_rank = M.dist[:, perm]
    prefix = np.minimum.accumulate(by_rank, axis=1) if n else by_rank
    out = np.empty((n, n), dtype=object if M.exact else float)
    for j in range(1, n + 1):
        col = by_rank[:, j - 1]
        prev = levels[j - 1] - 1
        if prev >= 1:
            size = min(n, beta(prev))
            col = np.minimum(col, prefix[:, size - 1])
        out[:, j - 1] = col
    blocks = tuple(
        {"kind": "meta", "level": lvl, "columns": [j for j in range(1, n + 1) if levels[j - 1] == lvl]}
        for lvl in sorted(set(levels))
    )
    return EmbeddingMatrix(out, M.exact, tuple(range(n)), blocks)


def uniform_clique_embedding(n: int, scale=1) -> EmbeddingMatrix:
    """``n`` distinct binary codewords times ``scale``: all pairs at l_inf distance ``scale``."""
    if n < 1:
        raise BadParameter("need at least one point")
    width = ceil_log2(n)
    exact = not isinstance(scale, float)
    s = Fraction(scale) if exact else scale
    vals = np.empty((n, width), dtype=object if exact else float)
    for x in range(n):
        for b in range(width):
            bit = (x >> (width - 1 - b)) & 1
            vals[x, b] = s * bit
    return EmbeddingMatrix(vals, exact)


def sign_code_embedding(members, n_total: int, scale=1) -> EmbeddingMatrix:
    """Distinct ``{+-1}`` codes times ``scale`` on ``members``; every other row is 0."""
    members = list(members)
    width = max(1, ceil_log2(len(members))) if len(members) > 1 else 0
    vals = np.empty((n_total, width), dtype=object)
    vals[:] = Fraction(0)
    s = Fraction(scale)
    for code, x in enumerate(members):
        for b in range(width):
            bit = (code >> (width - 1 - b)) & 1
            vals[x, b] = s if bit else -s
    return EmbeddingMatrix(vals, True)


def hstack(*parts: EmbeddingMatrix) -> EmbeddingMatrix:
    exact = all(p.exact for p in parts)
    vals = np.concatenate([p.values.astype(object) if exact else p.as_float() for p in parts], axis=1)
    blocks = []
    offset = 0
    for p in parts:
        blocks.append({"start": offset + 1, "stop": offset + p.d})
        offset += p.d
    return EmbeddingMatrix(vals, exact, parts[0].row_ids, tuple(blocks))


def log2_ceil_profile(n: int) -> list[int]:
    """``ceil(log2 j)`` for ``j = 1..n`` (used by the bench reports)."""
    return [math.ceil(math.log2(j)) if j > 1 else 0 for j in range(1, n + 1)]
