"""Desk-scale benchmark suites producing CSV tables (and optional PNGs)."""
from __future__ import annotations

import csv
import io as _io
import math
from pathlib import Path

from .audit import audit_distortion, audit_labels, audit_prioritized_contractive
from .errors import BadParameter
from .general import chi, dimension_bound, meta_embedding, preset_beta
from .io import _write_text
from .labeling import exact_labels, jl_layered_labels, jl_query, jl_word_bound
from .metric import EmbeddingMatrix, PriorityOrdering, metric_from_points, metric_from_tree
from .samples import gaussian_points, random_graph_metric, random_tree
from .trees import A_TERMINAL, llr_tree_embedding, prioritized_tree_embedding

COLUMNS = ["family", "scheme", "n", "seed", "distortion", "expansion", "bound_ok",
           "max_dim", "max_words", "c_measured", "profile"]


def _profile(F: EmbeddingMatrix, order: PriorityOrdering) -> list[int]:
    sup = F.supports()
    return [int(sup[F.row_index(x)]) for x in order.perm]


def _fmt(x):
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.6g}"
    return str(x)


def suite_table2(seed: int = 0, sizes=(32, 64, 128)) -> list[dict]:
    """Meta-embedding profiles for exp(1), exp(2) and doubly-exponential schedules,
    plus the exact labels, on random graph metrics."""
    rows = []
    for n in sizes:
        M = random_graph_metric(n, seed + n)
        order = PriorityOrdering.random(n, seed + 7 * n)
        L = exact_labels(M, order)
        rows.append({"family": "random-graph", "scheme": "exact-labels", "n": n, "seed": seed,
                     "distortion": 1, "expansion": 1, "bound_ok": L.sizes() == list(range(1, n + 1)),
                     "max_dim": "", "max_words": max(L.sizes()), "c_measured": "",
                     "profile": ";".join(map(str, L.sizes()))})
        for kind, t in (("exponential", 1), ("exponential", 2), ("doubly-exponential", 1)):
            beta = preset_beta(kind, t)
            F = meta_embedding(M, order, beta)
            dist = audit_distortion(M, F)
            prio = audit_prioritized_contractive(M, order, F, lambda j: 2 * chi(beta, j))
            prof = _profile(F, order)
            dim_ok = all(s <= dimension_bound(beta, j) for j, s in enumerate(prof, start=1))
            name = f"meta/{beta.describe()}"
            worst = max(float(s) / max(1, dimension_bound(beta, j)) for j, s in enumerate(prof, start=1))
            rows.append({"family": "random-graph", "scheme": name, "n": n, "seed": seed,
                         "distortion": float(dist.stats["distortion"]),
                         "expansion": float(dist.stats["expansion"]),
                         "bound_ok": prio.passed and dim_ok, "max_dim": max(prof), "max_words": "",
                         "c_measured": worst, "profile": ";".join(map(str, prof))})
    return rows


def suite_trees(seed: int = 0, sizes=(16, 64, 256, 512)) -> list[dict]:
    """Prioritized versus classic separator widths on random trees."""
    rows = []
    for n in sizes:
        T = random_tree(n, seed + n)
        M = metric_from_tree(T)
        order = PriorityOrdering.random(T.vertices, seed + 3 * n)
        for name, F in (("tree-prioritized", prioritized_tree_embedding(T, order)),
                        ("llr", llr_tree_embedding(T))):
            rep = audit_distortion(M, F)
            prof = _profile(F, order)
            c = max(s / math.log2(j + 1) for j, s in enumerate(prof, start=1))
            iso = rep.stats["expansion"] == 1 and rep.stats["contraction"] == 1
            ok = iso and (name == "llr" or c <= 3 * A_TERMINAL)
            rows.append({"family": "random-tree", "scheme": name, "n": n, "seed": seed,
                         "distortion": float(rep.stats["distortion"]), "expansion": float(rep.stats["expansion"]),
                         "bound_ok": ok, "max_dim": F.d, "max_words": "", "c_measured": c,
                         "profile": ";".join(map(str, prof))})
    return rows


def suite_labels(seed: int = 0, sizes=(100, 300), eps: float = 0.5) -> list[dict]:
    """Layered JL labels on Gaussian points in R^20."""
    rows = []
    for n in sizes:
        P = gaussian_points(n, 20, seed + n)
        M = metric_from_points(P)
        order = PriorityOrdering.random(n, seed)
        L = jl_layered_labels(P, order, eps, seed)
        rep = audit_labels(M, L, jl_query, t=1 + eps, lower=1 / (1 + eps),
                           size_bound=lambda j: jl_word_bound(j, eps), min_pass_rate=0.99)
        rows.append({"family": "gaussian-R20", "scheme": f"jl/eps={eps}", "n": n, "seed": seed,
                     "distortion": rep.stats.get("max_ratio", 1) / rep.stats.get("min_ratio", 1),
                     "expansion": rep.stats.get("max_ratio", 1), "bound_ok": rep.passed,
                     "max_dim": "", "max_words": max(L.sizes()), "c_measured": rep.stats["pass_rate"],
                     "profile": ";".join(map(str, L.sizes()))})
    return rows


SUITES = {"table2-desk": suite_table2, "trees": suite_trees, "labels": suite_labels}


def run_suite(name: str, seed: int = 0) -> list[dict]:
    if not name or name not in SUITES:
        raise BadParameter(f"unknown bench suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](seed)


def rows_to_csv(rows: list[dict]) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(row.get(k, "")) for k in COLUMNS})
    return buf.getvalue()


def write_bench(name: str, rows: list[dict], out, plots: bool = True, config: dict | None = None) -> list[Path]:
    """Write ``<out>/<name>.csv`` (with a config comment line) and its figures."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    header = ""
    if config:
        import json

        header = "# config " + json.dumps(config, sort_keys=True, default=str) + "\n"
    _write_text(csv_path, header + rows_to_csv(rows))
    written = [csv_path]
    if plots:
        from . import plots as P

        written.append(P.support_profiles(rows, out / f"{name}-profiles.png", f"{name}: per-rank support"))
        if name == "trees":
            written.append(P.width_vs_n(rows, out / f"{name}-widths.png", "tree embedding widths"))
    return written


def summary(rows: list[dict]) -> str:
    lines = []
    for r in rows:
        lines.append(f"{r['family']:<14}{r['scheme']:<24}n={r['n']:<5} ok={bool(r['bound_ok'])!s:<6}"
                     f"dim={r['max_dim']!s:<5} words={r['max_words']!s:<6}")
    return "\n".join(lines)


__all__ = ["SUITES", "run_suite", "write_bench", "rows_to_csv", "summary"]
