"""JSON / CSV readers and writers.

Rationals are written as ``"p/q"`` strings (integers stay plain ints), floats
as JSON numbers.  Every writer takes a ``config`` dict that is embedded under
the ``"config"`` key so an output file records how it was produced.  Files
are written atomically (temporary file + rename).
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _kernel as K
from .errors import FormatError
from .instances import HardInstance
from .labeling import Label, LabelSet
from .metric import (
    EmbeddingMatrix,
    MetricSpace,
    PointSet,
    PriorityOrdering,
    WeightedTree,
    metric_from_graph,
    metric_from_points,
    metric_from_tree,
)

FORMAT_VERSION = 1


def _num(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return K.format_number(x)


def _jsonify(v):
    if isinstance(v, dict):
        return {str(k): _jsonify(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonify(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonify(x) for x in v.tolist()]
    if isinstance(v, (Fraction, float, np.floating, np.integer)) and not isinstance(v, bool):
        return _num(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload: dict) -> None:
    _write_text(path, json.dumps(_jsonify(payload), indent=1, sort_keys=False) + "\n")


def dumps(payload: dict) -> str:
    return json.dumps(_jsonify(payload), indent=1) + "\n"


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc


# ---------------------------------------------------------------------------
# metric inputs
# ---------------------------------------------------------------------------


@dataclass
class LoadedInput:
    """A parsed metric input; ``tree`` / ``points`` are set when the source had them."""

    kind: str
    metric: MetricSpace
    tree: WeightedTree | None = None
    points: PointSet | None = None
    ordering: PriorityOrdering | None = None
    instance: HardInstance | None = None


def _p_value(p) -> float:
    if p in ("inf", "infinity", math.inf):
        return math.inf
    return float(p)


def _edges(raw) -> list:
    try:
        return [(int(u), int(v), w) for u, v, w in raw]
    except (TypeError, ValueError) as exc:
        raise FormatError("edges must be [u, v, weight] triples") from exc


def _weight(w, exact: bool):
    return K.parse_number(w, exact)


def metric_payload(doc: dict) -> LoadedInput:
    """Parse the ``{"kind": ...}`` metric object."""
    kind = doc.get("kind")
    if kind == "matrix":
        M = MetricSpace.from_matrix(doc["dist"], names=doc.get("names"))
        out = LoadedInput("matrix", M)
    elif kind == "graph":
        edges = _edges(doc["edges"])
        exact = all(K.is_rational_value(w) for _, _, w in edges)
        edges = [(u, v, _weight(w, exact)) for u, v, w in edges]
        M = metric_from_graph(edges, int(doc["n"]), allow_zero=bool(doc.get("allow_zero", False)),
                              names=doc.get("names"))
        out = LoadedInput("graph", M)
    elif kind == "points":
        P = PointSet.from_rows(doc["points"], _p_value(doc.get("p", 2)))
        out = LoadedInput("points", metric_from_points(P), points=P)
    elif kind == "tree":
        edges = [(u, v, K.to_fraction(w)) for u, v, w in _edges(doc["edges"])]
        T = WeightedTree(edges, vertices=doc.get("vertices"))
        out = LoadedInput("tree", metric_from_tree(T), tree=T)
    else:
        raise FormatError(f"unknown metric kind {kind!r}")
    if doc.get("ordering") is not None:
        out.ordering = PriorityOrdering(tuple(int(x) for x in doc["ordering"]))
    return out


def metric_to_payload(M: MetricSpace) -> dict:
    doc = {"kind": "matrix", "dist": M.dist}
    if M.names is not None:
        doc["names"] = list(M.names)
    return doc


def tree_to_payload(T: WeightedTree) -> dict:
    return {"kind": "tree", "vertices": list(T.vertices), "edges": [[u, v, w] for u, v, w in T.edges()]}


def points_to_payload(P: PointSet) -> dict:
    return {"kind": "points", "p": P.p, "points": P.points}


def read_matrix_csv(path) -> MetricSpace:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise FormatError(f"{path}: empty CSV")
    names = None
    try:
        Fraction(rows[0][0].strip()) if rows[0][0].strip() else None
    except ValueError:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    cells = [[c.strip() for c in r] for r in rows]
    exact = all(K.is_rational_value(c) for r in cells for c in r)
    return MetricSpace.from_matrix(cells, exact=exact, names=names)


def write_matrix_csv(path, M: MetricSpace) -> None:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in M.dist:
        w.writerow([_num(x) for x in row])
    _write_text(path, buf.getvalue())


def load_input(path) -> LoadedInput:
    """Load a metric, tree, point set or instance file (``.csv`` = distance matrix)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return LoadedInput("matrix", read_matrix_csv(path))
    doc = read_json(path)
    if doc.get("format") == "instance":
        inst = instance_from_payload(doc)
        loaded = metric_payload(doc["metric"])
        loaded.instance = inst
        inst.metric = loaded.metric
        if inst.ordering is not None:
            loaded.ordering = inst.ordering
        return loaded
    if "metric" in doc and "kind" not in doc:
        doc = doc["metric"]
    return metric_payload(doc)


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------


def embedding_to_payload(F: EmbeddingMatrix, config: dict | None = None) -> dict:
    return {
        "format": "embedding",
        "version": FORMAT_VERSION,
        "exact": F.exact,
        "n": F.n,
        "d": F.d,
        "row_ids": list(F.row_ids),
        "support": F.supports().tolist(),
        "values": F.values,
        "blocks": list(F.blocks),
        "config": config or {},
    }


def embedding_from_payload(doc: dict) -> EmbeddingMatrix:
    if doc.get("format") != "embedding":
        raise FormatError("not an embedding file")
    exact = bool(doc.get("exact", True))
    rows = doc["values"]
    n, d = int(doc["n"]), int(doc["d"])
    if len(rows) != n or any(len(r) != d for r in rows):
        raise FormatError("embedding values do not match the declared n x d shape")
    if exact:
        vals = K.fraction_array(rows) if n and d else np.zeros((n, d), dtype=object)
    else:
        vals = np.array([[K.parse_number(x, False) for x in r] for r in rows], dtype=float).reshape(n, d)
    F = EmbeddingMatrix(vals, exact, tuple(doc.get("row_ids") or range(n)), tuple(doc.get("blocks", ())))
    declared = doc.get("support")
    if declared is not None and list(declared) != F.supports().tolist():
        raise FormatError("declared per-row support disagrees with the values")
    return F


def write_embedding(path, F: EmbeddingMatrix, config: dict | None = None) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# config", json.dumps(_jsonify(config or {}), sort_keys=True)])
        w.writerow(["row_id", "support"] + [f"c{c + 1}" for c in range(F.d)])
        for rid, sup, row in zip(F.row_ids, F.supports(), F.values):
            w.writerow([rid, int(sup)] + [_num(x) for x in row])
        _write_text(path, buf.getvalue())
    else:
        write_json(path, embedding_to_payload(F, config))


def read_embedding(path) -> tuple[EmbeddingMatrix, dict]:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        config = {}
        if rows and rows[0] and rows[0][0] == "# config":
            config = json.loads(rows[0][1])
            rows = rows[1:]
        if not rows or rows[0][:2] != ["row_id", "support"]:
            raise FormatError(f"{path}: missing row_id,support header")
        body = rows[1:]
        cells = [r[2:] for r in body]
        exact = all(K.is_rational_value(c) for r in cells for c in r)
        d = len(rows[0]) - 2
        doc = {"format": "embedding", "exact": exact, "n": len(body), "d": d,
               "row_ids": [int(r[0]) for r in body], "support": [int(r[1]) for r in body],
               "values": cells}
        return embedding_from_payload(doc), config
    doc = read_json(path)
    return embedding_from_payload(doc), doc.get("config", {})


# ---------------------------------------------------------------------------
# labels
# ---------------------------------------------------------------------------


def labels_to_payload(L: LabelSet, config: dict | None = None) -> dict:
    return {
        "format": "labels",
        "version": FORMAT_VERSION,
        "scheme": L.scheme,
        "meta": L.meta,
        "labels": [
            {"rank": lab.rank, "point": lab.point, "words": lab.size_in_words,
             "payload": list(lab.payload), "blocks": list(lab.blocks)}
            for lab in L.labels
        ],
        "config": config or {},
    }


def labels_from_payload(doc: dict) -> LabelSet:
    if doc.get("format") != "labels":
        raise FormatError("not a labels file")
    scheme = doc["scheme"]
    exact = scheme == "exact" and doc.get("meta", {}).get("exact", True)
    labels = []
    for rec in sorted(doc["labels"], key=lambda r: r["rank"]):
        payload = tuple(K.parse_number(x, exact) if exact else float(x) for x in rec["payload"])
        lab = Label(int(rec["rank"]), payload, scheme, point=rec.get("point"), blocks=tuple(rec.get("blocks", ())))
        if "words" in rec and int(rec["words"]) != lab.size_in_words:
            raise FormatError(f"label of rank {lab.rank}: declared {rec['words']} words, holds {lab.size_in_words}")
        labels.append(lab)
    return LabelSet(tuple(labels), scheme, dict(doc.get("meta", {})))


def write_labels(path, L: LabelSet, config: dict | None = None) -> None:
    write_json(path, labels_to_payload(L, config))


def read_labels(path) -> tuple[LabelSet, dict]:
    doc = read_json(path)
    return labels_from_payload(doc), doc.get("config", {})


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


def instance_to_payload(inst: HardInstance, config: dict | None = None) -> dict:
    if inst.metric is not None:
        metric = metric_to_payload(inst.metric)
    else:
        metric = points_to_payload(inst.points)
    doc = {
        "format": "instance",
        "version": FORMAT_VERSION,
        "kind": inst.kind,
        "params": inst.params,
        "metric": metric,
        "structure": inst.structure,
        "ordering": list(inst.ordering.perm) if inst.ordering is not None else None,
        "properties": inst.properties,
        "config": config or {},
    }
    if inst.points is not None and inst.metric is not None:
        doc["points"] = points_to_payload(inst.points)
    return doc


def instance_from_payload(doc: dict) -> HardInstance:
    if doc.get("format") != "instance":
        raise FormatError("not an instance file")
    st = dict(doc.get("structure", {}))
    for key in ("antipodal_pairs", "A1", "A2", "A3"):
        if key in st:
            st[key] = [tuple(p) for p in st[key]]
    order = doc.get("ordering")
    return HardInstance(doc["kind"], None, None, st,
                        PriorityOrdering(tuple(order)) if order is not None else None,
                        dict(doc.get("properties", {})), dict(doc.get("params", {})))


def write_instance(path, inst: HardInstance, config: dict | None = None) -> None:
    write_json(path, instance_to_payload(inst, config))
