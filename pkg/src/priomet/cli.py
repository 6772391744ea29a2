"""Command-line front end: ``priomet {label,embed,generate,audit,bench}``.

Exit codes: 0 when every audit passes, 2 when an audit finds violations,
3 on input or parameter errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import io as pio
from .audit import (
    AuditReport,
    audit_distortion,
    audit_labels,
    audit_prioritized_contractive,
    audit_prioritized_dimension,
    bipartite_certify,
)
from .errors import BadParameter, ExpansionViolation, PriometError, SchemeRequiresTree
from .general import chi, dimension_bound, meta_embedding, preset_beta
from .labeling import (
    C_JL,
    EXACT_SCHEME,
    PRNG_NAME,
    exact_labels,
    exact_query,
    jl_layered_labels,
    jl_query,
    jl_word_bound,
)
from .metric import MetricSpace, PriorityOrdering
from .trees import A_TERMINAL, llr_tree_embedding, prioritized_tree_embedding

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 2, 3

TREE_SCHEMES = ("tree-prioritized", "llr")
ISOMETRIC_SCHEMES = ("tree-prioritized", "llr", "cycle-optimal")
GENERATORS = ("cycle", "antipodal", "hypercube-code", "padded-prefix", "code-with-prefix", "bipartite")


class InputError(PriometError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    scheme: str | None = None
    beta: str | None = None
    t: float | None = None
    eps: float | None = None
    p: float | None = None
    seed: int = 0
    kernel: str = "auto"
    tol: float = 1e-9
    order: str = "auto"
    out: str | None = None
    version: str = __version__
    prng: str = PRNG_NAME

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")  # keeps reruns into different files byte-identical
        if d["p"] is not None and math.isinf(d["p"]):
            d["p"] = "inf"
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _p_arg(s: str) -> float:
    return math.inf if s.lower() in ("inf", "infinity") else float(s)


def _common(sp, seed=True):
    sp.add_argument("--out", help="output file (JSON unless it ends in .csv); stdout when omitted")
    sp.add_argument("--tol", type=float, default=1e-9, help="relative tolerance of the float kernel")
    sp.add_argument("--kernel", choices=("auto", "rational", "float"), default="auto")
    if seed:
        sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="priomet", description="Prioritized labelings and l_inf embeddings with exact audits.")
    ap.add_argument("--version", action="version", version=f"priomet {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("label", help="build a distance labeling and audit it")
    sp.add_argument("input")
    sp.add_argument("--scheme", choices=("exact", "jl"), default="exact")
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--p", type=_p_arg, help="override the norm of a point-set input (1 or 2)")
    sp.add_argument("--c-jl", type=float, default=C_JL)
    sp.add_argument("--order", default="auto", help="auto | identity | random")
    _common(sp)

    sp = sub.add_parser("embed", help="embed into l_inf and audit")
    sp.add_argument("input")
    sp.add_argument("--scheme", choices=("meta", "tree-prioritized", "llr", "cycle-optimal"), default="meta")
    sp.add_argument("--beta", default="exp", help="exp | dexp (meta scheme)")
    sp.add_argument("--t", type=int, default=1, help="exponent multiplier of the exp schedule")
    sp.add_argument("--order", default="auto", help="auto | identity | random")
    _common(sp)

    sp = sub.add_parser("generate", help="generate a lower-bound instance")
    sp.add_argument("kind", choices=GENERATORS)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eps", type=str, default="1/9", help="code parameter (or eps' for padded-prefix)")
    sp.add_argument("--p", type=_p_arg, default=2.0)
    sp.add_argument("--max-retries", type=int, default=1000)
    _common(sp)

    sp = sub.add_parser("audit", help="audit an embedding or label file against a metric")
    sp.add_argument("input", help="metric, tree, point-set or instance file")
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--embedding")
    grp.add_argument("--labels")
    sp.add_argument("--scheme", help="override the scheme recorded in the file")
    sp.add_argument("--beta", help="check alpha(j)=2*chi(j) and dimension beta(chi(j))")
    sp.add_argument("--t", type=float, help="distortion bound (meta: exp multiplier; bipartite: t < 3/2)")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--order", default="auto")
    _common(sp)

    sp = sub.add_parser("bench", help="run a benchmark suite")
    sp.add_argument("--suite", required=True)
    sp.add_argument("--out", default="bench-out", help="output directory")
    sp.add_argument("--no-plots", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    return ap


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _metric_for_kernel(M: MetricSpace, kernel: str) -> MetricSpace:
    if kernel == "float":
        return MetricSpace(M.as_float().astype(float), False, M.names)
    if kernel == "rational" and not M.exact:
        raise InputError("rational kernel requested but the input has non-rational distances")
    return M


def _ordering(loaded, mode: str, seed: int, items) -> PriorityOrdering:
    items = list(items)
    if mode == "auto":
        return loaded.ordering if loaded.ordering is not None else PriorityOrdering(tuple(items))
    if mode == "identity":
        return PriorityOrdering(tuple(items))
    if mode == "random":
        return PriorityOrdering.random(items, seed)
    raise InputError(f"unknown ordering mode {mode!r}")


def _emit(payload: dict, out: str | None) -> None:
    if out:
        pio.write_json(out, payload)
    else:
        sys.stdout.write(pio.dumps(payload))


def _report(rep: AuditReport, out: str | None) -> None:
    stream = sys.stdout if out else sys.stderr
    stream.write("\n".join(rep.lines()) + "\n")
    for w in rep.witnesses[:5]:
        if not rep.passed:
            stream.write(f"  witness: {json.dumps(pio._jsonify(w))}\n")


def _exit_for(rep: AuditReport) -> int:
    return EXIT_OK if rep.passed else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_label(args) -> int:
    cfg = RunConfig("label", [args.input], args.scheme, eps=args.eps if args.scheme == "jl" else None,
                    p=args.p, seed=args.seed, kernel=args.kernel, tol=args.tol, order=args.order, out=args.out)
    loaded = pio.load_input(args.input)
    M = _metric_for_kernel(loaded.metric, args.kernel)
    order = _ordering(loaded, args.order, args.seed, range(M.n))
    if args.scheme == "exact":
        L = exact_labels(M, order)
        rep = audit_labels(M, L, exact_query, t=1, lower=1, size_bound=lambda j: j, tol=args.tol)
    else:
        if loaded.points is None:
            raise InputError("the jl scheme needs a point-set input")
        P = loaded.points
        if args.p is not None:
            from .metric import PointSet, metric_from_points

            P = PointSet(P.points, float(args.p))
            M = _metric_for_kernel(metric_from_points(P), args.kernel)
        cfg.p = P.p
        L = jl_layered_labels(P, order, args.eps, args.seed, args.c_jl)
        rep = audit_labels(M, L, jl_query, t=1 + args.eps, lower=1 / (1 + args.eps),
                           size_bound=lambda j: jl_word_bound(j, args.eps, args.c_jl, P.p),
                           tol=args.tol, min_pass_rate=0.99)
    payload = pio.labels_to_payload(L, cfg.as_dict())
    payload["audit"] = rep.as_dict()
    _emit(payload, args.out)
    _report(rep, args.out)
    return _exit_for(rep)


def _embedding_audit(M: MetricSpace, F, order: PriorityOrdering, scheme: str, beta=None,
                     tol: float = 1e-9) -> AuditReport:
    rep = audit_distortion(M, F, tol)
    rep.scheme = scheme
    if scheme in ISOMETRIC_SCHEMES:
        e, c = rep.stats.get("expansion"), rep.stats.get("contraction")
        rep.checks["isometric"] = (e == 1 and c == 1) if M.exact and F.exact else \
            (e is not None and abs(float(e) - 1) <= tol and abs(float(c) - 1) <= tol)
    if beta is not None:
        prio = audit_prioritized_contractive(M, order, F, lambda j: 2 * chi(beta, j), tol)
        dim = audit_prioritized_dimension(F, order, lambda j: dimension_bound(beta, j))
        rep.merge(prio).merge(dim)
        rep.stats["beta"] = beta.describe()
    if scheme == "tree-prioritized":
        dim = audit_prioritized_dimension(F, order, lambda j: 3 * A_TERMINAL * math.log2(j + 1))
        rep.merge(dim)
        prof = dim.stats["support_profile"]
        rep.stats["c_tree"] = max((s / math.log2(j + 1) for j, s in enumerate(prof, start=1)), default=0)
    if scheme == "llr" and M.n > 1:
        bound = math.ceil(A_TERMINAL * math.log2(M.n)) + 2
        rep.checks["width"] = F.d <= bound
        rep.stats["width_bound"] = bound
    if scheme == "cycle-optimal":
        rep.checks["width"] = 2 * F.d == M.n
    return rep


def cmd_embed(args) -> int:
    beta = preset_beta(args.beta, args.t) if args.scheme == "meta" else None
    cfg = RunConfig("embed", [args.input], args.scheme, beta=beta.describe() if beta else None,
                    t=args.t if args.scheme == "meta" else None, seed=args.seed,
                    kernel=args.kernel, tol=args.tol, order=args.order, out=args.out)
    loaded = pio.load_input(args.input)
    M = _metric_for_kernel(loaded.metric, args.kernel)
    if args.scheme in TREE_SCHEMES:
        if loaded.tree is None:
            raise SchemeRequiresTree(f"scheme {args.scheme!r} needs a tree input")
        T = loaded.tree
        order = _ordering(loaded, args.order, args.seed, T.vertices)
        F = prioritized_tree_embedding(T, order) if args.scheme == "tree-prioritized" else llr_tree_embedding(T)
    elif args.scheme == "cycle-optimal":
        inst = loaded.instance
        if inst is None or inst.kind != "cycle":
            raise BadParameter("cycle-optimal needs a cycle instance file (priomet generate cycle)")
        from .instances import cycle_optimal_embedding

        order = _ordering(loaded, args.order, args.seed, range(M.n))
        F = cycle_optimal_embedding(int(inst.params["n"]))
    else:
        order = _ordering(loaded, args.order, args.seed, range(M.n))
        F = meta_embedding(M, order, beta)
    cfg_d = cfg.as_dict()
    cfg_d["ordering"] = list(order.perm)
    rep = _embedding_audit(M, F, order, args.scheme, beta, args.tol)
    if args.out and args.out.lower().endswith(".csv"):
        pio.write_embedding(args.out, F, cfg_d)
        pio.write_json(Path(args.out).with_suffix(".audit.json"), {"audit": rep.as_dict(), "config": cfg_d})
    else:
        payload = pio.embedding_to_payload(F, cfg_d)
        payload["audit"] = rep.as_dict()
        _emit(payload, args.out)
    _report(rep, args.out)
    return _exit_for(rep)


def _fraction_arg(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a number: {s!r}") from exc


def cmd_generate(args) -> int:
    from . import instances as I

    eps = _fraction_arg(args.eps)
    cfg = RunConfig("generate", [], args.kind, eps=float(eps), p=args.p, seed=args.seed,
                    kernel=args.kernel, tol=args.tol, out=args.out)
    if args.kind == "cycle":
        inst = I.cycle_instance(args.n)
    elif args.kind == "antipodal":
        inst = I.antipodal_basis(args.n, args.p)
    elif args.kind == "hypercube-code":
        inst = I.hypercube_code(args.n, eps)
    elif args.kind == "padded-prefix":
        inst = I.padded_prefix_set(args.n, eps)
    elif args.kind == "code-with-prefix":
        inst = I.code_with_prefix(args.n, eps)
    else:
        inst = I.random_bipartite_hard(args.n, args.seed, args.max_retries)
    _emit(pio.instance_to_payload(inst, cfg.as_dict()), args.out)
    stream = sys.stdout if args.out else sys.stderr
    for k, v in inst.properties.items():
        stream.write(f"  {k} = {pio._jsonify(v)}\n")
    return EXIT_OK


def _audit_labels_file(args, loaded, M, cfg) -> AuditReport:
    L, lcfg = pio.read_labels(args.labels)
    if L.scheme == EXACT_SCHEME:
        return audit_labels(M, L, exact_query, t=1, lower=1, size_bound=lambda j: j, tol=args.tol)
    eps = args.eps if args.eps is not None else L.meta.get("eps")
    if eps is None:
        raise InputError("jl labels need --eps")
    c_jl = L.meta.get("c_jl", C_JL)
    return audit_labels(M, L, jl_query, t=1 + eps, lower=1 / (1 + eps),
                        size_bound=lambda j: jl_word_bound(j, eps, c_jl, L.meta.get("p", 2.0)), tol=args.tol, min_pass_rate=0.99)


def cmd_audit(args) -> int:
    cfg = RunConfig("audit", [args.input, args.embedding or args.labels], args.scheme, beta=args.beta,
                    t=args.t, eps=args.eps, seed=args.seed, kernel=args.kernel, tol=args.tol,
                    order=args.order, out=args.out)
    loaded = pio.load_input(args.input)
    M = _metric_for_kernel(loaded.metric, args.kernel)
    if args.labels:
        rep = _audit_labels_file(args, loaded, M, cfg)
    else:
        F, fcfg = pio.read_embedding(args.embedding)
        if F.n != M.n:
            raise InputError(f"embedding has {F.n} rows but the metric has {M.n} points")
        scheme = args.scheme or fcfg.get("scheme") or "embedding"
        if args.order == "auto" and fcfg.get("ordering") is not None:
            order = PriorityOrdering(tuple(fcfg["ordering"]))
        else:
            order = _ordering(loaded, args.order, args.seed, F.row_ids)
        beta = None
        if args.beta:
            beta = preset_beta(args.beta, int(args.t) if args.t and args.beta.startswith("exp") else 1)
        elif scheme == "meta" and fcfg.get("beta"):
            kind = "doubly-exponential" if fcfg["beta"] == "2^(2^i)" else "exponential"
            beta = preset_beta(kind, int(fcfg.get("t") or 1))
        rep = _embedding_audit(M, F, order, scheme, beta, args.tol)
        inst = loaded.instance
        if inst is not None and inst.kind == "bipartite" and args.t is not None and args.t < 1.5:
            rep.merge(bipartite_certify(inst, F, args.t, args.tol))
    cfg_d = cfg.as_dict()
    payload = {"format": "audit", "audit": rep.as_dict(), "config": cfg_d}
    if args.out:
        pio.write_json(args.out, payload)
    else:
        sys.stdout.write(pio.dumps(payload))
    _report(rep, args.out)
    return _exit_for(rep)


def cmd_bench(args) -> int:
    from . import bench

    cfg = RunConfig("bench", [], args.suite, seed=args.seed, out=args.out)
    rows = bench.run_suite(args.suite, args.seed)
    written = bench.write_bench(args.suite, rows, args.out, plots=not args.no_plots, config=cfg.as_dict())
    print(bench.summary(rows))
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK if all(r["bound_ok"] for r in rows) else EXIT_VIOLATION


COMMANDS = {"label": cmd_label, "embed": cmd_embed, "generate": cmd_generate,
            "audit": cmd_audit, "bench": cmd_bench}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ExpansionViolation as exc:
        print(f"priomet: violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (PriometError, OSError, KeyError) as exc:
        print(f"priomet: input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
