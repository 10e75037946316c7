"""Command line entry point: absalign.

Reports are JSON on stdout by default (--csv switches, --out redirects) and
are byte-identical across runs on identical inputs: maps are serialized in
sorted key order and every tunable default (cutoffs, modes, bases) is
recorded in the report parameters.
"""

import argparse
import functools
import json
import sys

from . import metrics
from .dag import SubgraphSelector
from .errors import AbsalignError
from .query import DEFAULT_SPLIT_MIN_MASS, filter_instances, parse_query
from .propagate import write_weighted_jsonl
from .session import Session, SessionConfig


def _add_session_args(parser, instances_required=True):
    parser.add_argument("--dag", required=True, metavar="PATH", help="hierarchy file")
    parser.add_argument(
        "--dag-format", choices=["json", "tsv", "icd9"], default=None,
        help="hierarchy format (default: inferred from the extension)",
    )
    parser.add_argument(
        "--instances", required=instances_required, metavar="PATH",
        help="JSON Lines instance file",
    )
    parser.add_argument(
        "--kind", choices=["dense", "sparse", "labels"], default=None,
        help="evidence kind (default: detected per record)",
    )
    parser.add_argument("--mapping", metavar="PATH", help="dense output mapping JSON")
    parser.add_argument("--truth", metavar="PATH", help="JSON Lines truth file")
    parser.add_argument(
        "--mode", choices=["descendant-set", "literal"], default="descendant-set",
        help="propagation mode (default: descendant-set; literal reproduces a "
             "bottom-up child sum that double-counts on non-tree DAGs)",
    )
    parser.add_argument(
        "--normalized", action="store_true",
        help="require dense vectors to sum to 1 within 1e-6",
    )
    parser.add_argument(
        "--threads", type=int, default=None, metavar="N",
        help="worker cap for propagation (default: available cores)",
    )
    parser.add_argument(
        "--cache-dir", metavar="PATH", default=None,
        help="cache weighted DAGs here, keyed by input digests (default: off)",
    )


def _add_output_args(parser):
    parser.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    parser.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")


def _session_from(args, instances=True):
    return Session.load(SessionConfig(
        dag_path=args.dag,
        dag_format=args.dag_format,
        instances_path=getattr(args, "instances", None) if instances else None,
        kind=getattr(args, "kind", None),
        mapping_path=getattr(args, "mapping", None),
        truth_path=getattr(args, "truth", None),
        mode=getattr(args, "mode", "descendant-set"),
        normalized=getattr(args, "normalized", False),
        threads=getattr(args, "threads", None),
        cache_dir=getattr(args, "cache_dir", None),
    ))


def _emit(text, out_path):
    if not text.endswith("\n"):
        text += "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_report(report, args, session):
    report.params.setdefault("propagation_mode", session.config.mode)
    text = report.to_csv() if args.csv else report.to_json()
    _emit(text, args.out)


def _parse_base(text):
    return 2 if text == "2" else "e"


def _parse_pairs(text):
    if text == "co-supported":
        return "co-supported"
    if text.startswith("level:"):
        return ("level", int(text.split(":", 1)[1]))
    pairs = []
    for chunk in text.split(","):
        sides = chunk.split("|")
        if len(sides) != 2 or not sides[0] or not sides[1]:
            raise argparse.ArgumentTypeError(
                f"bad pair {chunk!r}; expected co-supported, level:L, or a|b,c|d"
            )
        pairs.append((sides[0], sides[1]))
    return pairs


def build_parser():
    parser = argparse.ArgumentParser(
        prog="absalign",
        description="Measure how closely model outputs and dataset labels follow a concept hierarchy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="parse and validate a hierarchy file")
    p_validate.add_argument("--dag", required=True, metavar="PATH")
    p_validate.add_argument("--dag-format", choices=["json", "tsv", "icd9"], default=None)
    p_validate.set_defaults(func=cmd_validate)

    p_prop = sub.add_parser("propagate", help="write per-instance weighted DAGs as JSON Lines")
    _add_session_args(p_prop)
    p_prop.add_argument("--out", metavar="PATH", help="output path (default: stdout)")
    p_prop.set_defaults(func=cmd_propagate)

    p_metric = sub.add_parser("metric", help="compute an alignment metric")
    msub = p_metric.add_subparsers(dest="which", required=True)

    p_acc = msub.add_parser("accuracy", help="errors at one level resolved at a higher level")
    _add_session_args(p_acc)
    _add_output_args(p_acc)
    p_acc.add_argument("--from", dest="from_level", type=int, required=True, metavar="L")
    p_acc.add_argument("--to", dest="to_level", type=int, required=True, metavar="L")
    p_acc.add_argument("--group-by-level", type=int, default=None, metavar="L",
                       help="report per concept at this level (groups by the truth's ancestor)")
    p_acc.set_defaults(func=cmd_metric_accuracy)

    p_unc = msub.add_parser("uncertainty", help="mean entropy reduction between two levels")
    _add_session_args(p_unc)
    _add_output_args(p_unc)
    p_unc.add_argument("--from", dest="from_level", type=int, required=True, metavar="L")
    p_unc.add_argument("--to", dest="to_level", type=int, required=True, metavar="L")
    p_unc.add_argument("--base", choices=["2", "e"], default="2",
                       help="entropy base (default: 2, i.e. bits)")
    p_unc.add_argument("--group-by-level", type=int, default=None, metavar="L")
    p_unc.set_defaults(func=cmd_metric_uncertainty)

    p_pref = msub.add_parser("preference", help="max-mass comparison between two node sets")
    _add_session_args(p_pref)
    _add_output_args(p_pref)
    p_pref.add_argument("--left", required=True, metavar="SELECTOR",
                        help="node:ID, down:ID, up:ID, updown:ID, level:L, or all")
    p_pref.add_argument("--right", required=True, metavar="SELECTOR")
    p_pref.add_argument("--value-kind", choices=["value", "aggregate"], default="aggregate",
                        help="compare direct values or propagated aggregates (default: aggregate)")
    p_pref.set_defaults(func=cmd_metric_preference)

    p_conf = msub.add_parser("concept-confusion", help="rank node pairs by joint plausibility")
    _add_session_args(p_conf)
    _add_output_args(p_conf)
    p_conf.add_argument("--pairs", type=_parse_pairs, default="co-supported",
                        metavar="SPEC", help="co-supported (default), level:L, or a|b,c|d")
    p_conf.add_argument("--pair-mode", choices=["raw", "normalized"], default="raw",
                        help="raw entropy terms (default) or per-pair normalization; "
                             "label evidence always uses normalized")
    p_conf.add_argument("--exclude-related", action="store_true",
                        help="drop ancestor/descendant pairs, which are confusable by definition")
    p_conf.add_argument("--top", type=int, default=None, metavar="K",
                        help="report only the K highest-scoring pairs")
    p_conf.add_argument("--base", choices=["2", "e"], default="2")
    p_conf.set_defaults(func=cmd_metric_confusion)

    p_acck = msub.add_parser("acc-at-k", help="fraction of truths inside the top K values")
    _add_session_args(p_acck)
    _add_output_args(p_acck)
    p_acck.add_argument("--top", type=int, required=True, metavar="K",
                        help="K highest-value nodes to search for the truth")
    p_acck.set_defaults(func=cmd_metric_acc_at_k)

    p_query = sub.add_parser("query", help="filter instances by an alignment pattern")
    p_query.add_argument("text", metavar="QUERY",
                         help="e.g. 'count(level=2, min_mass=0.1) == 1'")
    _add_session_args(p_query)
    _add_output_args(p_query)
    p_query.add_argument("--min-mass", type=float, default=DEFAULT_SPLIT_MIN_MASS, metavar="F",
                         help="minimum mass for split() operands (default: 0.1)")
    p_query.set_defaults(func=cmd_query)

    p_serve = sub.add_parser("serve", help="serve the session over a read-only JSON API")
    _add_session_args(p_serve, instances_required=False)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui", metavar="DIR", default=None,
                         help="static UI bundle to serve at / (default: frontend/dist if present)")
    p_serve.set_defaults(func=cmd_serve)

    return parser


# ------------------------------------------------------------------ commands

def cmd_validate(args):
    session = _session_from(args, instances=False)
    dag = session.dag
    lines = [f"{len(dag)} nodes, {len(dag.levels)} levels"]
    for entry in session.level_summary():
        lines.append(f"level {entry['level']}: {entry['count']} nodes")
    lines.append(f"roots: {', '.join(dag.roots)}")
    lines.append(f"edges: {len(dag.edges())}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_propagate(args):
    session = _session_from(args)
    wds = session.weighted()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_weighted_jsonl(wds, fh)
    else:
        write_weighted_jsonl(wds, sys.stdout)
    return 0


def cmd_metric_accuracy(args):
    session = _session_from(args)
    fn = functools.partial(
        metrics.accuracy_alignment,
        dag=session.dag, truths=session.truths,
        from_level=args.from_level, to_level=args.to_level,
    )
    if args.group_by_level is not None:
        report = metrics.group_by_concept(
            fn, session.weighted(), session.dag, session.truths, args.group_by_level
        )
    else:
        report = fn(session.weighted())
    _emit_report(report, args, session)
    return 0


def cmd_metric_uncertainty(args):
    session = _session_from(args)
    fn = functools.partial(
        metrics.uncertainty_alignment,
        dag=session.dag,
        from_level=args.from_level, to_level=args.to_level,
        base=_parse_base(args.base),
    )
    if args.group_by_level is not None:
        report = metrics.group_by_concept(
            fn, session.weighted(), session.dag, session.truths, args.group_by_level
        )
    else:
        report = fn(session.weighted())
    _emit_report(report, args, session)
    return 0


def cmd_metric_preference(args):
    session = _session_from(args)
    report = metrics.subgraph_preference(
        session.weighted(), session.dag,
        SubgraphSelector.from_text(args.left),
        SubgraphSelector.from_text(args.right),
        value_kind=args.value_kind,
    )
    _emit_report(report, args, session)
    return 0


def cmd_metric_confusion(args):
    session = _session_from(args)
    report = metrics.concept_confusion(
        session.weighted(), session.dag,
        pairs=args.pairs,
        pair_mode=args.pair_mode,
        exclude_related=args.exclude_related,
        top=args.top,
        base=_parse_base(args.base),
    )
    _emit_report(report, args, session)
    return 0


def cmd_metric_acc_at_k(args):
    session = _session_from(args)
    report = metrics.acc_at_k(session.records, session.dag, session.truths, args.top)
    _emit_report(report, args, session)
    return 0


def cmd_query(args):
    session = _session_from(args)
    query = parse_query(args.text, session.dag, split_min_mass=args.min_mass)
    ids, fraction = filter_instances(query, session.weighted(), session.dag)
    payload = {
        "query": args.text,
        "parsed": query.describe(),
        "params": {"split_min_mass": args.min_mass, "propagation_mode": session.config.mode},
        "total": len(session.records),
        "matched": len(ids),
        "fraction": fraction,
        "ids": ids,
    }
    if args.csv:
        lines = ["instance_id"] + ids
        _emit("\n".join(lines), args.out)
    else:
        _emit(json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2), args.out)
    return 0


def cmd_serve(args):
    from .server import serve  # deferred: pulls in fastapi/uvicorn

    session = _session_from(args, instances=args.instances is not None)
    return serve(session, host=args.host, port=args.port, ui_dir=args.ui)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AbsalignError as exc:
        print(f"absalign: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"absalign: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
