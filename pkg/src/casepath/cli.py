"""Command-line entry point: ingest | split | predict | evaluate.

Every run is reproducible from its flags: all randomness derives from
--seed, and every emitted record embeds the effective configuration.
Reports and prediction records are line-delimited JSON on stdout (or
--out); progress and timing go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .cases import PredictionQuery
from .evaluate import evaluate
from .graph import ingest_triples
from .predict import EngineParams, MODES, run_query
from .similarity import SimilarityIndex
from .split import load_split, make_split, validate_split, write_split


def _add_graph_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--subclass-relation", default="P279",
                        help="relation treated as the class hierarchy (exact or suffix match)")
    parser.add_argument("--type-relation", default="P31",
                        help="relation linking an entity to its types")
    parser.add_argument("--idf-norm", default="max", choices=["max", "l2", "none"])
    parser.add_argument("--importance-counting", default="either", choices=["either", "tail"])
    parser.add_argument("--no-type-closure-expansion", action="store_true",
                        help="similarity vectors use only an entity's own subclass chain")


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--cases-head", type=int, default=20,
                        help="cases retrieved by overall similarity")
    parser.add_argument("--cases-cov", type=int, default=5,
                        help="extra cases retrieved by relation coverage")
    parser.add_argument("--n-paths", type=int, default=100,
                        help="paths sampled per case and kept per relation")
    parser.add_argument("--epsilon", type=float, default=5.0,
                        help="smoothing constant in path scores")
    parser.add_argument("--bag-cap", type=int, default=10_000,
                        help="max traversal endpoints kept per hop")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--attempts-factor", type=int, default=20,
                        help="walk attempts per requested path")
    parser.add_argument("--mode", default="refined+base", choices=list(MODES))
    parser.add_argument("--refine-top-k", type=int, default=None,
                        help="refine only the top K base candidates (default: all)")
    parser.add_argument("--cov-may-reuse-causes", action="store_true",
                        help="let the coverage pass reselect causes already picked")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: available parallelism)")


def _apply_config_file(args: argparse.Namespace) -> None:
    """Fill in values from --config for flags left at their defaults."""
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as handle:
        values = json.load(handle)
    for key, value in values.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"unknown config key: {key}")
        if getattr(args, f"_cli_set_{attr}", False):
            continue
        setattr(args, attr, value)


def _params(args: argparse.Namespace) -> EngineParams:
    return EngineParams(
        n_head=args.cases_head,
        n_cov=args.cases_cov,
        n_paths=args.n_paths,
        epsilon=args.epsilon,
        bag_cap=args.bag_cap,
        seed=args.seed,
        attempts_factor=args.attempts_factor,
        mode=args.mode,
        refine_top_k=args.refine_top_k,
        unique_causes_across_passes=not args.cov_may_reuse_causes,
    )


def _load(args: argparse.Namespace, path: str):
    graph = ingest_triples(path, args.subclass_relation, args.type_relation)
    sim = SimilarityIndex(
        graph,
        args.idf_norm,
        args.importance_counting,
        not args.no_type_closure_expansion,
    )
    return graph, sim


def _config_echo(args: argparse.Namespace, params: EngineParams, **extra) -> dict:
    echo = params.as_dict()
    echo.update(
        subclass_relation=args.subclass_relation,
        type_relation=args.type_relation,
        idf_norm=args.idf_norm,
        importance_counting=args.importance_counting,
        type_closure_expansion=not args.no_type_closure_expansion,
    )
    echo.update(extra)
    return echo


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _step_names(graph, steps) -> list[str]:
    return [
        ("~" if step.inverse else "") + graph.relation_name(step.relation)
        for step in steps
    ]


def cmd_ingest(args: argparse.Namespace) -> int:
    started = time.perf_counter()

    def lines():
        for path in args.paths:
            with open(path, encoding="utf-8") as handle:
                yield from handle

    graph = ingest_triples(lines(), args.subclass_relation, args.type_relation)
    summary = {
        "files": list(args.paths),
        "entities": graph.n_entities,
        "relations": graph.n_relations,
        "triples": graph.n_triples,
        "subclass_relation_resolved": (
            graph.relation_name(graph.subclass_relation)
            if graph.subclass_relation is not None else None
        ),
        "type_relation_resolved": (
            graph.relation_name(graph.type_relation)
            if graph.type_relation is not None else None
        ),
    }
    text = json.dumps(summary, sort_keys=True)
    if args.summary_out:
        Path(args.summary_out).write_text(text + "\n", encoding="utf-8")
    print(text)
    print(f"ingested in {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    graph = ingest_triples(args.input, args.subclass_relation, args.type_relation)
    split = make_split(graph, args.n_test, args.n_valid, args.seed)
    problems = validate_split(split)
    if problems:
        for p in problems[:20]:
            print(f"invalid split: {p}", file=sys.stderr)
        return 1
    write_split(split, args.out_dir)
    print(json.dumps({
        "out_dir": str(args.out_dir),
        "train": len(split.train),
        "valid_connections": len(split.valid_connections),
        "valid_triples": len(split.valid_triples),
        "test_connections": len(split.test_connections),
        "test_triples": len(split.test_triples),
        "seed": args.seed,
    }, sort_keys=True))
    return 0


def _queries_from_args(args: argparse.Namespace) -> list[PredictionQuery]:
    queries = []
    if args.query_file:
        with open(args.query_file, encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                payload = json.loads(line)
                queries.append(PredictionQuery(
                    cause=payload["cause"],
                    causal_relation=payload["relation"],
                    target_relations=tuple(payload["targets"]),
                    extra_cause_triples=tuple(tuple(t) for t in payload.get("extra_triples", ())),
                ))
    if args.cause:
        if not args.causal_relation or not args.target_relation:
            raise ValueError("--cause needs --causal-relation and --target-relation")
        queries.append(PredictionQuery(
            cause=args.cause,
            causal_relation=args.causal_relation,
            target_relations=tuple(args.target_relation),
            extra_cause_triples=tuple(tuple(t) for t in (args.extra_triple or ())),
        ))
    if not queries:
        raise ValueError("nothing to predict: pass --cause or --query-file")
    return queries


def cmd_predict(args: argparse.Namespace) -> int:
    params = _params(args)
    graph, sim = _load(args, args.train)
    queries = _queries_from_args(args)
    echo = _config_echo(args, params, train=str(args.train))
    threads = args.threads or os.cpu_count() or 1

    started = time.perf_counter()
    if threads > 1 and len(queries) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_predictions = list(
                pool.map(lambda q: run_query(graph, sim, q, params), queries)
            )
    else:
        all_predictions = [run_query(graph, sim, q, params) for q in queries]

    lines = []
    for query, predictions in zip(queries, all_predictions):
        g = predictions.graph
        for rp in predictions.relations:
            candidates = rp.candidates if args.top <= 0 else rp.candidates[: args.top]
            record = {
                "cause": query.cause,
                "causal_relation": query.causal_relation,
                "target_relation": g.relation_name(rp.relation),
                "mode": predictions.mode,
                "candidates": [
                    {
                        "entity": g.entity_name(c.entity),
                        "score": c.score,
                        "e_score": c.e_score,
                        "re_score": c.re_score,
                    }
                    for c in candidates
                ],
                "paths": [
                    {
                        "steps": _step_names(g, sp.steps),
                        "score": sp.score,
                        "hits": sp.hits,
                        "total": sp.total,
                    }
                    for sp in rp.paths
                ],
                "cases": [
                    {
                        "cause": g.entity_name(c.cause),
                        "effect": g.entity_name(c.effect),
                        "score": c.score,
                        "selected_by": c.selected_by,
                    }
                    for c in predictions.cases
                ],
                "config": echo,
            }
            lines.append(json.dumps(record, sort_keys=True))
        for name in predictions.unresolved_targets:
            lines.append(json.dumps({
                "cause": query.cause,
                "causal_relation": query.causal_relation,
                "target_relation": name,
                "mode": predictions.mode,
                "candidates": [],
                "paths": [],
                "unresolved": True,
                "config": echo,
            }, sort_keys=True))
    _emit(lines, args.out)
    print(f"{len(queries)} queries in {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    params = _params(args)
    graph, sim = _load(args, args.train)
    split = load_split(args.split_dir)
    threads = args.threads or os.cpu_count() or 1
    ks = tuple(int(k) for k in args.ks.split(","))
    modes = tuple(args.modes.split(",")) if args.modes else (params.mode,)
    # threads deliberately left out of the echo: results do not depend on it
    echo = _config_echo(
        args, params, train=str(args.train), split_dir=str(args.split_dir),
        filtered=not args.raw, ks=list(ks), modes=list(modes),
        tie_policy=args.tie_policy,
    )
    reports = evaluate(
        graph, sim, split, params,
        modes=modes, ks=ks, filtered=not args.raw, tie_policy=args.tie_policy,
        threads=threads, config_echo=echo, verbose=args.verbose,
    )
    lines = [json.dumps(reports[m].to_dict(), sort_keys=True) for m in modes]
    _emit(lines, args.out)
    for m in modes:
        print(f"[{m}] {reports[m].n_links} links in {reports[m].runtime_seconds:.2f}s",
              file=sys.stderr)
    return 0


class _TrackingParser(argparse.ArgumentParser):
    """Remembers which options were given explicitly, so a config file can
    fill in the rest without clobbering the command line."""

    def parse_args(self, argv=None, namespace=None):  # type: ignore[override]
        args = super().parse_args(argv, namespace)
        given = set()
        argv = sys.argv[1:] if argv is None else list(argv)
        for token in argv:
            if token.startswith("--"):
                given.add(token.split("=", 1)[0].lstrip("-").replace("-", "_"))
        for name in given:
            setattr(args, f"_cli_set_{name}", True)
        return args


def build_parser() -> argparse.ArgumentParser:
    parser = _TrackingParser(prog="casepath", allow_abbrev=False,
                             description="Case-based 2-hop link prediction over knowledge graphs")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=argparse.ArgumentParser)

    p_ingest = sub.add_parser("ingest", help="load triple files and print an index summary",
                              allow_abbrev=False)
    p_ingest.add_argument("paths", nargs="+")
    p_ingest.add_argument("--summary-out", default=None)
    p_ingest.add_argument("--config", default=None)
    _add_graph_flags(p_ingest)
    p_ingest.set_defaults(func=cmd_ingest)

    p_split = sub.add_parser("split", help="build an inductive entity split",
                             allow_abbrev=False)
    p_split.add_argument("--input", required=True)
    p_split.add_argument("--n-test", type=int, required=True)
    p_split.add_argument("--n-valid", type=int, required=True)
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument("--out-dir", required=True)
    p_split.add_argument("--config", default=None)
    _add_graph_flags(p_split)
    p_split.set_defaults(func=cmd_split)

    p_predict = sub.add_parser("predict", help="rank tails for 2-hop queries",
                               allow_abbrev=False)
    p_predict.add_argument("--train", required=True)
    p_predict.add_argument("--cause", default=None)
    p_predict.add_argument("--causal-relation", default=None)
    p_predict.add_argument("--target-relation", action="append", default=None)
    p_predict.add_argument("--extra-triple", nargs=3, action="append", default=None,
                           metavar=("HEAD", "REL", "TAIL"),
                           help="inline property of a brand-new cause (repeatable)")
    p_predict.add_argument("--query-file", default=None,
                           help="JSON lines: {cause, relation, targets, extra_triples?}")
    p_predict.add_argument("--top", type=int, default=50,
                           help="candidates kept per record (0 = all)")
    p_predict.add_argument("--out", default=None)
    p_predict.add_argument("--config", default=None)
    _add_graph_flags(p_predict)
    _add_engine_flags(p_predict)
    p_predict.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="MRR / Hits@K over a split",
                            allow_abbrev=False)
    p_eval.add_argument("--train", required=True)
    p_eval.add_argument("--split-dir", required=True)
    p_eval.add_argument("--ks", default="1,10")
    p_eval.add_argument("--raw", action="store_true",
                        help="raw ranks instead of the filtered setting")
    p_eval.add_argument("--tie-policy", default="id", choices=["id", "expected"],
                        help="break score ties by entity id or average over tie orders")
    p_eval.add_argument("--modes", default=None,
                        help="comma-separated modes to report (default: --mode)")
    p_eval.add_argument("--verbose", action="store_true")
    p_eval.add_argument("--out", default=None)
    p_eval.add_argument("--config", default=None)
    _add_graph_flags(p_eval)
    _add_engine_flags(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        return args.func(args)
    except (ValueError, LookupError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
