"""Batch 2-hop evaluation: MRR and Hits@K over held-out entities.

Each test connection (cause, relation, held-out effect) becomes one
query whose target relations are taken from the effect's test triples;
each test triple is one evaluated 2-hop link. Ranks default to the
filtered setting: other known-true tails for the same (effect, relation)
are discounted when they rank above the gold. A gold entity missing from
the candidate list scores reciprocal rank 0.
"""

from __future__ import annotations

import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cases import PredictionQuery
from .errors import NoCasesError
from .graph import KnowledgeGraph
from .predict import EngineParams, MODES, combine_scores, predict, refine
from .similarity import SimilarityIndex
from .split import InductiveSplit


@dataclass
class EvalReport:
    mode: str
    mrr: float
    hits_at: dict[int, float]
    per_relation: dict[str, dict[str, float]]
    n_links: int
    n_connections: int
    skipped: dict[str, int]
    runtime_seconds: float
    config: dict = field(default_factory=dict)

    def to_dict(self, include_runtime: bool = False) -> dict:
        """JSON-ready form; runtime is volatile and excluded by default so
        equal-seed runs serialize byte-identically."""
        out = {
            "mode": self.mode,
            "mrr": self.mrr,
            "hits_at": {str(k): v for k, v in sorted(self.hits_at.items())},
            "n_links": self.n_links,
            "n_connections": self.n_connections,
            "skipped": self.skipped,
            "per_relation": self.per_relation,
            "config": self.config,
        }
        if include_runtime:
            out["runtime_seconds"] = self.runtime_seconds
        return out


def filtered_rank(
    ranking: Sequence, gold: int, known_true: frozenset[int]
) -> Optional[int]:
    """Rank of ``gold`` with other known-true tails discounted above it."""
    position = 1
    for cand in ranking:
        if cand.entity == gold:
            return position
        if cand.entity not in known_true:
            position += 1
    return None


def raw_rank(ranking: Sequence, gold: int) -> Optional[int]:
    for i, cand in enumerate(ranking):
        if cand.entity == gold:
            return i + 1
    return None


def expected_rank(
    ranking: Sequence, gold: int, known_true: frozenset[int]
) -> Optional[float]:
    """Expected rank of ``gold`` under a random shuffle of score ties.

    Score ties are common in sparse path scoring; the default policy breaks
    them by entity id, this one averages over tie orders instead. Pass an
    empty ``known_true`` for the raw (unfiltered) variant.
    """
    gold_score = None
    for cand in ranking:
        if cand.entity == gold:
            gold_score = cand.score
            break
    if gold_score is None:
        return None
    better = 0
    equal_others = 0
    for cand in ranking:
        if cand.entity == gold or cand.entity in known_true:
            continue
        if cand.score > gold_score:
            better += 1
        elif cand.score == gold_score:
            equal_others += 1
    return better + equal_others / 2 + 1


def _connection_task(
    graph: KnowledgeGraph,
    sim: SimilarityIndex,
    params: EngineParams,
    modes: Sequence[str],
    need_refine: bool,
    filtered: bool,
    tie_policy: str,
    cause: str,
    relation: str,
    effect: str,
    effect_out: list[tuple[str, str]],
) -> list[tuple[str, dict[str, Optional[float]]]] | str:
    """Ranks for every 2-hop link of one connection, or a skip reason."""
    target_names = tuple(sorted({r for r, _ in effect_out}))
    query = PredictionQuery(cause=cause, causal_relation=relation, target_relations=target_names)
    try:
        predictions = predict(graph, sim, query, params)
    except (NoCasesError, ValueError) as exc:
        return f"{cause} -> {effect}: {exc}"
    if need_refine:
        refine(predictions, params)

    by_mode = {mode: combine_scores(predictions, mode) for mode in modes}
    results = []
    for r_name, tail_name in effect_out:
        rel_id = graph.resolve_relation(r_name)
        gold = graph.entity_id(tail_name) if graph.has_entity(tail_name) else None
        known = frozenset(
            graph.entity_id(t)
            for r, t in effect_out
            if r == r_name and t != tail_name and graph.has_entity(t)
        )
        if not filtered:
            known = frozenset()
        ranks: dict[str, Optional[float]] = {}
        for mode in modes:
            ranking = by_mode[mode].ranking(rel_id) if rel_id is not None else []
            if gold is None or not ranking:
                ranks[mode] = None
            elif tie_policy == "expected":
                ranks[mode] = expected_rank(ranking, gold, known)
            elif filtered:
                ranks[mode] = filtered_rank(ranking, gold, known)
            else:
                ranks[mode] = raw_rank(ranking, gold)
        results.append((r_name, ranks))
    return results


def evaluate(
    graph: KnowledgeGraph,
    sim: SimilarityIndex,
    split: InductiveSplit,
    params: EngineParams,
    modes: Optional[Sequence[str]] = None,
    ks: Sequence[int] = (1, 10),
    filtered: bool = True,
    tie_policy: str = "id",
    threads: int = 1,
    config_echo: Optional[dict] = None,
    verbose: bool = False,
) -> dict[str, EvalReport]:
    """Evaluate every test 2-hop link; returns one report per mode.

    The engine runs once per connection; all requested modes are derived
    from that single run (refinement is skipped when only "base" is
    requested). Aggregation uses exact summation, so link order and thread
    count do not affect the report.
    """
    modes = tuple(modes or (params.mode,))
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown mode: {mode!r}")
    if tie_policy not in ("id", "expected"):
        raise ValueError(f"unknown tie policy: {tie_policy!r}")
    if not split.test_connections:
        raise ValueError("split has no test connections to evaluate")
    if not split.test_triples:
        raise ValueError("split has no test triples to evaluate")
    need_refine = any(m != "base" for m in modes)

    out_by_entity: dict[str, list[tuple[str, str]]] = {}
    for h, r, t in split.test_triples:
        out_by_entity.setdefault(h, []).append((r, t))

    tasks = []
    skipped = {"connections_without_triples": 0, "entities_without_connection": 0, "failed_queries": 0}
    connected = {t for _, _, t in split.test_connections}
    skipped["entities_without_connection"] = sum(1 for e in out_by_entity if e not in connected)
    for cause, relation, effect in split.test_connections:
        effect_out = out_by_entity.get(effect)
        if not effect_out:
            skipped["connections_without_triples"] += 1
            continue
        tasks.append((cause, relation, effect, effect_out))

    started = time.perf_counter()

    def run(task):
        cause, relation, effect, effect_out = task
        return _connection_task(
            graph, sim, params, modes, need_refine, filtered, tie_policy,
            cause, relation, effect, effect_out,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(t) for t in tasks]

    link_rows: list[tuple[str, dict[str, Optional[int]]]] = []
    for outcome in outcomes:
        if isinstance(outcome, str):
            skipped["failed_queries"] += 1
            if verbose:
                print(f"skipped: {outcome}", file=sys.stderr)
            continue
        link_rows.extend(outcome)

    runtime = time.perf_counter() - started
    reports = {}
    for mode in modes:
        reports[mode] = _aggregate(
            mode, link_rows, ks, len(tasks), skipped, runtime, config_echo or {}
        )
    return reports


def _aggregate(mode, link_rows, ks, n_connections, skipped, runtime, config) -> EvalReport:
    n_links = len(link_rows)
    rr = []
    hit_flags = {k: [] for k in ks}
    per_rel: dict[str, dict[str, list]] = {}
    for r_name, ranks in link_rows:
        rank = ranks[mode]
        rr.append(0.0 if rank is None else 1.0 / rank)
        for k in ks:
            hit_flags[k].append(0.0 if rank is None or rank > k else 1.0)
        bucket = per_rel.setdefault(r_name, {"rr": [], "hits": []})
        bucket["rr"].append(rr[-1])
        bucket["hits"].append(hit_flags[max(ks)][-1] if ks else 0.0)

    mrr = math.fsum(rr) / n_links if n_links else 0.0
    hits = {k: (math.fsum(v) / n_links if n_links else 0.0) for k, v in hit_flags.items()}
    per_relation = {
        name: {
            "mrr": math.fsum(b["rr"]) / len(b["rr"]),
            f"hits_at_{max(ks)}": math.fsum(b["hits"]) / len(b["hits"]),
            "n_links": len(b["rr"]),
        }
        for name, b in sorted(per_rel.items())
    }
    return EvalReport(
        mode=mode,
        mrr=mrr,
        hits_at=hits,
        per_relation=per_relation,
        n_links=n_links,
        n_connections=n_connections,
        skipped=dict(skipped),
        runtime_seconds=runtime,
        config=config,
    )
