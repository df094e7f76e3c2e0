"""Prediction orchestration: apply scored paths, then optionally refine.

Base prediction samples relation paths from every retrieved case, keeps
the best-scoring distinct paths, replays them from the query cause, and
sums path scores per reached entity. Refinement reverses direction: it
checks how well each predicted entity, temporarily attached to the unseen
effect by a single hypothetical triple, can "predict back" the known
properties of the cause, and reweights the ranking accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .cases import Case, PredictionQuery, select_cases
from .graph import DirectedStep, KnowledgeGraph
from .paths import ScoredPath, follow, sample_paths, score_paths
from .rng import derive_seed
from .similarity import SimilarityIndex

MODES = ("base", "refined", "refined+base")

_FORWARD_TAG = 81
_REVERSE_TAG = 82


@dataclass
class EngineParams:
    n_head: int = 20
    n_cov: int = 5
    n_paths: int = 100
    epsilon: float = 5.0
    bag_cap: int = 10_000
    seed: int = 0
    attempts_factor: int = 20
    mode: str = "refined+base"
    refine_top_k: Optional[int] = None
    unique_causes_across_passes: bool = True

    def as_dict(self) -> dict:
        return {
            "n_head": self.n_head,
            "n_cov": self.n_cov,
            "n_paths": self.n_paths,
            "epsilon": self.epsilon,
            "bag_cap": self.bag_cap,
            "seed": self.seed,
            "attempts_factor": self.attempts_factor,
            "mode": self.mode,
            "refine_top_k": self.refine_top_k,
            "unique_causes_across_passes": self.unique_causes_across_passes,
        }


@dataclass
class CandidateScore:
    entity: int
    e_score: float
    re_score: Optional[float] = None
    score: float = 0.0


@dataclass
class RelationPrediction:
    relation: int
    candidates: list[CandidateScore]
    paths: list[ScoredPath]


@dataclass
class RankedPredictions:
    graph: KnowledgeGraph
    cause: int
    causal_relation: int
    target_relations: tuple[int, ...]
    unresolved_targets: tuple[str, ...]
    mode: str
    cases: list[Case]
    relations: list[RelationPrediction]
    reverse_paths: dict[int, list[ScoredPath]] = field(default_factory=dict)

    def ranking(self, relation: int) -> list[CandidateScore]:
        for rp in self.relations:
            if rp.relation == relation:
                return rp.candidates
        return []


def _resolve_query(
    graph: KnowledgeGraph, query: PredictionQuery
) -> tuple[KnowledgeGraph, int, int, list[int], list[str]]:
    if query.extra_cause_triples:
        graph = graph.with_extra_triples(list(query.extra_cause_triples))
    if not graph.has_entity(query.cause):
        raise ValueError(f"unknown cause entity: {query.cause!r}")
    cause = graph.entity_id(query.cause)
    relation = graph.resolve_relation(query.causal_relation)
    if relation is None:
        raise ValueError(f"unknown causal relation: {query.causal_relation!r}")
    if not query.target_relations:
        raise ValueError("query has no target relations")
    targets: list[int] = []
    unresolved: list[str] = []
    for name in query.target_relations:
        rid = graph.resolve_relation(name)
        if rid is None:
            unresolved.append(name)
        else:
            targets.append(rid)
    return graph, cause, relation, targets, unresolved


def predict(
    graph: KnowledgeGraph,
    sim: SimilarityIndex,
    query: PredictionQuery,
    params: EngineParams,
) -> RankedPredictions:
    """Rank candidate tails for every target relation of the query.

    When the query injects extra cause triples, the statistics index is
    rebuilt over the augmented graph; otherwise ``sim`` is used as-is.
    """
    base_graph = graph
    graph, cause, relation, target_ids, unresolved = _resolve_query(graph, query)
    if graph is not base_graph:
        sim = SimilarityIndex(
            graph, sim.idf_norm, sim.importance_counting, sim.type_closure_expansion
        )

    cases = select_cases(
        graph,
        sim,
        cause,
        relation,
        target_ids,
        params.n_head,
        params.n_cov,
        params.unique_causes_across_passes,
    )
    whitelist = frozenset(rel for rel, _ in graph.outgoing(cause))

    predictions = []
    for r_e in target_ids:
        pooled: set[tuple[DirectedStep, ...]] = set()
        probes = []
        for case in cases:
            gold = frozenset(graph.neighbors_array(case.effect, r_e).tolist())
            probes.append((case.cause, gold))
            if not gold:
                continue
            pooled |= sample_paths(
                graph,
                case.cause,
                gold,
                whitelist,
                case.effect,
                params.n_paths,
                derive_seed(params.seed, _FORWARD_TAG, case.cause, case.effect, r_e),
                params.attempts_factor,
            )
        kept = score_paths(graph, probes, pooled, params.epsilon, params.bag_cap, params.n_paths)

        scores: dict[int, float] = {}
        for sp in kept:
            bag = follow(graph, cause, sp.steps, bag_cap=params.bag_cap)
            for ent, cnt in zip(bag.ids.tolist(), bag.counts.tolist()):
                scores[ent] = scores.get(ent, 0.0) + sp.score * cnt
        candidates = [
            CandidateScore(entity=ent, e_score=sc, score=sc)
            for ent, sc in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        ]
        predictions.append(RelationPrediction(relation=r_e, candidates=candidates, paths=kept))

    return RankedPredictions(
        graph=graph,
        cause=cause,
        causal_relation=relation,
        target_relations=tuple(target_ids),
        unresolved_targets=tuple(unresolved),
        mode="base",
        cases=cases,
        relations=predictions,
    )


def refine(predictions: RankedPredictions, params: EngineParams) -> RankedPredictions:
    """Score each candidate by how well it predicts the cause's properties.

    Reverse paths are sampled once per cause-relation, shared across
    candidates. Each candidate is temporarily attached to a fresh effect
    node by one triple; only traversals through that triple contribute.
    Candidates no reverse path reaches score 0 and sink in the re-ranking.
    """
    graph = predictions.graph
    cause = predictions.cause
    out_c = graph.outgoing(cause)
    if not out_c:
        raise ValueError("cause entity has no outgoing triples")
    target_set = frozenset(predictions.target_relations)

    reverse: dict[int, list[ScoredPath]] = {}
    rout_c = sorted({rel for rel, _ in out_c})
    for r_c in rout_c:
        pooled: set[tuple[DirectedStep, ...]] = set()
        probes = []
        for case in predictions.cases:
            gold = frozenset(graph.neighbors_array(case.cause, r_c).tolist())
            probes.append((case.effect, gold))
            if not gold:
                continue
            pooled |= sample_paths(
                graph,
                case.effect,
                gold,
                target_set,
                case.cause,
                params.n_paths,
                derive_seed(params.seed, _REVERSE_TAG, case.cause, case.effect, r_c),
                params.attempts_factor,
            )
        reverse[r_c] = score_paths(
            graph, probes, pooled, params.epsilon, params.bag_cap, params.n_paths
        )

    temp = graph.fresh_entity_id()
    for rp in predictions.relations:
        r_e = rp.relation
        refinable = rp.candidates
        if params.refine_top_k is not None:
            refinable = refinable[: params.refine_top_k]
        # rs[i][j]: candidate i against the j-th outgoing triple of the cause
        rs = [[0.0] * len(out_c) for _ in refinable]
        for i, cand in enumerate(refinable):
            extra = (temp, r_e, cand.entity)
            bag_cache: dict[tuple, tuple] = {}
            for j, (r_c, t_c) in enumerate(out_c):
                acc = 0.0
                for sp in reverse.get(r_c, []):
                    if sp.steps[0] != (r_e, False):
                        continue
                    cached = bag_cache.get(sp.steps)
                    if cached is None:
                        bag = follow(graph, temp, sp.steps, extra, params.bag_cap)
                        cached = (bag.total(), bag)
                        bag_cache[sp.steps] = cached
                    total, bag = cached
                    if total == 0:
                        continue
                    acc += sp.score * bag.multiplicity(t_c) / total
                rs[i][j] = acc

        for cand in rp.candidates:
            cand.re_score = 0.0
        if refinable and out_c:
            for j in range(len(out_c)):
                peak = max(rs[i][j] for i in range(len(refinable)))
                if peak <= 0.0:
                    for i in range(len(refinable)):
                        rs[i][j] = 0.0
                else:
                    for i in range(len(refinable)):
                        rs[i][j] /= peak
            for i, cand in enumerate(refinable):
                nrs_max = max(rs[i])
                nrs_avg = sum(rs[i]) / len(out_c)
                cand.re_score = cand.e_score * (nrs_max + nrs_avg)

    predictions.reverse_paths = reverse
    predictions.mode = "refined-scored"
    return predictions


def combine_scores(predictions: RankedPredictions, mode: str) -> RankedPredictions:
    """Re-rank by the chosen score: base, refined, or their sum."""
    if mode not in MODES:
        raise ValueError(f"unknown mode: {mode!r}")
    relations = []
    for rp in predictions.relations:
        candidates = []
        for cand in rp.candidates:
            re_score = cand.re_score
            if mode == "base":
                active = cand.e_score
            else:
                if re_score is None:
                    raise ValueError("refine() must run before non-base modes")
                active = re_score if mode == "refined" else cand.e_score + re_score
            candidates.append(
                CandidateScore(cand.entity, cand.e_score, re_score, active)
            )
        candidates.sort(key=lambda c: (-c.score, c.entity))
        relations.append(RelationPrediction(rp.relation, candidates, rp.paths))
    return replace(predictions, mode=mode, relations=relations)


def run_query(
    graph: KnowledgeGraph,
    sim: SimilarityIndex,
    query: PredictionQuery,
    params: EngineParams,
) -> RankedPredictions:
    """predict, refine when the mode needs it, and rank accordingly."""
    predictions = predict(graph, sim, query, params)
    if params.mode == "base":
        return combine_scores(predictions, "base")
    refine(predictions, params)
    return combine_scores(predictions, params.mode)
