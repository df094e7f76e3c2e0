"""Retrieval of prior cause/effect pairs to reason from.

A case is an existing (cause, causal-relation, effect) triple. Selection
runs two ranked passes: one scoring overall similarity to the query, one
prioritizing coverage of the relations we need to predict. Both passes
keep causes pairwise distinct so the retrieved set stays diverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import NoCasesError
from .graph import KnowledgeGraph
from .similarity import SimilarityIndex


@dataclass(frozen=True)
class Case:
    cause: int
    relation: int
    effect: int
    score: float
    selected_by: str  # "head" or "coverage"


@dataclass(frozen=True)
class PredictionQuery:
    """A 2-hop prediction request, expressed with names.

    ``extra_cause_triples`` lets a brand-new cause be described inline;
    those triples are added to the reasoning graph before anything else
    runs. ``target_relations`` are the effect properties to predict.
    """

    cause: str
    causal_relation: str
    target_relations: tuple[str, ...]
    extra_cause_triples: tuple[tuple[str, str, str], ...] = ()


def candidate_cases(
    graph: KnowledgeGraph, cause: int, causal_relation: int
) -> list[tuple[int, int]]:
    """All (case-cause, case-effect) pairs under the causal relation,
    excluding any pair that touches the query cause itself."""
    pairs = [
        (h, t)
        for h, t in graph.relation_triples(causal_relation)
        if h != cause and t != cause
    ]
    if not pairs:
        raise NoCasesError(
            f"no cases for relation {graph.relation_name(causal_relation)!r}"
        )
    return pairs


def select_from_scores(
    head_scored: Sequence[tuple[float, int, int]],
    cov_scored: Sequence[tuple[float, int, int]],
    n_head: int,
    n_cov: int,
    unique_across_passes: bool = True,
) -> list[tuple[int, int, float, str]]:
    """Two-pass greedy selection over pre-scored (score, cause, effect) rows.

    Ties break on (score desc, cause asc, effect asc). Causes are unique
    within a pass, and by default across both passes.
    """
    picked: list[tuple[int, int, float, str]] = []
    taken_pairs: set[tuple[int, int]] = set()
    used_causes: set[int] = set()

    n_taken = 0
    for score, cause, effect in sorted(head_scored, key=lambda r: (-r[0], r[1], r[2])):
        if n_taken >= n_head:
            break
        if cause in used_causes:
            continue
        picked.append((cause, effect, score, "head"))
        taken_pairs.add((cause, effect))
        used_causes.add(cause)
        n_taken += 1

    cov_used = set(used_causes) if unique_across_passes else set()
    n_taken = 0
    for score, cause, effect in sorted(cov_scored, key=lambda r: (-r[0], r[1], r[2])):
        if n_taken >= n_cov:
            break
        if (cause, effect) in taken_pairs or cause in cov_used:
            continue
        picked.append((cause, effect, score, "coverage"))
        cov_used.add(cause)
        n_taken += 1
    return picked


def select_cases(
    graph: KnowledgeGraph,
    sim: SimilarityIndex,
    cause: int,
    causal_relation: int,
    target_relations: Sequence[int],
    n_head: int = 20,
    n_cov: int = 5,
    unique_across_passes: bool = True,
) -> list[Case]:
    """Retrieve up to n_head + n_cov cases for a query.

    Pass one ranks by head-similarity times relation-set similarity; pass
    two ranks the remainder by (1 + head-similarity) times relation
    coverage. Requires n_cov < n_head, mirroring the intended use of the
    coverage pass as a small supplement.
    """
    if not 0 <= n_cov < n_head:
        raise ValueError("need 0 <= n_cov < n_head")
    out_c = graph.outgoing(cause)
    importance = sim.triple_importance(out_c)
    targets = frozenset(target_relations)

    pairs = candidate_cases(graph, cause, causal_relation)
    head_sim: dict[int, float] = {}
    tail_sim: dict[int, tuple[float, float]] = {}
    head_rows = []
    cov_rows = []
    for case_cause, case_effect in pairs:
        cs_h = head_sim.get(case_cause)
        if cs_h is None:
            cs_h = sim.case_head_similarity(out_c, importance, case_cause)
            head_sim[case_cause] = cs_h
        tails = tail_sim.get(case_effect)
        if tails is None:
            tails = sim.case_tail_similarity(targets, case_effect)
            tail_sim[case_effect] = tails
        cs_t, cc_t = tails
        head_rows.append((cs_h * cs_t, case_cause, case_effect))
        cov_rows.append(((1.0 + cs_h) * cc_t, case_cause, case_effect))

    return [
        Case(cause=c, relation=causal_relation, effect=e, score=s, selected_by=tag)
        for c, e, s, tag in select_from_scores(
            head_rows, cov_rows, n_head, n_cov, unique_across_passes
        )
    ]
