"""Relation-path traversal, sampling, and scoring.

A relation path is one to three directed steps. Traversal uses bag
semantics: an endpoint is counted once per concrete witnessing path, so
results are multisets. Sampling uses seeded random walks that never
revisit a node; scoring is smoothed precision against per-case gold sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .graph import DirectedStep, KnowledgeGraph

RelationPath = tuple[DirectedStep, ...]

MAX_PATH_LEN = 3
DEFAULT_BAG_CAP = 10_000
ATTEMPTS_PER_PATH = 20


@dataclass
class PathBag:
    """Multiset of traversal endpoints (entity ids ascending)."""

    ids: np.ndarray
    counts: np.ndarray
    truncated: bool

    def total(self) -> int:
        return int(self.counts.sum())

    def multiplicity(self, entity: int) -> int:
        i = int(np.searchsorted(self.ids, entity))
        if i < len(self.ids) and int(self.ids[i]) == entity:
            return int(self.counts[i])
        return 0

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.ids.tolist(), self.counts.tolist()))

    def __bool__(self) -> bool:
        return len(self.ids) > 0


@dataclass(frozen=True)
class ScoredPath:
    """A relation path with its smoothed-precision support."""

    steps: RelationPath
    score: float
    hits: int
    total: int


def _check_path(path: Sequence[DirectedStep]) -> None:
    if not 1 <= len(path) <= MAX_PATH_LEN:
        raise ValueError(f"relation path length must be 1..{MAX_PATH_LEN}, got {len(path)}")


def follow(
    graph: KnowledgeGraph,
    start: int,
    path: Sequence[DirectedStep],
    extra_triple: Optional[tuple[int, int, int]] = None,
    bag_cap: int = DEFAULT_BAG_CAP,
) -> PathBag:
    """Entities reachable from ``start`` along ``path``, with multiplicity.

    ``extra_triple`` is visible to the traversal in both directions as if
    it were part of the graph (used to attach a hypothetical edge without
    mutating anything). When a hop's multiset exceeds ``bag_cap`` entries,
    the lowest entity ids are kept and the bag is flagged truncated.
    """
    _check_path(path)
    ids, counts, truncated = kernels.follow_bag(
        graph.out_indptr,
        graph.out_rel,
        graph.out_tail,
        graph.in_indptr,
        graph.in_rel,
        graph.in_head,
        int(start),
        [(int(s.relation), 1 if s.inverse else 0) for s in path],
        extra_triple,
        int(bag_cap),
    )
    return PathBag(ids=ids, counts=counts, truncated=bool(truncated))


def sample_paths(
    graph: KnowledgeGraph,
    start: int,
    targets: Iterable[int],
    first_step_whitelist: Iterable[int],
    forbidden_node: Optional[int],
    budget: int,
    seed: int,
    attempts_factor: int = ATTEMPTS_PER_PATH,
) -> set[RelationPath]:
    """Distinct relation paths (length <= 3) from ``start`` into ``targets``.

    Walks are seeded random: length uniform in {1, 2, 3}, then a uniformly
    random valid incident edge per hop. The first hop must be a forward
    edge whose relation is whitelisted; no hop may enter ``forbidden_node``
    or revisit a node already on the walk. Up to ``budget`` distinct paths
    are collected within ``attempts_factor * budget`` walk attempts.
    """
    n = graph.n_entities
    target_mask = np.zeros(n, dtype=np.uint8)
    n_targets = 0
    for t in targets:
        if 0 <= t < n:
            target_mask[t] = 1
            n_targets += 1
    rel_mask = np.zeros(graph.n_relations, dtype=np.uint8)
    n_rels = 0
    for r in first_step_whitelist:
        if 0 <= r < graph.n_relations:
            rel_mask[r] = 1
            n_rels += 1
    if budget <= 0 or n_targets == 0 or n_rels == 0:
        return set()

    codes = kernels.sample_walks(
        graph.out_indptr,
        graph.out_rel,
        graph.out_tail,
        graph.in_indptr,
        graph.in_rel,
        graph.in_head,
        int(start),
        target_mask,
        rel_mask,
        -1 if forbidden_node is None else int(forbidden_node),
        int(budget),
        int(attempts_factor) * int(budget),
        int(seed),
    )
    return {
        tuple(DirectedStep(rel, bool(inv)) for rel, inv in kernels.decode_path(code))
        for code in codes.tolist()
    }


def score_paths(
    graph: KnowledgeGraph,
    probes: Sequence[tuple[int, frozenset[int]]],
    paths: Iterable[RelationPath],
    epsilon: float,
    bag_cap: int = DEFAULT_BAG_CAP,
    keep: Optional[int] = None,
) -> list[ScoredPath]:
    """Smoothed precision of each path over (start, gold-set) probes.

    score = hits / (epsilon + total), where hits counts bag endpoints that
    fall in the probe's gold set and total counts all bag endpoints, both
    summed over probes. Paths with no concrete instance anywhere are
    dropped (their support is undefined). Returns the ``keep`` best by
    (score desc, path ascending); all of them when ``keep`` is None.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    scored = []
    for path in paths:
        hits = 0
        total = 0
        for start, gold in probes:
            bag = follow(graph, start, path, bag_cap=bag_cap)
            total += bag.total()
            if gold:
                for ent, cnt in zip(bag.ids.tolist(), bag.counts.tolist()):
                    if ent in gold:
                        hits += cnt
        if total == 0:
            continue
        scored.append(ScoredPath(steps=path, score=hits / (epsilon + total), hits=hits, total=total))
    scored.sort(key=lambda sp: (-sp.score, sp.steps))
    if keep is not None:
        scored = scored[:keep]
    return scored
