"""Count statistics and similarity measures over a loaded graph.

Everything here is derived from the graph once and cached: an IDF-style
weight per entity, a sparse neighborhood vector per entity, and the
similarity scores built from them. No similarity matrix is ever
materialized; vectors are built lazily per entity, which keeps graphs
with six-figure entity counts tractable.
"""

from __future__ import annotations

import math

import numpy as np

from .graph import KnowledgeGraph


class SimilarityIndex:
    """Precomputed statistics plus lazy per-entity similarity vectors.

    ``idf_norm`` is one of ``max`` (default, weights in [0, 1]), ``l2``, or
    ``none``. ``importance_counting`` controls whether a triple "contains"
    an entity in either position (default) or only in the tail position.
    ``type_closure_expansion`` extends an entity's vector with the
    superclass chains of its type neighbors (default) so that two entities
    typed with sibling classes still overlap; switch it off to use only the
    entity's own subclass chain.

    Immutable after construction; the lazy caches are idempotent fills, so
    concurrent readers are fine.
    """

    def __init__(
        self,
        graph: KnowledgeGraph,
        idf_norm: str = "max",
        importance_counting: str = "either",
        type_closure_expansion: bool = True,
    ):
        if idf_norm not in ("max", "l2", "none"):
            raise ValueError(f"unknown idf_norm: {idf_norm!r}")
        if importance_counting not in ("either", "tail"):
            raise ValueError(f"unknown importance_counting: {importance_counting!r}")
        self.graph = graph
        self.idf_norm = idf_norm
        self.importance_counting = importance_counting
        self.type_closure_expansion = type_closure_expansion

        self._closures: dict[int, frozenset[int]] = {}
        self._vectors: dict[int, tuple[frozenset[int], float]] = {}
        self.idf = self._build_idf()
        self._idf_sq = self.idf * self.idf

    # -- closures ----------------------------------------------------------

    def closure(self, entity: int) -> frozenset[int]:
        got = self._closures.get(entity)
        if got is None:
            got = self.graph.superclass_closure(entity)
            self._closures[entity] = got
        return got

    # -- IDF ---------------------------------------------------------------

    def _build_idf(self) -> np.ndarray:
        """weight(h) = log(N / count(h)), clamped at 0, then normalized.

        count(h) is the number of incoming edges of h plus the number of
        entities whose superclass closure contains h. Entities with count 0
        get weight 0 rather than infinity. Hub entities whose count exceeds
        N would go negative and are clamped to 0.
        """
        g = self.graph
        n = g.n_entities
        counts = (g.in_indptr[1:] - g.in_indptr[:-1]).astype(np.float64)
        if g.subclass_relation is not None:
            has_edge = np.zeros(n, dtype=bool)
            lo, hi = g.out_indptr[:-1], g.out_indptr[1:]
            # Entities with no subclass out-edge have an empty closure.
            for e in np.nonzero(hi > lo)[0]:
                sub = g.out_rel[int(lo[e]) : int(hi[e])]
                if np.searchsorted(sub, g.subclass_relation, "left") != np.searchsorted(
                    sub, g.subclass_relation, "right"
                ):
                    has_edge[e] = True
            for e in np.nonzero(has_edge)[0]:
                for member in self.closure(int(e)):
                    counts[member] += 1.0

        raw = np.zeros(n, dtype=np.float64)
        nonzero = counts > 0
        raw[nonzero] = np.log(n / counts[nonzero])
        np.maximum(raw, 0.0, out=raw)
        if self.idf_norm == "max":
            top = raw.max() if n else 0.0
            if top > 0:
                raw /= top
        elif self.idf_norm == "l2":
            norm = float(np.linalg.norm(raw))
            if norm > 0:
                raw /= norm
        return raw

    # -- entity vectors and similarity --------------------------------------

    def entity_vector(self, entity: int) -> frozenset[int]:
        """Sparse positions: outgoing neighbors, own superclass closure, and
        the closures of neighbors reached via the type relation."""
        return self._vector(entity)[0]

    def _vector(self, entity: int) -> tuple[frozenset[int], float]:
        got = self._vectors.get(entity)
        if got is not None:
            return got
        g = self.graph
        positions: set[int] = set()
        if 0 <= entity < g.n_entities:
            lo, hi = int(g.out_indptr[entity]), int(g.out_indptr[entity + 1])
            positions.update(g.out_tail[lo:hi].tolist())
            positions.update(self.closure(entity))
            if self.type_closure_expansion and g.type_relation is not None:
                for t in g.neighbors_array(entity, g.type_relation).tolist():
                    positions.update(self.closure(t))
        frozen = frozenset(positions)
        sumsq = float(sum(self._idf_sq[p] for p in frozen))
        got = (frozen, sumsq)
        self._vectors[entity] = got
        return got

    def entity_similarity(self, a: int, b: int) -> float:
        """Weighted Jaccard over the IDF-weighted neighborhood vectors.

        Computed in Tanimoto form, dot / (|x|^2 + |y|^2 - dot), which for
        0/1 vectors reduces to plain Jaccard and keeps self-similarity at 1
        for any non-zero vector. Two all-zero vectors score 0.
        """
        va, sa = self._vector(a)
        vb, sb = self._vector(b)
        if sa == 0.0 or sb == 0.0:
            return 0.0
        if len(vb) < len(va):
            va, vb = vb, va
        dot = float(sum(self._idf_sq[p] for p in va if p in vb))
        return dot / (sa + sb - dot)

    # -- triple importance ---------------------------------------------------

    def _containing_count(self, entity: int) -> int:
        g = self.graph
        if self.importance_counting == "tail":
            return g.in_degree(entity)
        return g.in_degree(entity) + g.out_degree(entity)

    def _containing_with_relation(self, entity: int, relation: int) -> int:
        g = self.graph
        count = len(g.neighbors_array(entity, relation, inverse=True))
        if self.importance_counting == "either":
            count += len(g.neighbors_array(entity, relation, inverse=False))
        return count

    def triple_importance(self, out_triples: list[tuple[int, int]]) -> list[float]:
        """Normalized importance of each (relation, tail) in a cause's
        outgoing set: log(P(rel | tail) / P(tail)), clamped at 0, scaled to
        sum to 1. Falls back to uniform weights when everything clamps.
        """
        if not out_triples:
            raise ValueError("cause entity has no outgoing triples")
        n_triples = self.graph.n_triples
        raw = []
        for rel, tail in out_triples:
            containing = self._containing_count(tail)
            if containing == 0:
                raw.append(0.0)
                continue
            p_rel_given_tail = self._containing_with_relation(tail, rel) / containing
            p_tail = containing / n_triples
            value = math.log(p_rel_given_tail / p_tail) if p_rel_given_tail > 0 else 0.0
            raw.append(max(value, 0.0))
        total = sum(raw)
        if total <= 0.0:
            return [1.0 / len(out_triples)] * len(out_triples)
        return [v / total for v in raw]

    # -- case similarities ---------------------------------------------------

    def case_head_similarity(
        self,
        out_c: list[tuple[int, int]],
        importance: list[float],
        candidate: int,
    ) -> float:
        """Importance-weighted match between a cause's outgoing triples and a
        candidate cause's, taking the best (tail, tail) pair per relation."""
        g = self.graph
        by_rel: dict[int, list[tuple[float, int]]] = {}
        for (rel, tail), weight in zip(out_c, importance):
            by_rel.setdefault(rel, []).append((weight, tail))
        score = 0.0
        for rel, weighted_tails in by_rel.items():
            cand_tails = g.neighbors_array(candidate, rel).tolist()
            if not cand_tails:
                continue
            best = 0.0
            for weight, tail in weighted_tails:
                for other in cand_tails:
                    value = weight * self.entity_similarity(tail, other)
                    if value > best:
                        best = value
            score += best
        return score

    def case_tail_similarity(
        self, target_relations: frozenset[int], effect: int
    ) -> tuple[float, float]:
        """(relation-set Jaccard, coverage of the target relations)."""
        if not target_relations:
            raise ValueError("target relation set is empty")
        out_rels = set(self.graph.outgoing_relations(effect))
        shared = len(target_relations & out_rels)
        union = len(target_relations | out_rels)
        jaccard = shared / union if union else 0.0
        coverage = shared / len(target_relations)
        return jaccard, coverage


def idf_weights(graph: KnowledgeGraph, norm: str = "max") -> np.ndarray:
    """Standalone IDF build, handy for inspection and tests."""
    return SimilarityIndex(graph, idf_norm=norm).idf
