"""In-memory knowledge graph: interned ids, adjacency indices, closures.

Triples are a set (duplicate lines collapse). Entity and relation ids are
dense integers assigned in lexicographic name order, so the built indices
do not depend on input line order. Adjacency is kept as two CSR blocks,
one sorted by (head, relation, tail) and one by (tail, relation, head);
within an entity's slice entries are ordered by relation then neighbor id,
which makes every lookup deterministic.

The graph is immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import os
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import EmptyInputError, TripleParseError

# Ids are packed into 21-bit fields in a few places (path codes, triple keys).
MAX_INTERNED = 1 << 21


class DirectedStep(NamedTuple):
    """One hop along a relation, forward (head to tail) or inverse."""

    relation: int
    inverse: bool = False


StrTriple = tuple[str, str, str]
IdTriple = tuple[int, int, int]
TripleSource = Union[str, os.PathLike, Iterable[str]]


def _parse_lines(lines: Iterable[str]) -> set[StrTriple]:
    triples: set[StrTriple] = set()
    for number, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or not all(parts):
            raise TripleParseError(number, line)
        triples.add((parts[0], parts[1], parts[2]))
    return triples


def ingest_triples(
    source: TripleSource,
    subclass_relation: Optional[str] = "P279",
    type_relation: Optional[str] = "P31",
) -> "KnowledgeGraph":
    """Load tab-separated ``head relation tail`` lines into a graph.

    ``source`` is a file path or an iterable of lines. The subclass/type
    relation names are resolved against the loaded relations (exact match
    first, then unique suffix match, e.g. plain ``P279`` against a full
    IRI); an unresolvable name just leaves that feature off.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as handle:
            triples = _parse_lines(handle)
    else:
        triples = _parse_lines(source)
    if not triples:
        raise EmptyInputError("triple source contains no triples")
    return KnowledgeGraph.from_string_triples(triples, subclass_relation, type_relation)


class KnowledgeGraph:
    def __init__(
        self,
        entity_names: list[str],
        relation_names: list[str],
        heads: np.ndarray,
        rels: np.ndarray,
        tails: np.ndarray,
        subclass_relation: Optional[str] = None,
        type_relation: Optional[str] = None,
    ):
        if len(entity_names) >= MAX_INTERNED or len(relation_names) >= MAX_INTERNED:
            raise ValueError("graph exceeds the 2^21 entity/relation id budget")
        self._entity_names = entity_names
        self._relation_names = relation_names
        self._entity_ids = {name: i for i, name in enumerate(entity_names)}
        self._relation_ids = {name: i for i, name in enumerate(relation_names)}

        n = len(entity_names)
        order = np.lexsort((tails, rels, heads))
        self.out_head = heads[order]
        self.out_rel = rels[order]
        self.out_tail = tails[order]
        self.out_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.out_head, minlength=n), out=self.out_indptr[1:])

        order = np.lexsort((heads, rels, tails))
        self.in_tail = tails[order]
        self.in_rel = rels[order]
        self.in_head = heads[order]
        self.in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.in_tail, minlength=n), out=self.in_indptr[1:])

        # Packed sorted keys for O(log n) membership tests.
        self._triple_keys = np.sort(
            (self.out_head.astype(np.int64) << 42)
            | (self.out_rel.astype(np.int64) << 21)
            | self.out_tail.astype(np.int64)
        )

        self._subclass_name = subclass_relation
        self._type_name = type_relation
        self.subclass_relation = self.resolve_relation(subclass_relation)
        self.type_relation = self.resolve_relation(type_relation)
        self._relation_triples_cache: dict[int, list[tuple[int, int]]] = {}

    @classmethod
    def from_string_triples(
        cls,
        triples: set[StrTriple],
        subclass_relation: Optional[str] = None,
        type_relation: Optional[str] = None,
    ) -> "KnowledgeGraph":
        entity_names = sorted({h for h, _, _ in triples} | {t for _, _, t in triples})
        relation_names = sorted({r for _, r, _ in triples})
        eid = {name: i for i, name in enumerate(entity_names)}
        rid = {name: i for i, name in enumerate(relation_names)}
        m = len(triples)
        heads = np.empty(m, dtype=np.int32)
        rels = np.empty(m, dtype=np.int32)
        tails = np.empty(m, dtype=np.int32)
        for i, (h, r, t) in enumerate(triples):
            heads[i] = eid[h]
            rels[i] = rid[r]
            tails[i] = eid[t]
        return cls(entity_names, relation_names, heads, rels, tails, subclass_relation, type_relation)

    # -- interning ---------------------------------------------------------

    @property
    def n_entities(self) -> int:
        return len(self._entity_names)

    @property
    def n_relations(self) -> int:
        return len(self._relation_names)

    @property
    def n_triples(self) -> int:
        return len(self.out_rel)

    def entity_id(self, name: str) -> int:
        return self._entity_ids[name]

    def entity_name(self, entity: int) -> str:
        return self._entity_names[entity]

    def has_entity(self, name: str) -> bool:
        return name in self._entity_ids

    def relation_id(self, name: str) -> int:
        return self._relation_ids[name]

    def relation_name(self, relation: int) -> str:
        return self._relation_names[relation]

    def resolve_relation(self, name: Optional[str]) -> Optional[int]:
        """Exact relation lookup, falling back to a unique suffix match."""
        if name is None:
            return None
        if name in self._relation_ids:
            return self._relation_ids[name]
        matches = [i for i, rel in enumerate(self._relation_names) if rel.endswith(name)]
        if len(matches) == 1:
            return matches[0]
        return None

    def fresh_entity_id(self) -> int:
        """An id outside the graph; traversal treats it as an isolated node."""
        return self.n_entities

    # -- adjacency ---------------------------------------------------------

    def _slice(self, indptr, rels, entity: int, relation: int) -> tuple[int, int]:
        if entity < 0 or entity >= self.n_entities:
            return 0, 0
        lo, hi = int(indptr[entity]), int(indptr[entity + 1])
        sub = rels[lo:hi]
        return (
            lo + int(np.searchsorted(sub, relation, "left")),
            lo + int(np.searchsorted(sub, relation, "right")),
        )

    def neighbors_array(self, entity: int, relation: int, inverse: bool = False) -> np.ndarray:
        """Neighbor ids for one (entity, relation, direction), sorted ascending."""
        if inverse:
            lo, hi = self._slice(self.in_indptr, self.in_rel, entity, relation)
            return self.in_head[lo:hi]
        lo, hi = self._slice(self.out_indptr, self.out_rel, entity, relation)
        return self.out_tail[lo:hi]

    def neighbors_via(self, entity: int, step: DirectedStep) -> list[int]:
        return self.neighbors_array(entity, step.relation, step.inverse).tolist()

    def outgoing(self, entity: int) -> list[tuple[int, int]]:
        """All (relation, tail) pairs of an entity, sorted."""
        if entity < 0 or entity >= self.n_entities:
            return []
        lo, hi = int(self.out_indptr[entity]), int(self.out_indptr[entity + 1])
        return list(zip(self.out_rel[lo:hi].tolist(), self.out_tail[lo:hi].tolist()))

    def outgoing_relations(self, entity: int) -> list[int]:
        """Distinct relations leaving an entity, sorted."""
        if entity < 0 or entity >= self.n_entities:
            return []
        lo, hi = int(self.out_indptr[entity]), int(self.out_indptr[entity + 1])
        return np.unique(self.out_rel[lo:hi]).tolist()

    def out_degree(self, entity: int) -> int:
        if entity < 0 or entity >= self.n_entities:
            return 0
        return int(self.out_indptr[entity + 1] - self.out_indptr[entity])

    def in_degree(self, entity: int) -> int:
        if entity < 0 or entity >= self.n_entities:
            return 0
        return int(self.in_indptr[entity + 1] - self.in_indptr[entity])

    def has_triple(self, head: int, relation: int, tail: int) -> bool:
        key = (head << 42) | (relation << 21) | tail
        i = int(np.searchsorted(self._triple_keys, key))
        return i < len(self._triple_keys) and int(self._triple_keys[i]) == key

    def triples(self) -> Iterator[IdTriple]:
        for i in range(self.n_triples):
            yield int(self.out_head[i]), int(self.out_rel[i]), int(self.out_tail[i])

    def relation_triples(self, relation: int) -> list[tuple[int, int]]:
        """All (head, tail) pairs under one relation, sorted; cached."""
        cached = self._relation_triples_cache.get(relation)
        if cached is None:
            mask = self.out_rel == relation
            cached = list(zip(self.out_head[mask].tolist(), self.out_tail[mask].tolist()))
            self._relation_triples_cache[relation] = cached
        return cached

    # -- hierarchy ---------------------------------------------------------

    def superclass_closure(self, entity: int) -> frozenset[int]:
        """Entities reachable via the subclass relation, excluding the start.

        Cycle-safe; empty when no subclass relation is configured.
        """
        rel = self.subclass_relation
        if rel is None:
            return frozenset()
        seen: set[int] = set()
        stack = [entity]
        while stack:
            node = stack.pop()
            for parent in self.neighbors_array(node, rel).tolist():
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        seen.discard(entity)
        return frozenset(seen)

    # -- augmentation ------------------------------------------------------

    def with_extra_triples(self, extra: Sequence[StrTriple]) -> "KnowledgeGraph":
        """A new graph with extra triples added; existing ids are preserved."""
        if not extra:
            return self
        entity_names = list(self._entity_names)
        relation_names = list(self._relation_names)
        eid = dict(self._entity_ids)
        rid = dict(self._relation_ids)
        new_entities = sorted(
            {name for h, _, t in extra for name in (h, t) if name not in eid}
        )
        for name in new_entities:
            eid[name] = len(entity_names)
            entity_names.append(name)
        new_relations = sorted({r for _, r, _ in extra if r not in rid})
        for name in new_relations:
            rid[name] = len(relation_names)
            relation_names.append(name)

        existing = {(int(h), int(r), int(t)) for h, r, t in zip(self.out_head, self.out_rel, self.out_tail)}
        additions = {(eid[h], rid[r], eid[t]) for h, r, t in extra} - existing
        k = len(additions)
        heads = np.concatenate([self.out_head, np.fromiter((h for h, _, _ in additions), np.int32, k)])
        rels = np.concatenate([self.out_rel, np.fromiter((r for _, r, _ in additions), np.int32, k)])
        tails = np.concatenate([self.out_tail, np.fromiter((t for _, _, t in additions), np.int32, k)])
        return KnowledgeGraph(
            entity_names, relation_names, heads, rels, tails, self._subclass_name, self._type_name
        )
