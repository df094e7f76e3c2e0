"""Inductive entity splits: hold out entities, not triples.

A held-out entity keeps its incoming edges as "connections" (train entity
to held entity) and its outgoing edges as prediction targets. Selection
enforces three conditions: a candidate may not touch an already held-out
entity, it needs at least one incoming and one outgoing triple, and each
of its neighbors must keep at least one other triple into the training
set. ``validate_split`` re-checks all of this from the emitted triple
lists alone, so it stays an independent oracle for the builder.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import SplitError
from .graph import KnowledgeGraph, StrTriple

FILE_NAMES = {
    "train": "train.txt",
    "valid_connections": "valid_connections.txt",
    "valid_triples": "valid_triples.txt",
    "test_connections": "test_connections.txt",
    "test_triples": "test_triples.txt",
}


@dataclass
class InductiveSplit:
    train: list[StrTriple]
    valid_connections: list[StrTriple]
    valid_triples: list[StrTriple]
    test_connections: list[StrTriple]
    test_triples: list[StrTriple]

    def role(self, name: str) -> list[StrTriple]:
        return getattr(self, name)


def make_split(
    graph: KnowledgeGraph, n_test: int, n_valid: int, seed: int = 0
) -> InductiveSplit:
    """Select n_test + n_valid held-out entities and partition the triples.

    Candidates are visited in seeded random order; the held-out pool is
    then shuffled and split between validation and test. Raises SplitError
    (reporting how many entities were selected) when the graph cannot
    satisfy the constraints.
    """
    n_wanted = n_test + n_valid
    rng = random.Random(seed)
    if n_wanted == 0:
        return InductiveSplit(
            train=[_named(graph, h, r, t) for h, r, t in graph.triples()],
            valid_connections=[],
            valid_triples=[],
            test_connections=[],
            test_triples=[],
        )

    # Neighbor multiplicities; self-loops are not "other entity" links.
    neighbor_counts: dict[int, dict[int, int]] = {}
    for h, _, t in graph.triples():
        if h == t:
            continue
        row = neighbor_counts.setdefault(h, {})
        row[t] = row.get(t, 0) + 1
        row = neighbor_counts.setdefault(t, {})
        row[h] = row.get(h, 0) + 1
    live = {e: sum(counts.values()) for e, counts in neighbor_counts.items()}

    held: set[int] = set()
    order = list(range(graph.n_entities))
    rng.shuffle(order)
    for x in order:
        if len(held) >= n_wanted:
            break
        if graph.in_degree(x) < 1 or graph.out_degree(x) < 1:
            continue
        neighbors = neighbor_counts.get(x)
        if not neighbors:  # self-loops only
            continue
        if _has_self_loop(graph, x):
            continue
        if any(nb in held for nb in neighbors):
            continue
        if any(live[nb] - cnt < 1 for nb, cnt in neighbors.items()):
            continue
        held.add(x)
        for nb, cnt in neighbors.items():
            live[nb] -= cnt

    if len(held) < n_wanted:
        raise SplitError(
            f"could only select {len(held)} of {n_wanted} held-out entities "
            "under the split constraints"
        )

    held_list = sorted(held)
    rng.shuffle(held_list)
    valid_set = set(held_list[:n_valid])
    test_set = set(held_list[n_valid : n_valid + n_test])

    split = InductiveSplit([], [], [], [], [])
    for h, r, t in graph.triples():
        h_part = "test" if h in test_set else "valid" if h in valid_set else None
        t_part = "test" if t in test_set else "valid" if t in valid_set else None
        assert h_part is None or t_part is None, "two held-out entities share a triple"
        row = _named(graph, h, r, t)
        if h_part is None and t_part is None:
            split.train.append(row)
        elif t_part is not None:
            split.role(f"{t_part}_connections").append(row)
        else:
            split.role(f"{h_part}_triples").append(row)
    return split


def _has_self_loop(graph: KnowledgeGraph, entity: int) -> bool:
    lo, hi = int(graph.out_indptr[entity]), int(graph.out_indptr[entity + 1])
    return bool((graph.out_tail[lo:hi] == entity).any())


def _named(graph: KnowledgeGraph, h: int, r: int, t: int) -> StrTriple:
    return (graph.entity_name(h), graph.relation_name(r), graph.entity_name(t))


def validate_split(split: InductiveSplit) -> list[str]:
    """Re-check the split conditions from the triple lists alone.

    Returns a list of violation messages; an empty list means the split is
    valid. Deliberately brute force and independent of the builder.
    """
    problems: list[str] = []
    test_held = {h for h, _, _ in split.test_triples} | {t for _, _, t in split.test_connections}
    valid_held = {h for h, _, _ in split.valid_triples} | {t for _, _, t in split.valid_connections}
    held = test_held | valid_held

    everything = (
        split.train
        + split.valid_connections
        + split.valid_triples
        + split.test_connections
        + split.test_triples
    )
    for h, r, t in everything:
        if h in held and t in held:
            problems.append(f"triple links two held-out entities: ({h}, {r}, {t})")

    for h, r, t in split.train:
        if h in held or t in held:
            problems.append(f"train triple mentions a held-out entity: ({h}, {r}, {t})")

    conn_tails = {"test": {t for _, _, t in split.test_connections},
                  "valid": {t for _, _, t in split.valid_connections}}
    triple_heads = {"test": {h for h, _, _ in split.test_triples},
                    "valid": {h for h, _, _ in split.valid_triples}}
    for part, entities in (("test", test_held), ("valid", valid_held)):
        for e in sorted(entities):
            if e not in conn_tails[part]:
                problems.append(f"{part} entity {e} has no incoming connection")
            if e not in triple_heads[part]:
                problems.append(f"{part} entity {e} has no outgoing triple")

    train_entities = {h for h, _, _ in split.train} | {t for _, _, t in split.train}
    neighbors = {h for h, _, _ in split.test_connections + split.valid_connections} | {
        t for _, _, t in split.test_triples + split.valid_triples
    }
    for e in sorted(neighbors):
        if e not in train_entities:
            problems.append(f"neighbor {e} of a held-out entity has no remaining train triple")
    return problems


def write_split(split: InductiveSplit, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for field in fields(InductiveSplit):
        path = out / FILE_NAMES[field.name]
        with open(path, "w", encoding="utf-8") as handle:
            for h, r, t in getattr(split, field.name):
                handle.write(f"{h}\t{r}\t{t}\n")


def load_split(directory: str | Path) -> InductiveSplit:
    base = Path(directory)
    data = {}
    for field in fields(InductiveSplit):
        path = base / FILE_NAMES[field.name]
        rows: list[StrTriple] = []
        if path.exists():
            with open(path, encoding="utf-8") as handle:
                for line in handle:
                    line = line.rstrip("\r\n")
                    if not line.strip():
                        continue
                    h, r, t = line.split("\t")
                    rows.append((h, r, t))
        data[field.name] = rows
    return InductiveSplit(**data)
