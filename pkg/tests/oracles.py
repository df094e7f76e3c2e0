"""Independent brute-force reference implementations for the tests.

Everything here works directly on plain triple lists with nested loops:
no CSR indices, no kernels, no shared code with the package internals.
"""

import math
from collections import Counter

from casepath.graph import DirectedStep


def follow_oracle(triples, start, steps, extra=None):
    """Naive triple-join traversal; returns Counter(endpoint -> multiplicity)."""
    rows = list(triples)
    if extra is not None:
        rows.append(tuple(extra))
    bag = Counter({start: 1})
    for step in steps:
        rel, inv = step[0], step[1]
        nxt = Counter()
        for node, mult in bag.items():
            for h, r, t in rows:
                if r != rel:
                    continue
                if not inv and h == node:
                    nxt[t] += mult
                elif inv and t == node:
                    nxt[h] += mult
        bag = nxt
    return bag


def enumerate_paths_oracle(triples, start, targets, whitelist, forbidden, max_len=3):
    """All relation paths (length 1..max_len) with a simple concrete witness
    from start into targets: first step forward over a whitelisted relation,
    no node on the witness equals forbidden, no node visited twice."""
    targets = set(targets)
    whitelist = set(whitelist)
    found = set()

    def dfs(node, steps, visited):
        if steps and node in targets:
            found.add(tuple(steps))
        if len(steps) == max_len:
            return
        first = not steps
        for h, r, t in triples:
            if h == node and (not first or r in whitelist):
                if t != forbidden and t not in visited:
                    dfs(t, steps + [DirectedStep(r, False)], visited | {t})
            if t == node and not first:
                if h != forbidden and h not in visited:
                    dfs(h, steps + [DirectedStep(r, True)], visited | {h})

    dfs(start, [], {start})
    return found


def path_score_oracle(triples, probes, path, epsilon):
    """Smoothed precision over (start, gold) probes; None when unsupported."""
    hits = 0
    total = 0
    for start, gold in probes:
        bag = follow_oracle(triples, start, path)
        total += sum(bag.values())
        hits += sum(m for e, m in bag.items() if e in gold)
    if total == 0:
        return None
    return hits / (epsilon + total)


def scored_paths_oracle(triples, probes, paths, epsilon, keep=None):
    """Score a path set and order it like the engine: score desc, path asc."""
    rows = []
    for path in paths:
        score = path_score_oracle(triples, probes, path, epsilon)
        if score is None:
            continue
        rows.append((path, score))
    rows.sort(key=lambda r: (-r[1], r[0]))
    if keep is not None:
        rows = rows[:keep]
    return rows


def entity_scores_oracle(triples, cause, scored_paths):
    """Candidate scores: sum of path score times endpoint multiplicity,
    accumulated in canonical (path order, entity ascending) order."""
    scores = {}
    for path, pscore in scored_paths:
        bag = follow_oracle(triples, cause, path)
        for ent in sorted(bag):
            scores[ent] = scores.get(ent, 0.0) + pscore * bag[ent]
    return scores


def reverse_scores_oracle(triples, temp, candidate, relation, scored_paths, out_c):
    """Per-cause-triple reverse scores for one candidate, computed with the
    hypothetical (temp, relation, candidate) triple literally appended."""
    rows = list(triples) + [(temp, relation, candidate)]
    values = []
    for r_c, t_c in out_c:
        acc = 0.0
        for path, pscore in scored_paths.get(r_c, []):
            if path[0] != (relation, False):
                continue
            bag = follow_oracle(rows, temp, path)
            total = sum(bag.values())
            if total == 0:
                continue
            acc += pscore * bag.get(t_c, 0) / total
        values.append(acc)
    return values


def entity_vector_oracle(triples, entity, subclass_rel, type_rel):
    """Vector positions per definition: outgoing neighbors, own superclass
    chain, and superclass chains of type neighbors."""

    def closure(node):
        seen = set()
        stack = [node]
        while stack:
            cur = stack.pop()
            for h, r, t in triples:
                if r == subclass_rel and h == cur and t not in seen:
                    seen.add(t)
                    stack.append(t)
        seen.discard(node)
        return seen

    positions = {t for h, r, t in triples if h == entity}
    positions |= closure(entity)
    if type_rel is not None:
        for h, r, t in triples:
            if h == entity and r == type_rel:
                positions |= closure(t)
    return positions


def idf_oracle(triples, entities, subclass_rel):
    """Raw log(N / count) weights recomputed from scratch (no normalization)."""

    def closure(node):
        seen = set()
        stack = [node]
        while stack:
            cur = stack.pop()
            for h, r, t in triples:
                if r == subclass_rel and h == cur and t not in seen:
                    seen.add(t)
                    stack.append(t)
        seen.discard(node)
        return seen

    n = len(entities)
    counts = {e: 0 for e in entities}
    for _, _, t in triples:
        counts[t] += 1
    if subclass_rel is not None:
        for e in entities:
            for member in closure(e):
                counts[member] += 1
    return {
        e: max(math.log(n / c), 0.0) if c > 0 else 0.0
        for e, c in counts.items()
    }


def importance_oracle(triples, out_c, counting="either"):
    """Normalized triple importance recomputed from raw counts."""
    n_triples = len(set(triples))
    rows = list(set(triples))
    raw = []
    for rel, tail in out_c:
        if counting == "either":
            containing = [row for row in rows if tail in (row[0], row[2])]
        else:
            containing = [row for row in rows if row[2] == tail]
        if not containing:
            raw.append(0.0)
            continue
        with_rel = [row for row in containing if row[1] == rel]
        p_rel = len(with_rel) / len(containing)
        p_tail = len(containing) / n_triples
        raw.append(max(math.log(p_rel / p_tail), 0.0) if p_rel > 0 else 0.0)
    total = sum(raw)
    if total <= 0:
        return [1.0 / len(out_c)] * len(out_c)
    return [v / total for v in raw]
