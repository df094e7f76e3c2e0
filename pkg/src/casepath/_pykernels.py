"""Pure-Python traversal kernels.

Mirror of the compiled extension in ``_kernels.pyx``: same CSR layout,
same SplitMix64 draws, same tie-breaking, so both backends produce
bit-identical results for identical inputs and seeds.

CSR layout: triples are stored twice, sorted by (head, relation, tail)
for forward steps and by (tail, relation, head) for inverse steps.
``indptr`` has one slot per entity; the relation/neighbor arrays are
parallel. Within one entity's slice, entries are sorted by relation and
then neighbor id.
"""

import numpy as np

from .rng import SplitMix64

BACKEND = "python"

# A path of at most 3 directed steps is packed into one int64:
# per-step code (relation << 1 | inverse) + 1, in three 21-bit fields.
FIELD_BITS = 21
FIELD_MASK = (1 << FIELD_BITS) - 1


def encode_path(steps):
    code = 0
    for i, (rel, inv) in enumerate(steps):
        code |= (((rel << 1) | inv) + 1) << (FIELD_BITS * i)
    return code


def decode_path(code):
    steps = []
    code = int(code)
    while code:
        field = (code & FIELD_MASK) - 1
        steps.append((field >> 1, field & 1))
        code >>= FIELD_BITS
    return tuple(steps)


def _rel_slice(indptr, rels, entity, rel, n_entities):
    """Index range of (entity, rel) entries; empty for out-of-graph ids."""
    if entity < 0 or entity >= n_entities:
        return 0, 0
    lo = int(indptr[entity])
    hi = int(indptr[entity + 1])
    sub = rels[lo:hi]
    return lo + int(np.searchsorted(sub, rel, "left")), lo + int(np.searchsorted(sub, rel, "right"))


def follow_bag(
    out_indptr,
    out_rel,
    out_tail,
    in_indptr,
    in_rel,
    in_head,
    start,
    steps,
    extra,
    cap,
):
    """Traverse a relation path breadth-wise, counting endpoint multiplicity.

    ``extra`` is an optional (head, rel, tail) triple visible to the
    traversal in both directions as if it were part of the graph. When the
    running multiset exceeds ``cap`` entries after a hop, the lowest entity
    ids are kept (partial count for the boundary entity) and the truncated
    flag is set.

    Returns (ids ascending int64 array, counts int64 array, truncated).
    """
    n_entities = len(out_indptr) - 1
    ex_h = ex_r = ex_t = -1
    if extra is not None:
        ex_h, ex_r, ex_t = extra

    frontier = {int(start): 1}
    truncated = False
    for rel, inv in steps:
        nxt = {}
        total = 0
        for v, m in frontier.items():
            if inv:
                lo, hi = _rel_slice(in_indptr, in_rel, v, rel, n_entities)
                neigh = in_head
            else:
                lo, hi = _rel_slice(out_indptr, out_rel, v, rel, n_entities)
                neigh = out_tail
            for i in range(lo, hi):
                u = int(neigh[i])
                nxt[u] = nxt.get(u, 0) + m
                total += m
            if ex_r == rel:
                if not inv and v == ex_h:
                    nxt[ex_t] = nxt.get(ex_t, 0) + m
                    total += m
                elif inv and v == ex_t:
                    nxt[ex_h] = nxt.get(ex_h, 0) + m
                    total += m
        if total > cap:
            truncated = True
            kept = {}
            remaining = cap
            for u in sorted(nxt):
                take = min(nxt[u], remaining)
                kept[u] = take
                remaining -= take
                if remaining == 0:
                    break
            nxt = kept
        frontier = nxt
        if not frontier:
            break

    ids = np.array(sorted(frontier), dtype=np.int64)
    counts = np.array([frontier[int(i)] for i in ids], dtype=np.int64)
    return ids, counts, truncated


def sample_walks(
    out_indptr,
    out_rel,
    out_tail,
    in_indptr,
    in_rel,
    in_head,
    start,
    targets,
    first_rels,
    forbidden,
    max_paths,
    max_attempts,
    seed,
):
    """Seeded random walks collecting distinct relation paths into targets.

    Each attempt draws a length in {1,2,3}, then walks hop by hop picking a
    uniformly random valid incident edge. Hop one is restricted to forward
    edges whose relation is flagged in ``first_rels``; later hops may use
    either direction. Walks never revisit a node and never touch
    ``forbidden``. A walk whose final node is flagged in ``targets``
    contributes its relation path.

    Returns the distinct path codes as a sorted int64 array.
    """
    n_entities = len(out_indptr) - 1
    start = int(start)
    forbidden = int(forbidden)
    if start < 0 or start >= n_entities or max_paths <= 0:
        return np.empty(0, dtype=np.int64)

    rng = SplitMix64(seed)
    found = set()
    visited = [0, 0, 0, 0]
    steps = [0, 0, 0]

    for _ in range(max_attempts):
        length = 1 + rng.randbelow(3)
        cur = start
        visited[0] = start
        n_visited = 1
        ok = True
        for hop in range(length):
            out_lo = int(out_indptr[cur]) if cur < n_entities else 0
            out_hi = int(out_indptr[cur + 1]) if cur < n_entities else 0
            in_lo = int(in_indptr[cur]) if cur < n_entities else 0
            in_hi = int(in_indptr[cur + 1]) if cur < n_entities else 0

            n_valid = 0
            for i in range(out_lo, out_hi):
                if hop == 0 and not first_rels[out_rel[i]]:
                    continue
                u = int(out_tail[i])
                if u == forbidden or u in visited[:n_visited]:
                    continue
                n_valid += 1
            if hop != 0:
                for i in range(in_lo, in_hi):
                    u = int(in_head[i])
                    if u == forbidden or u in visited[:n_visited]:
                        continue
                    n_valid += 1
            if n_valid == 0:
                ok = False
                break

            k = rng.randbelow(n_valid)
            nxt = -1
            step = -1
            for i in range(out_lo, out_hi):
                if hop == 0 and not first_rels[out_rel[i]]:
                    continue
                u = int(out_tail[i])
                if u == forbidden or u in visited[:n_visited]:
                    continue
                if k == 0:
                    nxt = u
                    step = int(out_rel[i]) << 1
                    break
                k -= 1
            if nxt < 0 and hop != 0:
                for i in range(in_lo, in_hi):
                    u = int(in_head[i])
                    if u == forbidden or u in visited[:n_visited]:
                        continue
                    if k == 0:
                        nxt = u
                        step = (int(in_rel[i]) << 1) | 1
                        break
                    k -= 1

            steps[hop] = step
            visited[n_visited] = nxt
            n_visited += 1
            cur = nxt

        if not ok or not targets[cur]:
            continue
        code = 0
        for i in range(length):
            code |= (steps[i] + 1) << (FIELD_BITS * i)
        found.add(code)
        if len(found) >= max_paths:
            break

    out = np.array(sorted(found), dtype=np.int64)
    return out
