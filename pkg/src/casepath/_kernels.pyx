# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled traversal kernels (C++).

Exact mirror of ``_pykernels.py``: same CSR layout, same SplitMix64 draws,
same tie-breaking. Keep the two implementations in lockstep; the test
suite asserts bit-identical outputs.
"""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t
from libcpp.pair cimport pair
from libcpp.unordered_map cimport unordered_map
from libcpp.unordered_set cimport unordered_set
from libcpp.vector cimport vector
from libcpp.algorithm cimport sort

BACKEND = "compiled"

FIELD_BITS = 21
FIELD_MASK = (1 << FIELD_BITS) - 1

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15u
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9u
cdef uint64_t MIX2 = 0x94D049BB133111EBu
cdef uint64_t MASK64 = 0xFFFFFFFFFFFFFFFFu


cdef inline uint64_t _splitmix_next(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] = state[0] + GAMMA
    z = state[0]
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t _randbelow(uint64_t* state, uint64_t n) noexcept nogil:
    return _splitmix_next(state) % n


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


cdef inline void _rel_range(int64_t[:] indptr, int32_t[:] rels, int64_t entity,
                            int32_t rel, int64_t n_entities,
                            int64_t* lo_out, int64_t* hi_out) noexcept nogil:
    cdef int64_t lo, hi, top, mid
    if entity < 0 or entity >= n_entities:
        lo_out[0] = 0
        hi_out[0] = 0
        return
    lo = indptr[entity]
    top = indptr[entity + 1]
    hi = top
    while lo < hi:
        mid = (lo + hi) >> 1
        if rels[mid] < rel:
            lo = mid + 1
        else:
            hi = mid
    lo_out[0] = lo
    hi = top
    while lo < hi:
        mid = (lo + hi) >> 1
        if rels[mid] <= rel:
            lo = mid + 1
        else:
            hi = mid
    hi_out[0] = lo


def follow_bag(int64_t[:] out_indptr, int32_t[:] out_rel, int32_t[:] out_tail,
               int64_t[:] in_indptr, int32_t[:] in_rel, int32_t[:] in_head,
               start, steps, extra, cap):
    """See ``_pykernels.follow_bag``."""
    cdef int64_t n_entities = out_indptr.shape[0] - 1
    cdef int64_t ex_h = -1, ex_t = -1
    cdef int64_t ex_r = -1
    if extra is not None:
        ex_h = extra[0]
        ex_r = extra[1]
        ex_t = extra[2]

    cdef unordered_map[int64_t, int64_t] frontier, nxt, kept
    cdef pair[int64_t, int64_t] item
    cdef int64_t cap_c = cap
    cdef bint truncated = False
    frontier[<int64_t> start] = 1

    cdef int64_t rel
    cdef int inv
    cdef int64_t v, m, u, total, lo, hi, i, take, remaining
    cdef vector[int64_t] keys

    for rel_py, inv_py in steps:
        rel = rel_py
        inv = 1 if inv_py else 0
        nxt.clear()
        total = 0
        for item in frontier:
            v = item.first
            m = item.second
            if inv:
                _rel_range(in_indptr, in_rel, v, <int32_t> rel, n_entities, &lo, &hi)
                for i in range(lo, hi):
                    u = in_head[i]
                    nxt[u] = nxt[u] + m
                    total += m
            else:
                _rel_range(out_indptr, out_rel, v, <int32_t> rel, n_entities, &lo, &hi)
                for i in range(lo, hi):
                    u = out_tail[i]
                    nxt[u] = nxt[u] + m
                    total += m
            if ex_r == rel:
                if (not inv) and v == ex_h:
                    nxt[ex_t] = nxt[ex_t] + m
                    total += m
                elif inv and v == ex_t:
                    nxt[ex_h] = nxt[ex_h] + m
                    total += m
        if total > cap_c:
            truncated = True
            keys.clear()
            for item in nxt:
                keys.push_back(item.first)
            sort(keys.begin(), keys.end())
            kept.clear()
            remaining = cap_c
            for i in range(<int64_t> keys.size()):
                u = keys[i]
                take = nxt[u]
                if take > remaining:
                    take = remaining
                kept[u] = take
                remaining -= take
                if remaining == 0:
                    break
            nxt.swap(kept)
        frontier.swap(nxt)
        if frontier.size() == 0:
            break

    keys.clear()
    for item in frontier:
        keys.push_back(item.first)
    sort(keys.begin(), keys.end())
    ids = np.empty(keys.size(), dtype=np.int64)
    counts = np.empty(keys.size(), dtype=np.int64)
    cdef int64_t[:] ids_v = ids
    cdef int64_t[:] counts_v = counts
    for i in range(<int64_t> keys.size()):
        ids_v[i] = keys[i]
        counts_v[i] = frontier[keys[i]]
    return ids, counts, truncated


def sample_walks(int64_t[:] out_indptr, int32_t[:] out_rel, int32_t[:] out_tail,
                 int64_t[:] in_indptr, int32_t[:] in_rel, int32_t[:] in_head,
                 start, uint8_t[:] targets, uint8_t[:] first_rels,
                 forbidden, max_paths, max_attempts, seed):
    """See ``_pykernels.sample_walks``."""
    cdef int64_t n_entities = out_indptr.shape[0] - 1
    cdef int64_t start_c = start
    cdef int64_t forbidden_c = forbidden
    cdef int64_t max_paths_c = max_paths
    cdef int64_t max_attempts_c = max_attempts
    if start_c < 0 or start_c >= n_entities or max_paths_c <= 0:
        return np.empty(0, dtype=np.int64)

    cdef uint64_t state = <uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF)

    cdef unordered_set[int64_t] found
    cdef int64_t visited[4]
    cdef int64_t steps_buf[3]
    cdef int64_t attempt, cur, nxt, u, out_lo, out_hi, in_lo, in_hi, i, n_valid, k, step
    cdef int length, hop, n_visited, j
    cdef bint ok, skip
    cdef int64_t code, c

    with nogil:
        for attempt in range(max_attempts_c):
            length = 1 + <int> _randbelow(&state, 3)
            cur = start_c
            visited[0] = start_c
            n_visited = 1
            ok = True
            for hop in range(length):
                if cur < n_entities:
                    out_lo = out_indptr[cur]
                    out_hi = out_indptr[cur + 1]
                    in_lo = in_indptr[cur]
                    in_hi = in_indptr[cur + 1]
                else:
                    out_lo = out_hi = in_lo = in_hi = 0

                n_valid = 0
                for i in range(out_lo, out_hi):
                    if hop == 0 and not first_rels[out_rel[i]]:
                        continue
                    u = out_tail[i]
                    skip = u == forbidden_c
                    for j in range(n_visited):
                        if visited[j] == u:
                            skip = True
                            break
                    if not skip:
                        n_valid += 1
                if hop != 0:
                    for i in range(in_lo, in_hi):
                        u = in_head[i]
                        skip = u == forbidden_c
                        for j in range(n_visited):
                            if visited[j] == u:
                                skip = True
                                break
                        if not skip:
                            n_valid += 1
                if n_valid == 0:
                    ok = False
                    break

                k = <int64_t> _randbelow(&state, <uint64_t> n_valid)
                nxt = -1
                step = -1
                for i in range(out_lo, out_hi):
                    if hop == 0 and not first_rels[out_rel[i]]:
                        continue
                    u = out_tail[i]
                    skip = u == forbidden_c
                    for j in range(n_visited):
                        if visited[j] == u:
                            skip = True
                            break
                    if skip:
                        continue
                    if k == 0:
                        nxt = u
                        step = (<int64_t> out_rel[i]) << 1
                        break
                    k -= 1
                if nxt < 0 and hop != 0:
                    for i in range(in_lo, in_hi):
                        u = in_head[i]
                        skip = u == forbidden_c
                        for j in range(n_visited):
                            if visited[j] == u:
                                skip = True
                                break
                        if skip:
                            continue
                        if k == 0:
                            nxt = u
                            step = ((<int64_t> in_rel[i]) << 1) | 1
                            break
                        k -= 1

                steps_buf[hop] = step
                visited[n_visited] = nxt
                n_visited += 1
                cur = nxt

            if not ok or not targets[cur]:
                continue
            code = 0
            for hop in range(length):
                code |= (steps_buf[hop] + 1) << (21 * hop)
            found.insert(code)
            if <int64_t> found.size() >= max_paths_c:
                break

    cdef vector[int64_t] codes
    for c in found:
        codes.push_back(c)
    sort(codes.begin(), codes.end())
    out = np.empty(codes.size(), dtype=np.int64)
    cdef int64_t[:] out_v = out
    for i in range(<int64_t> codes.size()):
        out_v[i] = codes[i]
    return out
