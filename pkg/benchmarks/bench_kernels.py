#!/usr/bin/env python3
"""Benchmark the compiled traversal kernels against the pure-Python fallback.

Times the two hot operations (bag traversal and walk sampling) on a random
graph, then a small end-to-end prediction batch. Run after building the
extension:

    python benchmarks/bench_kernels.py --entities 20000 --triples 120000
"""

import argparse
import random
import statistics
import sys
import time

import numpy as np

from casepath import EngineParams, PredictionQuery, SimilarityIndex
from casepath.graph import KnowledgeGraph
from casepath import _pykernels

try:
    from casepath import _kernels
except ImportError:
    _kernels = None


def build_graph(rng, n_entities, n_triples, n_relations):
    heads = np.empty(n_triples, dtype=np.int32)
    rels = np.empty(n_triples, dtype=np.int32)
    tails = np.empty(n_triples, dtype=np.int32)
    for i in range(n_triples):
        heads[i] = rng.randrange(n_entities)
        rels[i] = rng.randrange(n_relations)
        tails[i] = rng.randrange(n_entities)
    names = [f"e{i}" for i in range(n_entities)]
    relations = [f"r{i}" for i in range(n_relations)]
    return KnowledgeGraph(names, relations, heads, rels, tails)


def bench(label, fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    best = min(times)
    print(f"  {label:<28} {best * 1e3:9.2f} ms (median {statistics.median(times) * 1e3:.2f})")
    return best


def kernel_args(graph):
    return (
        graph.out_indptr,
        graph.out_rel,
        graph.out_tail,
        graph.in_indptr,
        graph.in_rel,
        graph.in_head,
    )


def bench_follow(backend, graph, probes, cap):
    args = kernel_args(graph)

    def run():
        for start, steps in probes:
            backend.follow_bag(*args, start, steps, None, cap)

    return run


def bench_walks(backend, graph, probes):
    args = kernel_args(graph)
    targets = np.zeros(graph.n_entities, dtype=np.uint8)
    targets[:: max(graph.n_entities // 500, 1)] = 1
    first = np.ones(graph.n_relations, dtype=np.uint8)

    def run():
        for start, seed in probes:
            backend.sample_walks(*args, start, targets, first, -1, 100, 2000, seed)

    return run


def bench_end_to_end(graph, seed):
    """One prediction batch through the public engine (active backend)."""
    rng = random.Random(seed)
    sim = SimilarityIndex(graph)
    rel = graph.relation_name(0)
    pairs = graph.relation_triples(0)
    queries = []
    for _ in range(5):
        cause, effect = pairs[rng.randrange(len(pairs))]
        targets = tuple(graph.relation_name(r) for r in graph.outgoing_relations(effect))
        if not targets or not graph.outgoing(cause):
            continue
        queries.append(
            PredictionQuery(graph.entity_name(cause), rel, targets)
        )
    from casepath.predict import run_query

    params = EngineParams(n_head=10, n_cov=3, n_paths=60, epsilon=5.0, seed=seed)

    def run():
        for q in queries:
            try:
                run_query(graph, sim, q, params)
            except Exception:
                pass

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--entities", type=int, default=20_000)
    parser.add_argument("--triples", type=int, default=120_000)
    parser.add_argument("--relations", type=int, default=30)
    parser.add_argument("--probes", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--bag-cap", type=int, default=10_000)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    print(
        f"graph: {args.entities} entities, {args.triples} triples, "
        f"{args.relations} relations"
    )
    graph = build_graph(rng, args.entities, args.triples, args.relations)

    follow_probes = []
    for _ in range(args.probes):
        start = rng.randrange(args.entities)
        steps = [
            (rng.randrange(args.relations), rng.randrange(2))
            for _ in range(rng.randrange(1, 4))
        ]
        follow_probes.append((start, steps))
    walk_probes = [
        (rng.randrange(args.entities), rng.getrandbits(63)) for _ in range(args.probes)
    ]

    backends = [("python", _pykernels)]
    if _kernels is not None:
        backends.append(("compiled", _kernels))
    else:
        print("compiled kernel not built; benchmarking the fallback only", file=sys.stderr)

    results = {}
    for name, backend in backends:
        print(f"backend: {name}")
        results[name, "follow"] = bench(
            f"follow_bag x{args.probes}", bench_follow(backend, graph, follow_probes, args.bag_cap)
        )
        results[name, "walks"] = bench(
            f"sample_walks x{args.probes}", bench_walks(backend, graph, walk_probes)
        )

    if _kernels is not None:
        for op in ("follow", "walks"):
            speedup = results["python", op] / results["compiled", op]
            print(f"speedup {op}: {speedup:.1f}x")

    print("end-to-end (active backend):")
    bench("5-query prediction batch", bench_end_to_end(graph, args.seed), repeats=3)


if __name__ == "__main__":
    main()
