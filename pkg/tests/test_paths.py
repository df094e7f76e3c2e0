import random
from collections import Counter

import pytest

from casepath import ingest_triples, follow, sample_paths, score_paths
from casepath.graph import DirectedStep

from oracles import enumerate_paths_oracle, follow_oracle, scored_paths_oracle
from synthgraph import lines, random_triples


def _ids(graph, triples):
    return [
        (graph.entity_id(h), graph.relation_id(r), graph.entity_id(t)) for h, r, t in triples
    ]


def _augmented(quake_graph):
    return quake_graph.with_extra_triples(
        [("NewQuake", "instanceOf", "MegathrustEarthquake"), ("NewQuake", "country", "Japan")]
    )


def test_follow_fixture_country(quake_graph):
    g = _augmented(quake_graph)
    bag = follow(g, g.entity_id("NewQuake"), [DirectedStep(g.relation_id("country"))])
    assert bag.as_dict() == {g.entity_id("Japan"): 1}
    assert not bag.truncated


def test_follow_no_edge_is_empty(quake_graph):
    g = quake_graph
    bag = follow(g, g.entity_id("Japan"), [DirectedStep(g.relation_id("hasEffect"))])
    assert bag.as_dict() == {}
    assert not bag


def test_follow_rejects_bad_length(quake_graph):
    with pytest.raises(ValueError):
        follow(quake_graph, 0, [])
    with pytest.raises(ValueError):
        follow(quake_graph, 0, [DirectedStep(0)] * 4)


def test_follow_matches_join_oracle():
    rng = random.Random(404)
    g = ingest_triples(lines(random_triples(rng, 30, 150, 5)), None, None)
    rows = list(g.triples())
    for _ in range(200):
        start = rng.randrange(g.n_entities)
        steps = [
            DirectedStep(rng.randrange(g.n_relations), bool(rng.randrange(2)))
            for _ in range(rng.randrange(1, 4))
        ]
        bag = follow(g, start, steps, bag_cap=10**9)
        assert bag.as_dict() == dict(follow_oracle(rows, start, steps))
        assert not bag.truncated


def test_follow_is_compositional():
    rng = random.Random(77)
    g = ingest_triples(lines(random_triples(rng, 15, 60, 4)), None, None)
    for _ in range(50):
        start = rng.randrange(g.n_entities)
        p1 = [DirectedStep(rng.randrange(g.n_relations), bool(rng.randrange(2)))]
        p2 = [DirectedStep(rng.randrange(g.n_relations), bool(rng.randrange(2)))]
        whole = follow(g, start, p1 + p2, bag_cap=10**9).as_dict()
        stitched = Counter()
        mid = follow(g, start, p1, bag_cap=10**9)
        for node, mult in mid.as_dict().items():
            for end, m2 in follow(g, node, p2, bag_cap=10**9).as_dict().items():
                stitched[end] += mult * m2
        assert whole == dict(stitched)


def test_follow_extra_triple_both_directions(quake_graph):
    g = quake_graph
    temp = g.fresh_entity_id()
    inst = g.relation_id("instanceOf")
    tsunami = g.entity_id("Tsunami")
    extra = (temp, inst, tsunami)
    fwd = follow(g, temp, [DirectedStep(inst)], extra_triple=extra)
    assert fwd.as_dict() == {tsunami: 1}
    # the temporary edge is also visible in reverse
    back = follow(g, tsunami, [DirectedStep(inst, inverse=True)], extra_triple=extra)
    assert temp in back.as_dict()
    # and invisible without it
    assert temp not in follow(g, tsunami, [DirectedStep(inst, inverse=True)]).as_dict()


def test_follow_truncation_deterministic():
    rows = [f"hub\tr\tnode{i:02d}" for i in range(12)] + ["root\tstep\thub"]
    g = ingest_triples(rows, None, None)
    path = [DirectedStep(g.relation_id("step")), DirectedStep(g.relation_id("r"))]
    bag = follow(g, g.entity_id("root"), path, bag_cap=5)
    assert bag.truncated
    assert bag.total() == 5
    expected = sorted(g.entity_id(f"node{i:02d}") for i in range(12))[:5]
    assert bag.ids.tolist() == expected
    again = follow(g, g.entity_id("root"), path, bag_cap=5)
    assert bag.as_dict() == again.as_dict()


def test_sample_paths_fixture_finds_both(quake_graph):
    g = _augmented(quake_graph)
    inst = g.relation_id("instanceOf")
    sub = g.relation_id("subclassOf")
    cause = g.relation_id("hasCause")
    country = g.relation_id("country")
    tohoku = g.entity_id("TohokuEarthquake")
    aftermath = g.entity_id("TohokuAftermath")
    gold = set(g.neighbors_array(aftermath, inst).tolist())
    got = sample_paths(
        g, tohoku, gold, {inst, country}, aftermath, budget=100, seed=5
    )
    assert (DirectedStep(inst),) in got
    assert (DirectedStep(inst), DirectedStep(sub), DirectedStep(cause, inverse=True)) in got


def test_sample_paths_respects_forbidden_node():
    # target reachable only through the forbidden node
    rows = ["a\tr\tx", "x\tr\tgoal"]
    g = ingest_triples(rows, None, None)
    r = g.relation_id("r")
    got = sample_paths(
        g,
        g.entity_id("a"),
        {g.entity_id("goal")},
        {r},
        g.entity_id("x"),
        budget=50,
        seed=1,
    )
    assert got == set()
    # without the restriction the path exists
    got = sample_paths(
        g, g.entity_id("a"), {g.entity_id("goal")}, {r}, None, budget=50, seed=1
    )
    assert got == {(DirectedStep(r), DirectedStep(r))}


def test_sample_paths_never_revisits_nodes():
    # the only length-2 route to the goal backtracks over the start
    rows = ["a\tr\tb", "b\ts\ta", "a\tr\tgoal"]
    g = ingest_triples(rows, None, None)
    got = sample_paths(
        g,
        g.entity_id("a"),
        {g.entity_id("a")},
        {g.relation_id("r"), g.relation_id("s")},
        None,
        budget=50,
        seed=3,
    )
    assert got == set()


def test_sample_paths_empty_inputs(quake_graph):
    g = quake_graph
    assert sample_paths(g, 0, set(), {0}, None, 10, 0) == set()
    assert sample_paths(g, 0, {1}, set(), None, 10, 0) == set()
    assert sample_paths(g, 0, {1}, {0}, None, 0, 0) == set()


def test_sample_paths_saturates_to_exhaustive_enumeration():
    rng = random.Random(909)
    for trial in range(20):
        g = ingest_triples(lines(random_triples(rng, 22, 65, 5)), None, None)
        rows = list(g.triples())
        start = rng.randrange(g.n_entities)
        whitelist = {r for r, _ in g.outgoing(start)}
        if not whitelist:
            continue
        targets = set(rng.sample(range(g.n_entities), 4))
        forbidden = rng.randrange(g.n_entities)
        expected = enumerate_paths_oracle(rows, start, targets, whitelist, forbidden)
        got = sample_paths(
            g, start, targets, whitelist, forbidden,
            budget=2000, seed=trial, attempts_factor=20,
        )
        assert got == expected, trial


def test_sample_paths_subset_below_saturation():
    rng = random.Random(31)
    g = ingest_triples(lines(random_triples(rng, 22, 80, 4)), None, None)
    rows = list(g.triples())
    start = 0
    whitelist = {r for r, _ in g.outgoing(start)}
    targets = set(range(6))
    expected = enumerate_paths_oracle(rows, start, targets, whitelist, None)
    got = sample_paths(g, start, targets, whitelist, None, budget=3, seed=0)
    assert len(got) <= 3
    assert got <= expected


def test_sample_paths_deterministic(quake_graph):
    g = _augmented(quake_graph)
    inst = g.relation_id("instanceOf")
    args = (
        g,
        g.entity_id("TohokuEarthquake"),
        {g.entity_id("Tsunami"), g.entity_id("Disaster")},
        {inst, g.relation_id("country")},
        g.entity_id("TohokuAftermath"),
        50,
    )
    assert sample_paths(*args, seed=42) == sample_paths(*args, seed=42)


def test_score_paths_fixture_values(quake_graph):
    g = _augmented(quake_graph)
    inst, country = g.relation_id("instanceOf"), g.relation_id("country")
    cases = [
        ("TohokuEarthquake", "TohokuAftermath"),
        ("KantoEarthquake", "NebukawaRailAccident"),
        ("IndianOceanEarthquake", "IndianOceanTsunami"),
    ]
    country_probes = [
        (g.entity_id(c), frozenset(g.neighbors_array(g.entity_id(e), country).tolist()))
        for c, e in cases
    ]
    [sp] = score_paths(g, country_probes, [(DirectedStep(country),)], epsilon=0.0)
    assert (sp.hits, sp.total, sp.score) == (3, 3, 1.0)
    [sp] = score_paths(g, country_probes, [(DirectedStep(country),)], epsilon=5.0)
    assert sp.score == pytest.approx(3 / 8)

    inst_probes = [
        (g.entity_id(c), frozenset(g.neighbors_array(g.entity_id(e), inst).tolist()))
        for c, e in cases
    ]
    [sp] = score_paths(g, inst_probes, [(DirectedStep(inst),)], epsilon=0.0)
    assert (sp.hits, sp.total, sp.score) == (1, 5, 0.2)
    [sp] = score_paths(g, inst_probes, [(DirectedStep(inst),)], epsilon=5.0)
    assert sp.score == pytest.approx(1 / 10)


def test_score_paths_drops_unsupported(quake_graph):
    g = quake_graph
    probes = [(g.entity_id("Japan"), frozenset({g.entity_id("Country")}))]
    got = score_paths(g, probes, [(DirectedStep(g.relation_id("hasEffect")),)], epsilon=0.0)
    assert got == []


def test_score_paths_matches_oracle_and_ordering():
    rng = random.Random(55)
    g = ingest_triples(lines(random_triples(rng, 20, 70, 4)), None, None)
    rows = list(g.triples())
    probes = []
    for _ in range(3):
        start = rng.randrange(g.n_entities)
        gold = frozenset(rng.sample(range(g.n_entities), 5))
        probes.append((start, gold))
    paths = set()
    for _ in range(30):
        paths.add(
            tuple(
                DirectedStep(rng.randrange(g.n_relations), bool(rng.randrange(2)))
                for _ in range(rng.randrange(1, 4))
            )
        )
    for eps in (0.0, 5.0):
        got = score_paths(g, probes, paths, epsilon=eps, keep=10)
        expected = scored_paths_oracle(rows, probes, paths, eps, keep=10)
        assert [(sp.steps, sp.score) for sp in got] == expected


def test_epsilon_prefers_support():
    # same precision, different support: more samples must win under smoothing
    rows = ["a\tr\tgold", "b\tr\tgold", "b\ts\tgold"]
    g = ingest_triples(rows, None, None)
    gold = frozenset({g.entity_id("gold")})
    probes = [(g.entity_id("a"), gold), (g.entity_id("b"), gold)]
    r_path = (DirectedStep(g.relation_id("r")),)
    s_path = (DirectedStep(g.relation_id("s")),)
    ranked = score_paths(g, probes, [r_path, s_path], epsilon=5.0)
    assert ranked[0].steps == r_path  # 2/(5+2) beats 1/(5+1)
    ranked = score_paths(g, probes, [r_path, s_path], epsilon=0.0)
    assert {sp.score for sp in ranked} == {1.0}
