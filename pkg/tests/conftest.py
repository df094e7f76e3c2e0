from pathlib import Path

import pytest

from casepath import EngineParams, PredictionQuery, SimilarityIndex, ingest_triples

FIXTURE = Path(__file__).parent / "data" / "quake_kg.tsv"


@pytest.fixture(scope="session")
def quake_graph():
    return ingest_triples(FIXTURE, "subclassOf", "instanceOf")


@pytest.fixture(scope="session")
def quake_sim(quake_graph):
    return SimilarityIndex(quake_graph)


@pytest.fixture
def quake_query():
    return PredictionQuery(
        cause="NewQuake",
        causal_relation="hasEffect",
        target_relations=("instanceOf", "country"),
        extra_cause_triples=(
            ("NewQuake", "instanceOf", "MegathrustEarthquake"),
            ("NewQuake", "country", "Japan"),
        ),
    )


@pytest.fixture
def quake_params():
    return EngineParams(n_head=20, n_cov=5, n_paths=100, epsilon=0.0, seed=13)


def entity(graph, name):
    return graph.entity_id(name)


def relation(graph, name):
    return graph.relation_id(name)
