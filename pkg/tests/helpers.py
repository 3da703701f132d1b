"""Random instance generators shared by the tests."""

from __future__ import annotations

import random

from hcdcr.model import ClusterGraph, Document, Mention, Topic
from hcdcr.tables import FOUR_CLASS, ScoreTable


def random_partition(rng: random.Random, items, max_clusters: int, keep_all: bool = True):
    items = list(items)
    k = rng.randint(1, max(1, min(max_clusters, len(items))))
    clusters = [[] for _ in range(k)]
    for m in items:
        if keep_all or rng.random() < 0.85:
            clusters[rng.randrange(k)].append(m)
    return [c for c in clusters if c]


def random_graph(rng: random.Random, mentions, max_clusters: int = 5, edge_p: float = 0.4,
                 keep_all: bool = True) -> ClusterGraph:
    clusters = random_partition(rng, mentions, max_clusters, keep_all)
    order = list(range(len(clusters)))
    rng.shuffle(order)
    edges = [(order[i], order[j]) for i in range(len(order)) for j in range(i + 1, len(order))
             if rng.random() < edge_p]
    return ClusterGraph(tuple(tuple(c) for c in clusters), tuple(edges))


def make_topic(n_mentions: int, topic_id: str = "t0", surfaces=None, gold=None,
               metadata=None) -> Topic:
    """One document per mention; mention i spans the whole of document i."""
    surfaces = surfaces or [f"concept {i}" for i in range(n_mentions)]
    docs, mentions = [], []
    for i, s in enumerate(surfaces):
        toks = tuple(s.split())
        docs.append(Document(f"d{i}", toks, {"title": f"doc {i}"}))
        mentions.append(Mention(f"m{i}", f"d{i}", 0, len(toks)))
    return Topic(topic_id, tuple(docs), tuple(mentions), gold, metadata)


def synthetic_table(topic: Topic, graph: ClusterGraph, hi: float = 0.99,
                    lo: float = 0.005) -> ScoreTable:
    """Four-class table that encodes ``graph`` with near-certain probabilities."""
    direct = set(graph.edges)
    ids = [m.mention_id for m in topic.mentions]
    pairs = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            ca, cb = graph.cluster_of(a), graph.cluster_of(b)
            if ca == cb:
                cls = 0
            elif (ca, cb) in direct:
                cls = 1
            elif (cb, ca) in direct:
                cls = 2
            else:
                cls = 3
            vec = [lo] * 4
            vec[cls] = 1 - 3 * lo
            pairs.append((a, b, vec))
    # hi is the nominal confidence; 1 - 3 * lo keeps vectors normalized
    assert abs((1 - 3 * lo) - hi) < 0.02
    return ScoreTable.from_pairs(topic.topic_id, FOUR_CLASS, pairs)


def random_four_class(rng: random.Random, topic: Topic) -> ScoreTable:
    ids = [m.mention_id for m in topic.mentions]
    pairs = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            raw = [rng.random() for _ in range(4)]
            s = sum(raw)
            pairs.append((a, b, [x / s for x in raw]))
    return ScoreTable.from_pairs(topic.topic_id, FOUR_CLASS, pairs)
