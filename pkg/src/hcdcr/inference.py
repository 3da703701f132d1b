"""Building system cluster graphs from pairwise scores.

Pairwise scores come either from the edit-distance baseline or from an
ingested score table.  Mentions are clustered with average-linkage
agglomerative clustering, then parent -> child edges between clusters are
added greedily from the highest aggregated child score down, skipping any
edge that would close a cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import ClusterGraph, Topic, ValidationError, sorted_mentions
from .tables import COREF_ONLY, FOUR_CLASS, ScoreTable
from .textsim import edit_similarity

EDIT_DISTANCE = "edit-distance"
SCORE_TABLE = "score-table"

DEFAULT_CLUSTER_THRESHOLD = 0.6
DEFAULT_HIERARCHY_THRESHOLD = 0.4

Clusters = list[tuple[str, ...]]


@dataclass(frozen=True)
class ScorerConfig:
    source: str = SCORE_TABLE
    clustering_threshold: float = DEFAULT_CLUSTER_THRESHOLD
    hierarchy_threshold: float = DEFAULT_HIERARCHY_THRESHOLD
    single_parent: bool = False
    # stop the greedy scan at the first candidate that would close a cycle
    halt_on_cycle: bool = False

    def __post_init__(self):
        if self.source not in (EDIT_DISTANCE, SCORE_TABLE):
            raise ValueError(f"unknown score source {self.source!r}")
        for name in ("clustering_threshold", "hierarchy_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


def pairwise_scores(topic: Topic, cfg: ScorerConfig, table: ScoreTable | None = None) -> ScoreTable:
    ids = [m.mention_id for m in topic.mentions]
    if cfg.source == EDIT_DISTANCE:
        ms = topic.mentions
        entries = {}
        for i, a in enumerate(ms):
            for b in ms[i + 1:]:
                entries[(a.mention_id, b.mention_id)] = (edit_similarity(a.surface, b.surface),)
        return ScoreTable(topic.topic_id, COREF_ONLY, entries)

    if table is None:
        raise ValidationError("no score table supplied", topic.topic_id)
    table.check_mentions(ids)
    missing = table.missing_pairs(ids)
    if missing:
        a, b = missing[0]
        raise ValidationError(
            f"score table is missing pair ({a!r}, {b!r}) and {len(missing) - 1} more",
            topic.topic_id)
    return table


def average_linkage(sim: np.ndarray, threshold: float) -> list[list[int]]:
    """Average-linkage merging over a symmetric similarity matrix.

    Merges the most similar pair of clusters while its mean pairwise
    similarity is at least ``threshold``.  Clusters are identified by their
    smallest row index; equal similarities go to the smallest id pair.
    Returns clusters as sorted index lists, ordered by first index.
    """
    n = sim.shape[0]
    sums = np.array(sim, dtype=np.float64, copy=True)
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    members = {i: [i] for i in range(n)}
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)

    while active.sum() > 1:
        avg = sums / np.outer(sizes, sizes)
        valid = upper & np.outer(active, active)
        avg = np.where(valid, avg, -np.inf)
        best = avg.max()
        if best < threshold:
            break
        i, j = np.argwhere(avg == best)[0]
        # j merges into i (i < j keeps the smaller id)
        sums[i, :] += sums[j, :]
        sums[:, i] += sums[:, j]
        sizes[i] += sizes[j]
        active[j] = False
        members[i].extend(members.pop(j))
    return [sorted(members[i]) for i in sorted(members)]


def agglomerative_cluster(topic: Topic, scores: ScoreTable, threshold: float) -> Clusters:
    """Cluster the topic's mentions over the table's coreference scores."""
    ordered = sorted_mentions(topic.mentions)
    ids = [m.mention_id for m in ordered]
    coref, _ = scores.matrices(ids)
    return [tuple(ids[i] for i in c) for c in average_linkage(coref, threshold)]


def cluster_child_score(c1: Sequence[str], c2: Sequence[str], scores: ScoreTable) -> float:
    """Mean probability over mention pairs that ``c1`` is a child of ``c2``."""
    if scores.kind != FOUR_CLASS:
        raise ValueError("hierarchy scores need a four-class table")
    total = sum(scores.child_prob(a, b) for a in c1 for b in c2)
    return total / (len(c1) * len(c2))


def cluster_child_matrix(clusters: Sequence[Sequence[str]], scores: ScoreTable) -> np.ndarray:
    """S[i, j] = score of cluster i being the child of cluster j."""
    if scores.kind != FOUR_CLASS:
        raise ValueError("hierarchy scores need a four-class table")
    ids = [m for c in clusters for m in c]
    _, child = scores.matrices(ids)
    k = len(clusters)
    member = np.zeros((k, len(ids)))
    pos = 0
    for i, c in enumerate(clusters):
        member[i, pos:pos + len(c)] = 1.0
        pos += len(c)
    sizes = member.sum(axis=1)
    return member @ child @ member.T / np.outer(sizes, sizes)


def greedy_edges(child_scores: np.ndarray, threshold: float, single_parent: bool = False,
                 halt_on_cycle: bool = False) -> list[tuple[int, int]]:
    """Greedy acyclic edge insertion over a cluster child-score matrix.

    Candidate ``(i, j)`` proposes parent ``j`` -> child ``i``.  Candidates are
    visited by descending score, ties by ``(i, j)``; anything below
    ``threshold`` is never added.  Returns ``(parent, child)`` pairs in
    insertion order.
    """
    k = child_scores.shape[0]
    cand = [(-child_scores[i, j], i, j) for i in range(k) for j in range(k)
            if i != j and child_scores[i, j] >= threshold]
    cand.sort()
    reach = np.zeros((k, k), dtype=bool)  # reach[a, b]: path a -> b exists
    has_parent = np.zeros(k, dtype=bool)
    edges = []
    for _, child, parent in cand:
        if single_parent and has_parent[child]:
            continue
        if reach[child, parent]:
            if halt_on_cycle:
                break
            continue
        edges.append((parent, child))
        has_parent[child] = True
        above = reach[:, parent].copy()
        above[parent] = True
        below = reach[child].copy()
        below[child] = True
        reach[np.ix_(above, below)] = True
    return edges


def greedy_hierarchy(clustering: Sequence[Sequence[str]], scores: ScoreTable, threshold: float,
                     single_parent: bool = False, halt_on_cycle: bool = False) -> ClusterGraph:
    clusters = [tuple(c) for c in clustering]
    if len(clusters) < 2:
        return ClusterGraph(tuple(clusters))
    matrix = cluster_child_matrix(clusters, scores)
    edges = greedy_edges(matrix, threshold, single_parent, halt_on_cycle)
    return ClusterGraph(tuple(clusters), tuple(edges))


def run_pipeline(topic: Topic, cfg: ScorerConfig, table: ScoreTable | None = None) -> ClusterGraph:
    scores = pairwise_scores(topic, cfg, table)
    clusters = agglomerative_cluster(topic, scores, cfg.clustering_threshold)
    if scores.kind == COREF_ONLY:
        return ClusterGraph(tuple(clusters))
    return greedy_hierarchy(clusters, scores, cfg.hierarchy_threshold,
                            cfg.single_parent, cfg.halt_on_cycle)
