"""Edit-distance clustering baseline with validation-tuned threshold."""

from __future__ import annotations

from typing import Sequence

from . import agreement, inference
from ._parallel import ordered_map
from .evaluation import TopicCounts, micro_report, score_topic
from .model import ClusterGraph, Topic

DEFAULT_GRID = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


def _edit_matrix(topic: Topic):
    cfg = inference.ScorerConfig(inference.EDIT_DISTANCE)
    table = inference.pairwise_scores(topic, cfg)
    ordered = sorted(topic.mentions, key=lambda m: m.key)
    ids = [m.mention_id for m in ordered]
    return ids, table.matrices(ids)[0]


def _cluster_and_score(topic: Topic, ids, sim, threshold: float) -> TopicCounts:
    clusters = inference.average_linkage(sim, threshold)
    graph = ClusterGraph(tuple(tuple(ids[i] for i in c) for c in clusters))
    return score_topic(topic, topic.with_graph(graph))


def _sweep(args):
    topic, grid = args
    ids, sim = _edit_matrix(topic)
    return [_cluster_and_score(topic, ids, sim, t) for t in grid]


def tune_threshold(topics: Sequence[Topic], grid: Sequence[float], jobs: int = 1):
    """Grid threshold with the best micro CoNLL F1; ties go to the lower threshold."""
    per_topic = ordered_map(_sweep, [(t, tuple(grid)) for t in topics], jobs)
    scores = {}
    for k, thr in enumerate(grid):
        scores[thr] = micro_report([row[k] for row in per_topic]).conll
    best = max(grid, key=lambda t: (scores[t], -t))
    return best, scores


def run_baseline(dev: Sequence[Topic], test: Sequence[Topic], grid=DEFAULT_GRID,
                 fractions=(0.1, 0.2), threshold: float | None = None, jobs: int = 1) -> dict:
    if threshold is None:
        threshold, sweep = tune_threshold(dev, grid, jobs)
    else:
        sweep = {}
    test = sorted(test, key=lambda t: t.topic_id)
    rows = ordered_map(_sweep, [(t, (threshold,)) for t in test], jobs)
    counts = {t.topic_id: row[0] for t, row in zip(test, rows)}
    per_topic = {tid: c.coref.conll for tid, c in counts.items()}
    slices = agreement.diversity_slices(list(counts), per_topic, fractions)
    result = {
        "threshold": threshold,
        "dev_sweep": {f"{t:.2f}": s for t, s in sweep.items()},
        "test": micro_report(counts.values()).as_dict(),
        "slices": {f"bottom_{f:g}": {"topics": len(ids),
                                     "conll": micro_report([counts[i] for i in ids]).conll}
                   for f, ids in slices.items()},
        "per_topic_conll": per_topic,
    }
    curated = agreement.flagged_topics(test, "curated")
    if curated:
        result["slices"]["curated"] = {"topics": len(curated),
                                       "conll": micro_report([counts[i] for i in curated]).conll}
    return result
