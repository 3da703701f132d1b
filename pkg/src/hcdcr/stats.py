"""Corpus statistics over gold topics."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass
from statistics import fmean
from typing import Iterable

from .model import ClusterGraph, Topic, ValidationError, longest_path_nodes, weak_components


@dataclass(frozen=True)
class SplitCounts:
    topics: int = 0
    documents: int = 0
    mentions: int = 0
    clusters: int = 0
    relations: int = 0


def graph_shape(g: ClusterGraph) -> tuple[int, int]:
    """(weak component count, node depth of the largest component).

    The largest component has the most clusters; ties go to the deeper one.
    """
    comps = weak_components(g)
    if not comps:
        return 0, 0
    depths = [(len(c), longest_path_nodes(g, c)) for c in comps]
    return len(comps), max(depths)[1]


def dataset_stats(topics: Iterable[Topic]) -> dict:
    topics = list(topics)
    per_split: dict[str, list[Topic]] = defaultdict(list)
    components, depths = [], []
    for t in topics:
        if t.gold is None:
            raise ValidationError("topic has no gold graph", t.topic_id)
        split = (t.metadata or {}).get("split", "all")
        per_split[split].append(t)
        n, d = graph_shape(t.gold)
        components.append(n)
        depths.append(d)

    def count(ts):
        return SplitCounts(len(ts), sum(len(t.documents) for t in ts),
                           sum(len(t.mentions) for t in ts),
                           sum(len(t.gold.clusters) for t in ts),
                           sum(len(t.gold.edges) for t in ts))

    return {
        "splits": {s: asdict(count(ts)) for s, ts in sorted(per_split.items())},
        "total": asdict(count(topics)),
        "mean_components": fmean(components) if components else 0.0,
        "mean_max_component_depth": fmean(depths) if depths else 0.0,
    }
