"""Import adapter for the public SCICO release.

The release stores one topic per JSON line with per-document token lists
(``tokens``), ``mentions`` as ``[doc_index, start, end, cluster_id]`` with an
inclusive ``end``, ``relations`` as ``[parent_cluster_id, child_cluster_id]``,
and per-document ``metadatas``.  Topics are converted to the canonical
record; documents are keyed by their position in the topic.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .model import ClusterGraph, Document, Mention, Topic, ValidationError, transitive_reduction

log = logging.getLogger(__name__)

SPLIT_FILES = {"train": "train.jsonl", "validation": "dev.jsonl", "test": "test.jsonl"}
TOPIC_FLAGS = ("hard_10", "hard_20", "curated", "source")


def convert_topic(record: dict, split: str | None = None, end_inclusive: bool = True,
                  reduce: bool = False) -> Topic:
    """One release record as a canonical topic.

    Relations are kept as released unless ``reduce`` drops those implied by
    longer paths.
    """
    tid = str(record.get("id", record.get("topic_id")))
    token_lists = record["tokens"]
    metas = record.get("metadatas") or record.get("metadata") or [None] * len(token_lists)
    paper_ids = record.get("doc_ids") or [None] * len(token_lists)
    docs = []
    for i, toks in enumerate(token_lists):
        meta = dict(metas[i]) if isinstance(metas[i], dict) else {}
        if paper_ids[i] is not None:
            meta.setdefault("paper_id", paper_ids[i])
        docs.append(Document(str(i), tuple(toks), meta))

    mentions = []
    by_cluster: dict[int, list[str]] = {}
    for j, (doc, start, end, cluster) in enumerate(record["mentions"]):
        mid = str(j)
        mentions.append(Mention(mid, str(doc), int(start), int(end) + (1 if end_inclusive else 0)))
        by_cluster.setdefault(int(cluster), []).append(mid)

    cluster_ids = sorted(by_cluster)
    index = {c: i for i, c in enumerate(cluster_ids)}
    edges = []
    for parent, child in record.get("relations", []):
        if parent not in index or child not in index:
            raise ValidationError(f"relation {[parent, child]} names an unknown cluster", tid)
        edges.append((index[parent], index[child]))
    graph = ClusterGraph(tuple(tuple(by_cluster[c]) for c in cluster_ids), tuple(edges))
    if reduce:
        reduced = transitive_reduction(graph)
        if len(reduced.edges) != len(graph.edges):
            log.info("topic %s: dropped %d transitive relations", tid,
                     len(graph.edges) - len(reduced.edges))
        graph = reduced

    meta = {k: record[k] for k in TOPIC_FLAGS if k in record}
    if split is not None:
        meta["split"] = split
    return Topic(tid, tuple(docs), tuple(mentions), graph, meta)


def import_file(path, split: str | None = None, **kwargs) -> list[Topic]:
    topics = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                topics.append(convert_topic(json.loads(line), split, **kwargs))
            except (ValidationError, KeyError, ValueError, TypeError) as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return topics


def import_release(directory, **kwargs) -> dict[str, list[Topic]]:
    """All splits found in an unpacked release directory."""
    directory = Path(directory)
    out = {}
    for split, name in SPLIT_FILES.items():
        path = directory / name
        if path.exists():
            out[split] = import_file(path, split, **kwargs)
    if not out:
        raise FileNotFoundError(f"no SCICO split files in {directory}")
    return out
