"""Domain types for hierarchical cross-document coreference.

A topic bundles documents, the mentions found in them, and optionally a gold
cluster graph: disjoint mention clusters plus directed parent -> child edges
between clusters.  All types are frozen after construction.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np


class ValidationError(ValueError):
    """Raised when an input violates a type invariant."""

    def __init__(self, message: str, topic_id: str | None = None):
        if topic_id is not None:
            message = f"topic {topic_id!r}: {message}"
        super().__init__(message)
        self.topic_id = topic_id


class CycleError(ValidationError):
    pass


MentionKey = tuple[str, int, int]


@dataclass(frozen=True)
class Mention:
    mention_id: str
    doc_id: str
    start: int
    end: int
    surface: str = ""

    @property
    def key(self) -> MentionKey:
        """Identity used to compare gold and system output."""
        return (self.doc_id, self.start, self.end)


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple[str, ...]
    metadata: Mapping[str, Any] | None = None

    def __post_init__(self):
        if not self.tokens:
            raise ValidationError(f"document {self.doc_id!r} has no tokens")


def _find_cycle(n: int, edges: Iterable[tuple[int, int]]) -> list[int] | None:
    """Kahn's algorithm; returns the nodes left on a cycle, or None."""
    out = defaultdict(list)
    indeg = [0] * n
    for p, c in edges:
        out[p].append(c)
        indeg[c] += 1
    queue = deque(i for i in range(n) if indeg[i] == 0)
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if seen == n:
        return None
    return [i for i in range(n) if indeg[i] > 0]


@dataclass(frozen=True)
class ClusterGraph:
    """Disjoint clusters of mentions plus parent -> child cluster edges.

    Members are any hashable mention handle: mention ids inside a topic, or
    ``(doc_id, start, end)`` keys when comparing independently produced
    outputs.  ``edges`` holds ``(parent_index, child_index)`` pairs.
    """

    clusters: tuple[tuple[Hashable, ...], ...]
    edges: tuple[tuple[int, int], ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        clusters = tuple(tuple(c) for c in self.clusters)
        edges = tuple((int(p), int(c)) for p, c in self.edges)
        object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "edges", edges)

        index = {}
        for i, cluster in enumerate(clusters):
            if not cluster:
                raise ValidationError(f"cluster {i} is empty")
            for m in cluster:
                if m in index:
                    raise ValidationError(
                        f"mention {m!r} appears in clusters {index[m]} and {i}")
                index[m] = i
        object.__setattr__(self, "_index", index)

        n = len(clusters)
        if len(set(edges)) != len(edges):
            raise ValidationError("duplicate relation")
        for p, c in edges:
            if not (0 <= p < n and 0 <= c < n):
                raise ValidationError(f"relation {[p, c]} references a missing cluster")
            if p == c:
                raise ValidationError(f"self relation on cluster {p}")
        cycle = _find_cycle(n, edges)
        if cycle is not None:
            raise CycleError(f"relations form a cycle through clusters {cycle}")

    @property
    def mentions(self) -> set:
        return set(self._index)

    def cluster_of(self, mention: Hashable) -> int | None:
        return self._index.get(mention)

    def children(self) -> list[list[int]]:
        out = [[] for _ in self.clusters]
        for p, c in self.edges:
            out[p].append(c)
        return out

    def relabel(self, mapping: Mapping[Hashable, Hashable]) -> ClusterGraph:
        """Same structure with every member passed through ``mapping``."""
        return ClusterGraph(tuple(tuple(mapping[m] for m in c) for c in self.clusters),
                            self.edges)

    def canonical(self) -> tuple[frozenset, frozenset]:
        """Order-free form, for comparing graphs built in different orders."""
        sets = [frozenset(c) for c in self.clusters]
        return (frozenset(sets),
                frozenset((sets[p], sets[c]) for p, c in self.edges))

    def reachability(self) -> np.ndarray:
        """Boolean matrix R with R[i, j] iff a non-empty path runs i -> j."""
        n = len(self.clusters)
        reach = np.zeros((n, n), dtype=bool)
        children = self.children()
        for order in reversed(topological_order(self)):
            for c in children[order]:
                reach[order, c] = True
                reach[order] |= reach[c]
        return reach


def topological_order(g: ClusterGraph) -> list[int]:
    n = len(g.clusters)
    indeg = [0] * n
    children = g.children()
    for _, c in g.edges:
        indeg[c] += 1
    queue = deque(i for i in range(n) if indeg[i] == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in children[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if len(order) != n:
        raise CycleError("graph has a cycle")
    return order


def is_acyclic(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    return _find_cycle(n, edges) is None


def transitive_closure(g: ClusterGraph) -> ClusterGraph:
    """Add an edge for every ancestor/descendant pair."""
    reach = g.reachability()
    edges = tuple((int(p), int(c)) for p, c in zip(*np.nonzero(reach)))
    return ClusterGraph(g.clusters, edges)


def transitive_reduction(g: ClusterGraph) -> ClusterGraph:
    """Drop edges implied by a longer path; keeps the original edge order."""
    reach = g.reachability()
    children = g.children()
    keep = []
    for p, c in g.edges:
        implied = any(reach[k, c] for k in children[p] if k != c)
        if not implied:
            keep.append((p, c))
    return ClusterGraph(g.clusters, tuple(keep))


def weak_components(g: ClusterGraph) -> list[list[int]]:
    """Weakly connected components; isolated clusters are their own component."""
    parent = list(range(len(g.clusters)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p, c in g.edges:
        rp, rc = find(p), find(c)
        if rp != rc:
            parent[max(rp, rc)] = min(rp, rc)
    groups = defaultdict(list)
    for i in range(len(g.clusters)):
        groups[find(i)].append(i)
    return [groups[r] for r in sorted(groups)]


def longest_path_nodes(g: ClusterGraph, nodes: Iterable[int] | None = None) -> int:
    """Node count of the longest directed path within ``nodes`` (default: all)."""
    allowed = set(range(len(g.clusters)) if nodes is None else nodes)
    if not allowed:
        return 0
    children = g.children()
    depth = {}
    for u in reversed(topological_order(g)):
        if u in allowed:
            depth[u] = 1 + max((depth[c] for c in children[u] if c in allowed), default=0)
    return max(depth.values())


@dataclass(frozen=True)
class Topic:
    topic_id: str
    documents: tuple[Document, ...]
    mentions: tuple[Mention, ...]
    gold: ClusterGraph | None = None
    metadata: Mapping[str, Any] | None = None

    def __post_init__(self):
        tid = self.topic_id
        docs = {}
        for d in self.documents:
            if d.doc_id in docs:
                raise ValidationError(f"duplicate doc_id {d.doc_id!r}", tid)
            docs[d.doc_id] = d
        ids, keys = set(), set()
        mentions = []
        for m in self.mentions:
            if m.mention_id in ids:
                raise ValidationError(f"duplicate mention_id {m.mention_id!r}", tid)
            doc = docs.get(m.doc_id)
            if doc is None:
                raise ValidationError(
                    f"mention {m.mention_id!r} references unknown doc_id {m.doc_id!r}", tid)
            if not (0 <= m.start < m.end <= len(doc.tokens)):
                raise ValidationError(
                    f"mention {m.mention_id!r} has invalid span [{m.start}, {m.end}) "
                    f"for a document of {len(doc.tokens)} tokens", tid)
            if m.key in keys:
                raise ValidationError(
                    f"mention {m.mention_id!r} duplicates span {list(m.key)}", tid)
            ids.add(m.mention_id)
            keys.add(m.key)
            surface = " ".join(doc.tokens[m.start:m.end])
            if m.surface != surface:
                m = Mention(m.mention_id, m.doc_id, m.start, m.end, surface)
            mentions.append(m)
        object.__setattr__(self, "mentions", tuple(mentions))
        if self.gold is not None:
            unknown = self.gold.mentions - ids
            if unknown:
                raise ValidationError(
                    f"clusters reference unknown mention ids {sorted(map(str, unknown))}", tid)

    @property
    def mention_by_id(self) -> dict[str, Mention]:
        return {m.mention_id: m for m in self.mentions}

    def keyed(self, graph: ClusterGraph) -> ClusterGraph:
        """Translate a mention-id graph to ``(doc_id, start, end)`` members."""
        by_id = self.mention_by_id
        return graph.relabel({mid: by_id[mid].key for mid in graph.mentions})

    def with_graph(self, graph: ClusterGraph | None) -> Topic:
        return Topic(self.topic_id, self.documents, self.mentions, graph, self.metadata)


def sorted_mentions(mentions: Sequence[Mention]) -> list[Mention]:
    """Mentions in identity order, independent of the input ordering."""
    return sorted(mentions, key=lambda m: m.key)
