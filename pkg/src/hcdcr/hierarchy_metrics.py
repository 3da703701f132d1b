"""Cluster-level hierarchy score and path-distance score.

Both compare two :class:`ClusterGraph` objects over a shared mention
universe; members must be comparable handles (normally ``(doc_id, start,
end)`` keys).  Mentions missing from one graph simply never witness a
relation there.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Hashable

from .coref_metrics import PRF, Counts
from .model import ClusterGraph, transitive_closure

ANY_PAIR = "any-pair"
HALF = "half"


@dataclass(frozen=True)
class HierarchyMatch:
    system_edge: tuple[int, int]
    matched: bool
    witness: tuple[Hashable, Hashable] | None = None


def _edge_matches(src: ClusterGraph, src_closed: set, other: ClusterGraph,
                  other_closed: set, overlap: str) -> list[HierarchyMatch]:
    """Judge each closed edge of ``src`` against the closed edges of ``other``."""
    out = []
    for p, c in sorted(src_closed):
        parents = src.clusters[p]
        children = src.clusters[c]
        # tally members by their cluster on the other side
        up = Counter(other.cluster_of(m) for m in parents)
        down = Counter(other.cluster_of(m) for m in children)
        up.pop(None, None)
        down.pop(None, None)
        hits = 0
        witness = None
        for gp, np_ in up.items():
            for gc, nc in down.items():
                if (gp, gc) in other_closed:
                    hits += np_ * nc
                    if witness is None:
                        witness = (gp, gc)
        if overlap == ANY_PAIR:
            matched = hits > 0
        elif overlap == HALF:
            matched = hits >= 0.5 * len(parents) * len(children)
        else:
            raise ValueError(f"unknown overlap mode {overlap!r}")
        if matched:
            gp, gc = witness
            p_m = min((m for m in parents if other.cluster_of(m) == gp), key=repr)
            c_m = min((m for m in children if other.cluster_of(m) == gc), key=repr)
            out.append(HierarchyMatch((p, c), True, (p_m, c_m)))
        else:
            out.append(HierarchyMatch((p, c), False))
    return out


def hierarchy_matches(gold: ClusterGraph, sys: ClusterGraph,
                      overlap: str = ANY_PAIR) -> tuple[list[HierarchyMatch], list[HierarchyMatch]]:
    """Per-edge judgements: (system edges vs gold, gold edges vs system)."""
    g_closed = set(transitive_closure(gold).edges)
    s_closed = set(transitive_closure(sys).edges)
    return (_edge_matches(sys, s_closed, gold, g_closed, overlap),
            _edge_matches(gold, g_closed, sys, s_closed, overlap))


def hierarchy_counts(gold: ClusterGraph, sys: ClusterGraph, overlap: str = ANY_PAIR) -> Counts:
    precision_side, recall_side = hierarchy_matches(gold, sys, overlap)
    return Counts(sum(m.matched for m in recall_side), len(recall_side),
                  sum(m.matched for m in precision_side), len(precision_side))


def hierarchy_score(gold: ClusterGraph, sys: ClusterGraph, overlap: str = ANY_PAIR) -> PRF:
    return hierarchy_counts(gold, sys, overlap).prf


def _distances(g: ClusterGraph, closed: bool) -> list[dict[int, int]]:
    """down[i][j]: edges on the shortest downward path i -> j (0 for i == j)."""
    if closed:
        g = transitive_closure(g)
    children = g.children()
    down = []
    for src in range(len(g.clusters)):
        dist = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in children[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        down.append(dist)
    return down


def _chain(down: list[dict[int, int]], a: int, b: int) -> int | None:
    d = down[a].get(b)
    return down[b].get(a) if d is None else d


def cluster_distance(g: ClusterGraph, m1: Hashable, m2: Hashable, closed: bool = False) -> int | None:
    """Edges on the shortest single-direction chain joining two mentions' clusters."""
    a, b = g.cluster_of(m1), g.cluster_of(m2)
    for m, c in ((m1, a), (m2, b)):
        if c is None:
            raise KeyError(f"mention {m!r} is not clustered")
    return _chain(_distances(g, closed), a, b)


@dataclass(frozen=True)
class PathTally:
    """Summed ratio contributions and the number of pairs in W."""

    total: float = 0.0
    pairs: int = 0

    def __add__(self, other: PathTally) -> PathTally:
        return PathTally(self.total + other.total, self.pairs + other.pairs)

    @property
    def score(self) -> float:
        return self.total / self.pairs if self.pairs else 1.0


def _ratio(dg: int | None, ds: int | None) -> float:
    if dg is None or ds is None:
        return 0.0
    return (min(dg, ds) + 1) / (max(dg, ds) + 1)


def path_tally(gold: ClusterGraph, sys: ClusterGraph, closed: bool = False) -> PathTally:
    """Path-distance contributions over all mention pairs.

    Mentions sharing both their gold and their system cluster form one cell;
    every pair between two cells has the same pair of distances, so pairs are
    counted per cell pair rather than enumerated.
    """
    g_down, s_down = _distances(gold, closed), _distances(sys, closed)
    cells = Counter((gold.cluster_of(m), sys.cluster_of(m)) for m in gold.mentions | sys.mentions)
    keys = sorted(cells, key=repr)
    total = 0.0
    pairs = 0
    for i, (ga, sa) in enumerate(keys):
        na = cells[(ga, sa)]
        for gb, sb in keys[i:]:
            n = na * (na - 1) // 2 if (gb, sb) == (ga, sa) else na * cells[(gb, sb)]
            if not n:
                continue
            dg = None if ga is None or gb is None else _chain(g_down, ga, gb)
            ds = None if sa is None or sb is None else _chain(s_down, sa, sb)
            if dg is None and ds is None:
                continue
            pairs += n
            total += n * _ratio(dg, ds)
    return PathTally(total, pairs)


def path_distance_score(gold: ClusterGraph, sys: ClusterGraph, closed: bool = False) -> float:
    return path_tally(gold, sys, closed).score


@dataclass(frozen=True)
class PathPair:
    pair: tuple[Hashable, Hashable]
    d_gold: int | None
    d_sys: int | None

    @property
    def ratio(self) -> float:
        return _ratio(self.d_gold, self.d_sys)


def path_pairs(gold: ClusterGraph, sys: ClusterGraph, closed: bool = False):
    """Enumerate W explicitly, one :class:`PathPair` per contributing mention pair."""
    g_down, s_down = _distances(gold, closed), _distances(sys, closed)
    mentions = sorted(gold.mentions | sys.mentions, key=repr)
    for i, a in enumerate(mentions):
        for b in mentions[i + 1:]:
            dg = ds = None
            ga, gb = gold.cluster_of(a), gold.cluster_of(b)
            if ga is not None and gb is not None:
                dg = _chain(g_down, ga, gb)
            sa, sb = sys.cluster_of(a), sys.cluster_of(b)
            if sa is not None and sb is not None:
                ds = _chain(s_down, sa, sb)
            if dg is not None or ds is not None:
                yield PathPair((a, b), dg, ds)


@dataclass(frozen=True)
class HierarchyCounts:
    any_pair: Counts = Counts()
    half: Counts = Counts()
    path: PathTally = PathTally()

    def __add__(self, other: HierarchyCounts) -> HierarchyCounts:
        return HierarchyCounts(self.any_pair + other.any_pair, self.half + other.half,
                               self.path + other.path)


def hierarchy_report_counts(gold: ClusterGraph, sys: ClusterGraph,
                            closed_paths: bool = False) -> HierarchyCounts:
    return HierarchyCounts(hierarchy_counts(gold, sys, ANY_PAIR),
                           hierarchy_counts(gold, sys, HALF),
                           path_tally(gold, sys, closed_paths))
