"""Candidate topic generation from concept graphs and a mention corpus.

Concept graphs from a knowledge base and from hypernym extraction are merged
with surface de-duplication, split into parent-plus-children groups, extended
with curated groups, and each group is turned into a candidate topic by
nearest-neighbour retrieval over precomputed surface embeddings.
"""

from __future__ import annotations

import logging
import random
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import ValidationError
from .tables import EmbeddingTable
from .textsim import edit_similarity

log = logging.getLogger(__name__)

KB = "kb"
HYPERNYM = "hypernym-extraction"
CURATED = "curated"

MERGE_THRESHOLD = 0.8
RETRIEVAL_THRESHOLD = 0.8


def _strip_plural(token: str) -> str:
    if len(token) > 3 and token.endswith("s") and not token.endswith(("ss", "us", "is")):
        return token[:-1]
    return token


def normalize_surface(s: str) -> str:
    """Lowercase, punctuation to spaces, collapsed whitespace, plural 's' dropped."""
    chars = (" " if unicodedata.category(ch).startswith("P") else ch for ch in s.lower())
    return " ".join(_strip_plural(t) for t in "".join(chars).split())


@dataclass(frozen=True)
class ConceptGraph:
    """Concept surfaces tagged with their sources, plus parent -> child edges."""

    nodes: Mapping[str, frozenset[str]]
    edges: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        nodes = {s: frozenset(tags) for s, tags in self.nodes.items()}
        for s in nodes:
            if not s.strip():
                raise ValidationError("empty concept surface")
        edges = frozenset(self.edges)
        for p, c in edges:
            if p == c:
                raise ValidationError(f"self edge on concept {p!r}")
            for s in (p, c):
                if s not in nodes:
                    raise ValidationError(f"edge references unknown concept {s!r}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], source: str,
                   extra_nodes: Iterable[str] = ()) -> ConceptGraph:
        edges = [(p.strip(), c.strip()) for p, c in edges]
        nodes = {s.strip(): frozenset([source]) for s in extra_nodes}
        for p, c in edges:
            nodes.setdefault(p, frozenset([source]))
            nodes.setdefault(c, frozenset([source]))
        return cls(nodes, frozenset((p, c) for p, c in edges if p != c))

    def children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for p, c in sorted(self.edges):
            out.setdefault(p, []).append(c)
        return out


def remove_stoplisted(g: ConceptGraph, stoplist: Iterable[str]) -> ConceptGraph:
    """Drop concepts whose normalized form is on the stop list."""
    stop = {normalize_surface(s) for s in stoplist}
    keep = {s: t for s, t in g.nodes.items() if normalize_surface(s) not in stop}
    return ConceptGraph(keep, frozenset((p, c) for p, c in g.edges if p in keep and c in keep))


def _unify(surfaces: list[str], threshold: float) -> dict[str, str]:
    """Map each surface to the smallest surface of its single-link group."""
    parent = {s: s for s in surfaces}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            lo, hi = sorted((ra, rb))
            parent[hi] = lo

    norm = {s: normalize_surface(s) for s in surfaces}
    by_form: dict[str, list[str]] = {}
    for s in surfaces:
        by_form.setdefault(norm[s], []).append(s)
    for group in by_form.values():
        for s in group[1:]:
            union(group[0], s)

    # similarity >= t needs |len difference| <= (1 - t) * longer length
    forms = sorted(by_form, key=lambda f: (len(f), f))
    for i, a in enumerate(forms):
        for b in forms[i + 1:]:
            if len(b) - len(a) > (1 - threshold) * len(b) + 1e-9:
                break
            if edit_similarity(a, b) >= threshold:
                union(by_form[a][0], by_form[b][0])
    return {s: find(s) for s in surfaces}


def merge_graphs(a: ConceptGraph, b: ConceptGraph, threshold: float = MERGE_THRESHOLD) -> ConceptGraph:
    """Union of two graphs with near-duplicate concepts unified."""
    surfaces = sorted(set(a.nodes) | set(b.nodes))
    rep = _unify(surfaces, threshold)
    nodes: dict[str, set[str]] = {}
    for g in (a, b):
        for s, tags in g.nodes.items():
            nodes.setdefault(rep[s], set()).update(tags)
    edges = {(rep[p], rep[c]) for g in (a, b) for p, c in g.edges}
    return ConceptGraph({s: frozenset(t) for s, t in nodes.items()},
                        frozenset((p, c) for p, c in edges if p != c))


def form_groups(g: ConceptGraph, curated: Sequence[Sequence[str]] = ()) -> list[list[str]]:
    """One group per parent with children (parent first), then curated groups as given."""
    groups = [[p, *kids] for p, kids in sorted(g.children().items())]
    groups.extend(list(c) for c in curated)
    return groups


@dataclass(frozen=True)
class CorpusMention:
    surface: str
    source: str
    context: str = ""

    def __post_init__(self):
        if not self.surface:
            raise ValidationError("empty mention surface")


@dataclass
class Retrieval:
    concept: str
    hits: list[tuple[CorpusMention, float]] = field(default_factory=list)


@dataclass
class CandidateTopic:
    group: list[str]
    retrievals: list[Retrieval]
    missing: list[str]

    @property
    def mentions(self) -> list[tuple[CorpusMention, float, str]]:
        """Union of retrieved mentions: (mention, best similarity, concept)."""
        best: dict[CorpusMention, tuple[float, str]] = {}
        for r in self.retrievals:
            for m, sim in r.hits:
                if m not in best or sim > best[m][0]:
                    best[m] = (sim, r.concept)
        return sorted(((m, s, c) for m, (s, c) in best.items()),
                      key=lambda x: (-x[1], x[0].surface, x[0].source, x[0].context))


class MentionIndex:
    """Exact cosine search over the corpus mentions that have embeddings."""

    def __init__(self, corpus: Sequence[CorpusMention], emb: EmbeddingTable):
        if len(emb) == 0:
            raise ValidationError("embedding table is empty")
        self.emb = emb
        self.mentions = [m for m in corpus if m.surface in emb]
        self.unembedded = sorted({m.surface for m in corpus if m.surface not in emb})
        if self.unembedded:
            log.warning("%d corpus surfaces have no embedding", len(self.unembedded))
        if self.mentions:
            mat = np.vstack([emb.vector(m.surface) for m in self.mentions])
        else:
            mat = np.zeros((0, emb.dim))
        self.matrix = _unit_rows(mat)
        self.sources = sorted({m.source for m in self.mentions})

    def similarities(self, vector: np.ndarray) -> np.ndarray:
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (self.emb.dim,):
            raise ValidationError(
                f"query vector has dimension {vector.size}, expected {self.emb.dim}")
        norm = np.linalg.norm(vector)
        if norm == 0:
            return np.zeros(len(self.mentions))
        return self.matrix @ (vector / norm)

    def _ranked(self, sims: np.ndarray, rows: Iterable[int], min_sim: float) -> list[int]:
        rows = [i for i in rows if sims[i] > min_sim]
        return sorted(rows, key=lambda i: (-sims[i], self.mentions[i].surface,
                                           self.mentions[i].source, self.mentions[i].context))

    def top_k(self, vector, k: int, min_sim: float = RETRIEVAL_THRESHOLD) -> list[tuple[CorpusMention, float]]:
        sims = self.similarities(vector)
        rows = self._ranked(sims, range(len(self.mentions)), min_sim)[:k]
        return [(self.mentions[i], float(sims[i])) for i in rows]

    def proportional(self, vector, k: int, rng: random.Random,
                     min_sim: float = RETRIEVAL_THRESHOLD) -> list[tuple[CorpusMention, float]]:
        """Sample up to ``k`` passing mentions at one common rate from every source.

        Each source's quota is its share of the passing pool (largest remainder,
        at least one per non-empty source while ``k`` allows), so a small
        source is sampled at the same proportion as a large one rather than
        being crowded out of a global top-k.
        """
        sims = self.similarities(vector)
        pools = {s: self._ranked(sims, (i for i, m in enumerate(self.mentions) if m.source == s),
                                 min_sim)
                 for s in self.sources}
        pools = {s: p for s, p in pools.items() if p}
        total = sum(len(p) for p in pools.values())
        budget = min(k, total)
        if not budget:
            return []
        exact = {s: budget * len(p) / total for s, p in pools.items()}
        quota = {s: int(v) for s, v in exact.items()}
        for s in sorted(pools, key=lambda s: (quota[s] > 0, -(exact[s] - quota[s]), s)):
            if sum(quota.values()) >= budget:
                break
            quota[s] += 1
        rows = []
        for s in sorted(pools):
            pool = pools[s]
            rows.extend(sorted(rng.sample(pool, quota[s]), key=pool.index))
        rows = self._ranked(sims, rows, min_sim)
        return [(self.mentions[i], float(sims[i])) for i in rows]


def _unit_rows(mat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    return np.divide(mat, norms, out=np.zeros_like(mat, dtype=float), where=norms > 0)


def retrieve_mentions(group: Sequence[str], corpus: Sequence[CorpusMention] | MentionIndex,
                      emb: EmbeddingTable, k: int, min_sim: float = RETRIEVAL_THRESHOLD,
                      proportional: bool = False, seed: int = 0) -> CandidateTopic:
    """Top-k corpus mentions per group concept, united into one candidate topic.

    Concepts without an embedding are reported in ``missing`` and skipped.
    With ``proportional`` and more than one corpus source, per-concept
    retrieval samples every source at the same rate (seeded).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    index = corpus if isinstance(corpus, MentionIndex) else MentionIndex(corpus, emb)
    rng = random.Random(seed)
    retrievals, missing = [], []
    for concept in group:
        if concept not in emb:
            missing.append(concept)
            continue
        vec = emb.vector(concept)
        if proportional and len(index.sources) > 1:
            hits = index.proportional(vec, k, rng, min_sim)
        else:
            hits = index.top_k(vec, k, min_sim)
        retrievals.append(Retrieval(concept, hits))
    if missing:
        log.info("group %r: %d concepts lack embeddings", group[:1], len(missing))
    return CandidateTopic(list(group), retrievals, missing)
