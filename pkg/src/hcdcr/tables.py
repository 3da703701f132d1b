"""Pairwise score tables and surface embedding tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import ValidationError

COREF_ONLY = "coref-only"
FOUR_CLASS = "four-class"

# Class order of a four-class vector; "parent" arrows point parent -> child.
COREFER, M1_PARENT, M2_PARENT, UNRELATED = range(4)


def _swap(vec: tuple[float, ...]) -> tuple[float, ...]:
    if len(vec) == 4:
        return (vec[COREFER], vec[M2_PARENT], vec[M1_PARENT], vec[UNRELATED])
    return vec


@dataclass(frozen=True)
class ScoreTable:
    """Scores over unordered mention pairs.

    Entries are stored under ``(a, b)`` with ``a < b``; a four-class vector
    given for ``(b, a)`` is stored with its two parent classes swapped, so
    lookups in either order see consistent semantics.
    """

    topic_id: str
    kind: str
    entries: dict[tuple[str, str], tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (COREF_ONLY, FOUR_CLASS):
            raise ValidationError(f"unknown score table kind {self.kind!r}", self.topic_id)
        width = 1 if self.kind == COREF_ONLY else 4
        entries = {}
        for (m1, m2), vec in self.entries.items():
            vec = tuple(float(v) for v in np.atleast_1d(vec))
            if m1 == m2:
                raise ValidationError(f"self pair for mention {m1!r}", self.topic_id)
            if len(vec) != width:
                raise ValidationError(
                    f"pair ({m1!r}, {m2!r}) has {len(vec)} scores, expected {width}",
                    self.topic_id)
            if width == 1 and not 0.0 <= vec[0] <= 1.0:
                raise ValidationError(
                    f"pair ({m1!r}, {m2!r}) similarity {vec[0]} outside [0, 1]", self.topic_id)
            if width == 4:
                if min(vec) < 0 or abs(sum(vec) - 1.0) > 1e-6:
                    raise ValidationError(
                        f"pair ({m1!r}, {m2!r}) probabilities {list(vec)} are not normalized",
                        self.topic_id)
            if m2 < m1:
                m1, m2, vec = m2, m1, _swap(vec)
            if (m1, m2) in entries:
                raise ValidationError(f"duplicate pair ({m1!r}, {m2!r})", self.topic_id)
            entries[(m1, m2)] = vec
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_pairs(cls, topic_id: str, kind: str,
                   pairs: Iterable[tuple[str, str, Sequence[float]]]) -> ScoreTable:
        return cls(topic_id, kind, {(a, b): tuple(s) for a, b, s in pairs})

    def get(self, m1: str, m2: str) -> tuple[float, ...] | None:
        """Score vector oriented as ``(m1, m2)``, or None when absent."""
        if m1 <= m2:
            return self.entries.get((m1, m2))
        vec = self.entries.get((m2, m1))
        return None if vec is None else _swap(vec)

    def coref(self, m1: str, m2: str) -> float:
        return self.get(m1, m2)[COREFER]

    def child_prob(self, child: str, parent: str) -> float:
        """Probability that ``child`` is a child of ``parent``."""
        if self.kind != FOUR_CLASS:
            raise ValueError("hierarchy scores need a four-class table")
        return self.get(child, parent)[M2_PARENT]

    def missing_pairs(self, mention_ids: Iterable[str]) -> list[tuple[str, str]]:
        ids = sorted(set(mention_ids))
        return [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]
                if (a, b) not in self.entries]

    def check_mentions(self, mention_ids: Iterable[str]) -> None:
        known = set(mention_ids)
        for a, b in self.entries:
            for m in (a, b):
                if m not in known:
                    raise ValidationError(f"score table references unknown mention {m!r}",
                                          self.topic_id)

    def matrices(self, mention_ids: Sequence[str]) -> tuple[np.ndarray, np.ndarray | None]:
        """Dense coref matrix and, for four-class tables, a child matrix.

        ``child[a, b]`` is the probability that mention ``a`` is a child of
        mention ``b``.  Raises on any missing pair.
        """
        n = len(mention_ids)
        coref = np.zeros((n, n))
        child = np.zeros((n, n)) if self.kind == FOUR_CLASS else None
        for i in range(n):
            for j in range(i + 1, n):
                vec = self.get(mention_ids[i], mention_ids[j])
                if vec is None:
                    raise ValidationError(
                        f"score table is missing pair ({mention_ids[i]!r}, {mention_ids[j]!r})",
                        self.topic_id)
                coref[i, j] = coref[j, i] = vec[COREFER]
                if child is not None:
                    child[i, j] = vec[M2_PARENT]
                    child[j, i] = vec[M1_PARENT]
        return coref, child


@dataclass(frozen=True)
class EmbeddingTable:
    """Precomputed vectors keyed by surface string."""

    surfaces: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(self.surfaces):
            raise ValidationError(
                f"embedding matrix shape {vectors.shape} does not match "
                f"{len(self.surfaces)} surfaces")
        if len(set(self.surfaces)) != len(self.surfaces):
            raise ValidationError("duplicate surface in embedding table")
        object.__setattr__(self, "surfaces", tuple(self.surfaces))
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "_row", {s: i for i, s in enumerate(self.surfaces)})

    @classmethod
    def from_mapping(cls, entries: Mapping[str, Sequence[float]], dim: int | None = None):
        surfaces = list(entries)
        if not surfaces:
            return cls((), np.zeros((0, dim or 0)))
        rows = [np.asarray(entries[s], dtype=np.float64) for s in surfaces]
        dim = len(rows[0]) if dim is None else dim
        for s, r in zip(surfaces, rows):
            if r.shape != (dim,):
                raise ValidationError(f"vector for {s!r} has length {r.size}, expected {dim}")
        return cls(tuple(surfaces), np.vstack(rows))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.surfaces)

    def __contains__(self, surface: str) -> bool:
        return surface in self._row

    def vector(self, surface: str) -> np.ndarray:
        return self.vectors[self._row[surface]]
