"""Inter-annotator agreement and lexical-diversity analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from statistics import fmean, pstdev
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .coref_metrics import coref_counts
from .hierarchy_metrics import ANY_PAIR, HALF, hierarchy_counts, path_tally
from .model import ClusterGraph, Topic, ValidationError

PER_TOPIC = "per-topic"
GLOBAL_PAIR = "global-pair"


@dataclass(frozen=True)
class Mean:
    """Pools plain floats by averaging, for callers without raw counts."""

    total: float = 0.0
    n: int = 0

    @classmethod
    def of(cls, value: float) -> Mean:
        return cls(value, 1)

    def __add__(self, other: Mean) -> Mean:
        return Mean(self.total + other.total, self.n + other.n)

    @property
    def score(self) -> float:
        return self.total / self.n if self.n else 1.0


def _single(name):
    def fn(gold, sys):
        return getattr(coref_counts(gold.clusters, sys.clusters), name)
    return fn


IAA_METRICS = {
    "conll": lambda g, s: coref_counts(g.clusters, s.clusters),
    "muc": _single("muc"),
    "b3": _single("b3"),
    "ceafe": _single("ceafe"),
    "lea": _single("lea"),
    "hierarchy": lambda g, s: hierarchy_counts(g, s, ANY_PAIR),
    "hierarchy-half": lambda g, s: hierarchy_counts(g, s, HALF),
    "path": path_tally,
}


def pairwise_iaa(annotations: Sequence[tuple[str, ClusterGraph]], topic: Topic,
                 metric: str = "conll") -> dict[tuple[str, str], object]:
    """Agreement tally for every ordered annotator pair ``(gold, system)``.

    Each value has a ``score`` property and supports ``+`` for pooling.
    """
    if metric not in IAA_METRICS:
        raise ValueError(f"unknown agreement metric {metric!r}")
    if len(annotations) < 2:
        raise ValidationError("agreement needs at least two annotations", topic.topic_id)
    names = [a for a, _ in annotations]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate annotator id", topic.topic_id)
    universe = {m.mention_id for m in topic.mentions}
    expected = None
    for name, g in annotations:
        if not g.mentions <= universe:
            raise ValidationError(f"annotator {name!r} clusters unknown mentions", topic.topic_id)
        if expected is None:
            expected = g.mentions
        elif g.mentions != expected:
            raise ValidationError(
                f"annotator {name!r} covers a different mention set", topic.topic_id)
    keyed = {name: topic.keyed(g) for name, g in annotations}
    fn = IAA_METRICS[metric]
    return {(a, b): fn(keyed[a], keyed[b]) for a, b in permutations(names, 2)}


def iaa_matrix(pairs: Mapping[tuple[str, str], object], annotators: Sequence[str]) -> np.ndarray:
    """Score matrix with rows as gold annotator; diagonal is 1."""
    n = len(annotators)
    out = np.eye(n)
    for i, a in enumerate(annotators):
        for j, b in enumerate(annotators):
            if i != j:
                out[i, j] = pairs[(a, b)].score
    return out


def _unordered(pairs: Mapping[tuple[str, str], object]) -> dict[tuple[str, str], object]:
    out = {}
    for (a, b), tally in pairs.items():
        key = (a, b) if a <= b else (b, a)
        if key not in out or (a, b) == key:
            out[key] = tally if not isinstance(tally, (int, float)) else Mean.of(tally)
    return out


def _pool(tallies):
    tallies = list(tallies)
    total = tallies[0]
    for t in tallies[1:]:
        total = total + t
    return total


@dataclass(frozen=True)
class IAASummary:
    avg: float
    max_micro: float
    max_macro: float
    pair_std: float


def iaa_summary(per_topic: Mapping[str, Mapping[tuple[str, str], object]],
                max_micro: str = PER_TOPIC) -> IAASummary:
    """AVG, MAX-micro and MAX-macro agreement over topics.

    ``per_topic`` maps topic id to annotator-pair tallies (or plain floats).
    Ordered duplicates are collapsed so each unordered pair counts once.
    AVG pools every pair in every topic.  MAX-micro pools, per topic, the
    best-agreeing pair (``max_micro="global-pair"`` instead takes the single
    annotator pair whose pooled score over all topics is highest).
    MAX-macro is the mean over topics of each topic's best pair score.
    ``pair_std`` is the spread of pooled per-annotator-pair scores.
    """
    if not per_topic:
        raise ValueError("no agreement scores given")
    topics = {tid: _unordered(p) for tid, p in sorted(per_topic.items())}
    if any(not p for p in topics.values()):
        raise ValueError("a topic has no annotator pairs")
    avg = _pool(t for p in topics.values() for t in p.values()).score

    best = {tid: max(sorted(p), key=lambda k: p[k].score) for tid, p in topics.items()}
    by_pair: dict[tuple[str, str], list] = {}
    for p in topics.values():
        for k, t in p.items():
            by_pair.setdefault(k, []).append(t)
    pair_scores = {k: _pool(ts).score for k, ts in sorted(by_pair.items())}

    if max_micro == PER_TOPIC:
        micro = _pool(topics[tid][k] for tid, k in best.items()).score
    elif max_micro == GLOBAL_PAIR:
        micro = max(pair_scores.values())
    else:
        raise ValueError(f"unknown MAX-micro mode {max_micro!r}")
    macro = fmean(topics[tid][k].score for tid, k in best.items())
    return IAASummary(avg, micro, macro, pstdev(pair_scores.values()))


def diversity_slices(topics: Iterable[Topic] | Iterable[str], baseline_scores: Mapping[str, float],
                     fractions: Sequence[float]) -> dict[float, list[str]]:
    """Bottom ``floor(fraction * n)`` topic ids by baseline score, per fraction.

    Ties are broken by topic id, so smaller slices nest in larger ones.
    """
    ids = [t if isinstance(t, str) else t.topic_id for t in topics]
    missing = [t for t in ids if t not in baseline_scores]
    if missing:
        raise ValueError(f"no baseline score for topic {missing[0]!r}")
    ranked = sorted(ids, key=lambda t: (baseline_scores[t], t))
    out = {}
    for f in fractions:
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"fraction {f} outside [0, 1]")
        # the epsilon keeps e.g. 0.1 * 200 from flooring to 19
        out[f] = ranked[:math.floor(f * len(ranked) + 1e-9)]
    return out


def flagged_topics(topics: Iterable[Topic], flag: str = "curated") -> list[str]:
    """Ids of topics whose metadata sets ``flag`` truthy."""
    return [t.topic_id for t in topics if t.metadata and t.metadata.get(flag)]


@dataclass(frozen=True)
class Correlation:
    pearson_r: float | None
    pearson_p: float | None
    spearman_rho: float | None
    spearman_p: float | None


def _pearson(x: np.ndarray, y: np.ndarray) -> tuple[float | None, float | None]:
    dx, dy = x - x.mean(), y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0:
        return None, None
    r = max(-1.0, min(1.0, float(dx @ dy) / denom))
    df = len(x) - 2
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt(df / (1 - r * r))
    return r, float(2 * stats.t.sf(abs(t), df))


def _average_ranks(v: np.ndarray) -> np.ndarray:
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v))
    sorted_v = v[order]
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def rank_correlation(x: Sequence[float], y: Sequence[float]) -> Correlation:
    """Pearson and Spearman coefficients with two-sided t-test p-values."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length sequences")
    if len(x) < 3:
        raise ValueError("correlation needs at least 3 points")
    r, rp = _pearson(x, y)
    rho, sp = _pearson(_average_ranks(x), _average_ranks(y))
    return Correlation(r, rp, rho, sp)
