"""Scoring system topics against gold topics.

Mentions are matched across files by ``(doc_id, start, end)``.  Per-topic
results keep raw counts so that micro averages pool numerators and
denominators across topics before dividing; macro averages are plain means
of per-topic values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import fmean
from typing import Iterable, Mapping, Sequence

from .coref_metrics import PRF, CorefCounts, coref_counts
from .hierarchy_metrics import HierarchyCounts, hierarchy_report_counts
from .model import ClusterGraph, Topic, ValidationError


@dataclass(frozen=True)
class TopicCounts:
    coref: CorefCounts = field(default_factory=CorefCounts)
    hierarchy: HierarchyCounts = field(default_factory=HierarchyCounts)

    def __add__(self, other: TopicCounts) -> TopicCounts:
        return TopicCounts(self.coref + other.coref, self.hierarchy + other.hierarchy)


@dataclass(frozen=True)
class MetricReport:
    muc: PRF
    b3: PRF
    ceafe: PRF
    lea: PRF
    conll: float
    hierarchy: PRF
    hierarchy_half: PRF
    path_ratio: float
    pairs_in_w: float

    @classmethod
    def from_counts(cls, c: TopicCounts) -> MetricReport:
        h = c.hierarchy
        return cls(c.coref.muc.prf, c.coref.b3.prf, c.coref.ceafe.prf, c.coref.lea.prf,
                   c.coref.conll, h.any_pair.prf, h.half.prf, h.path.score, h.path.pairs)

    @classmethod
    def mean(cls, reports: Sequence[MetricReport]) -> MetricReport:
        def avg_prf(name):
            prfs = [getattr(r, name) for r in reports]
            return PRF(fmean(p.recall for p in prfs), fmean(p.precision for p in prfs),
                       fmean(p.f1 for p in prfs))

        return cls(avg_prf("muc"), avg_prf("b3"), avg_prf("ceafe"), avg_prf("lea"),
                   fmean(r.conll for r in reports), avg_prf("hierarchy"),
                   avg_prf("hierarchy_half"), fmean(r.path_ratio for r in reports),
                   fmean(r.pairs_in_w for r in reports))

    def as_dict(self) -> dict:
        return {
            "muc": self.muc.as_dict(),
            "b3": self.b3.as_dict(),
            "ceafe": self.ceafe.as_dict(),
            "lea": self.lea.as_dict(),
            "conll": self.conll,
            "hierarchy": {"any_pair": self.hierarchy.as_dict(),
                          "half": self.hierarchy_half.as_dict()},
            "path_ratio": self.path_ratio,
            "pairs_in_W": self.pairs_in_w,
        }


def score_graphs(gold: ClusterGraph, sys: ClusterGraph, singletons: bool = False,
                 closed_paths: bool = False) -> TopicCounts:
    """Counts for two graphs whose members are comparable mention handles."""
    return TopicCounts(coref_counts(gold.clusters, sys.clusters, singletons),
                       hierarchy_report_counts(gold, sys, closed_paths))


def align(gold: Topic, sys: Topic) -> tuple[ClusterGraph, ClusterGraph]:
    """Both graphs keyed by mention identity, after checking the mention sets agree."""
    if gold.gold is None:
        raise ValidationError("gold topic has no clusters", gold.topic_id)
    if sys.gold is None:
        raise ValidationError("system topic has no clusters", sys.topic_id)
    g_keys = {m.key for m in gold.mentions}
    s_keys = {m.key for m in sys.mentions}
    if g_keys != s_keys:
        diff = sorted(g_keys ^ s_keys)
        raise ValidationError(
            f"gold and system mentions differ ({len(diff)} spans, e.g. {list(diff[0])})",
            gold.topic_id)
    return gold.keyed(gold.gold), sys.keyed(sys.gold)


def score_topic(gold: Topic, sys: Topic, singletons: bool = False,
                closed_paths: bool = False) -> TopicCounts:
    g, s = align(gold, sys)
    return score_graphs(g, s, singletons, closed_paths)


def pair_topics(gold: Iterable[Topic], sys: Iterable[Topic]) -> list[tuple[Topic, Topic]]:
    sys_by_id = {t.topic_id: t for t in sys}
    gold = list(gold)
    missing = [t.topic_id for t in gold if t.topic_id not in sys_by_id]
    if missing:
        raise ValidationError(f"system output has no topic {missing[0]!r}", missing[0])
    extra = sorted(set(sys_by_id) - {t.topic_id for t in gold})
    if extra:
        raise ValidationError(f"system topic {extra[0]!r} is not in the gold file", extra[0])
    return [(g, sys_by_id[g.topic_id]) for g in sorted(gold, key=lambda t: t.topic_id)]


def pooled(counts: Iterable[TopicCounts]) -> TopicCounts:
    total = TopicCounts()
    for c in counts:
        total = total + c
    return total


def micro_report(counts: Iterable[TopicCounts]) -> MetricReport:
    return MetricReport.from_counts(pooled(counts))


def macro_report(counts: Iterable[TopicCounts]) -> MetricReport:
    return MetricReport.mean([MetricReport.from_counts(c) for c in counts])


def conll_by_topic(counts: Mapping[str, TopicCounts]) -> dict[str, float]:
    return {tid: c.coref.conll for tid, c in counts.items()}
