"""MUC, B-cubed, CEAFe and LEA over clusterings of hashable mentions.

Every metric is computed as a :class:`Counts` of recall/precision numerators
and denominators so that topics can be micro-averaged by summing counts
before dividing.  A zero denominator means that side has nothing to score
and yields the vacuous value 1.0.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Collection, Hashable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

Clustering = Sequence[Collection[Hashable]]


@dataclass(frozen=True)
class PRF:
    recall: float
    precision: float
    f1: float

    @classmethod
    def of(cls, recall: float, precision: float) -> PRF:
        return cls(recall, precision, f1(recall, precision))

    def as_dict(self) -> dict[str, float]:
        return {"recall": self.recall, "precision": self.precision, "f1": self.f1}


def f1(recall: float, precision: float) -> float:
    if recall + precision == 0:
        return 0.0
    return 2 * recall * precision / (recall + precision)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 1.0


@dataclass(frozen=True)
class Counts:
    r_num: float = 0.0
    r_den: float = 0.0
    p_num: float = 0.0
    p_den: float = 0.0

    def __add__(self, other: Counts) -> Counts:
        return Counts(self.r_num + other.r_num, self.r_den + other.r_den,
                      self.p_num + other.p_num, self.p_den + other.p_den)

    @property
    def prf(self) -> PRF:
        return PRF.of(_ratio(self.r_num, self.r_den), _ratio(self.p_num, self.p_den))

    @property
    def score(self) -> float:
        return self.prf.f1

    def swapped(self) -> Counts:
        return Counts(self.p_num, self.p_den, self.r_num, self.r_den)


def check_clustering(c: Clustering) -> None:
    seen = set()
    for cluster in c:
        if not cluster:
            raise ValueError("empty cluster")
        for m in cluster:
            if m in seen:
                raise ValueError(f"mention {m!r} is in more than one cluster")
            seen.add(m)


def filter_singletons(c: Clustering) -> list[frozenset]:
    return [frozenset(k) for k in c if len(k) > 1]


def _as_sets(c: Clustering) -> list[frozenset]:
    check_clustering(c)
    return [frozenset(k) for k in c]


def _membership(c: list[frozenset]) -> dict:
    return {m: i for i, k in enumerate(c) for m in k}


def _muc_side(keys: list[frozenset], responses: list[frozenset]) -> tuple[float, float]:
    owner = _membership(responses)
    num = den = 0
    for k in keys:
        parts = set()
        unresolved = 0
        for m in k:
            r = owner.get(m)
            if r is None:
                unresolved += 1
            else:
                parts.add(r)
        num += len(k) - (len(parts) + unresolved)
        den += len(k) - 1
    return num, den


def muc_counts(gold: Clustering, sys: Clustering) -> Counts:
    g, s = _as_sets(gold), _as_sets(sys)
    r_num, r_den = _muc_side(g, s)
    p_num, p_den = _muc_side(s, g)
    return Counts(r_num, r_den, p_num, p_den)


def _b3_side(keys: list[frozenset], responses: list[frozenset]) -> tuple[float, float]:
    owner = _membership(responses)
    num = den = 0.0
    for k in keys:
        overlap = Counter(owner[m] for m in k if m in owner)
        num += sum(n * n for n in overlap.values()) / len(k)
        den += len(k)
    return num, den


def b_cubed_counts(gold: Clustering, sys: Clustering) -> Counts:
    g, s = _as_sets(gold), _as_sets(sys)
    r_num, r_den = _b3_side(g, s)
    p_num, p_den = _b3_side(s, g)
    return Counts(r_num, r_den, p_num, p_den)


def phi4(k: Collection, r: Collection) -> float:
    return 2 * len(set(k) & set(r)) / (len(k) + len(r))


def phi4_matrix(gold: list[frozenset], sys: list[frozenset]) -> np.ndarray:
    owner = _membership(sys)
    sim = np.zeros((len(gold), len(sys)))
    for i, k in enumerate(gold):
        for j, n in Counter(owner[m] for m in k if m in owner).items():
            sim[i, j] = 2 * n / (len(k) + len(sys[j]))
    return sim


def ceaf_e_counts(gold: Clustering, sys: Clustering) -> Counts:
    g, s = _as_sets(gold), _as_sets(sys)
    total = 0.0
    if g and s:
        sim = phi4_matrix(g, s)
        rows, cols = linear_sum_assignment(sim, maximize=True)
        total = float(sim[rows, cols].sum())
    return Counts(total, len(g), total, len(s))


def _links(n: int) -> float:
    return n * (n - 1) / 2


def _lea_side(keys: list[frozenset], responses: list[frozenset]) -> tuple[float, float]:
    owner = _membership(responses)
    num = den = 0.0
    for k in keys:
        if len(k) == 1:
            # a singleton entity is resolved iff it is a singleton on the other side
            (m,) = k
            r = owner.get(m)
            resolution = 1.0 if r is not None and len(responses[r]) == 1 else 0.0
        else:
            overlap = Counter(owner[m] for m in k if m in owner)
            resolution = sum(_links(n) for n in overlap.values()) / _links(len(k))
        num += len(k) * resolution
        den += len(k)
    return num, den


def lea_counts(gold: Clustering, sys: Clustering) -> Counts:
    g, s = _as_sets(gold), _as_sets(sys)
    r_num, r_den = _lea_side(g, s)
    p_num, p_den = _lea_side(s, g)
    return Counts(r_num, r_den, p_num, p_den)


def muc(gold: Clustering, sys: Clustering) -> PRF:
    return muc_counts(gold, sys).prf


def b_cubed(gold: Clustering, sys: Clustering) -> PRF:
    return b_cubed_counts(gold, sys).prf


def ceaf_e(gold: Clustering, sys: Clustering) -> PRF:
    return ceaf_e_counts(gold, sys).prf


def lea(gold: Clustering, sys: Clustering) -> PRF:
    return lea_counts(gold, sys).prf


def conll_f1(muc: PRF, b3: PRF, ceafe: PRF) -> float:
    return (muc.f1 + b3.f1 + ceafe.f1) / 3


METRICS = {
    "muc": muc_counts,
    "b3": b_cubed_counts,
    "ceafe": ceaf_e_counts,
    "lea": lea_counts,
}


@dataclass(frozen=True)
class CorefCounts:
    """Counts for all four metrics of one topic (or a pooled set of topics)."""

    muc: Counts = Counts()
    b3: Counts = Counts()
    ceafe: Counts = Counts()
    lea: Counts = Counts()

    def __add__(self, other: CorefCounts) -> CorefCounts:
        return CorefCounts(self.muc + other.muc, self.b3 + other.b3,
                           self.ceafe + other.ceafe, self.lea + other.lea)

    @property
    def conll(self) -> float:
        return conll_f1(self.muc.prf, self.b3.prf, self.ceafe.prf)

    @property
    def score(self) -> float:
        return self.conll


def coref_counts(gold: Clustering, sys: Clustering, singletons: bool = False) -> CorefCounts:
    """All metrics at once; singleton clusters are dropped unless ``singletons``."""
    if not singletons:
        gold, sys = filter_singletons(gold), filter_singletons(sys)
    return CorefCounts(*(fn(gold, sys) for fn in METRICS.values()))
