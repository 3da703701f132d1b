"""Levenshtein distance and the normalized similarity built on it."""

from __future__ import annotations

from functools import lru_cache


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def fold(s: str) -> str:
    return " ".join(s.lower().split())


@lru_cache(maxsize=1 << 18)
def _folded_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def edit_similarity(a: str, b: str) -> float:
    """1 - distance / longer length, after lowercasing and collapsing whitespace."""
    a, b = fold(a), fold(b)
    if b < a:
        a, b = b, a
    return _folded_similarity(a, b)
