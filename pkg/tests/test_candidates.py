import random

import numpy as np
import pytest

from hcdcr.candidates import (
    CURATED, HYPERNYM, KB, ConceptGraph, CorpusMention, MentionIndex, form_groups, merge_graphs,
    normalize_surface, remove_stoplisted, retrieve_mentions,
)
from hcdcr.tables import EmbeddingTable

import oracles


@pytest.mark.parametrize("raw,want", [
    ("Image-Classification!", "image classification"),
    ("graphs", "graph"),
    ("image classification", "image classification"),
    ("loss", "loss"),
    ("corpus", "corpus"),
    ("analysis", "analysis"),
    ("gas", "gas"),
    ("  Named   Entity  ", "named entity"),
])
def test_normalize(raw, want):
    assert normalize_surface(raw) == want
    assert normalize_surface(want) == want


def test_merge_case_variants():
    a = ConceptGraph.from_edges([("NLP", "POS tagging")], KB)
    b = ConceptGraph.from_edges([("NLP", "POS Tagging")], HYPERNYM)
    m = merge_graphs(a, b)
    assert set(m.nodes) == {"NLP", "POS Tagging"}
    assert m.nodes["NLP"] == {KB, HYPERNYM}
    assert m.edges == {("NLP", "POS Tagging")}


def test_merge_plural_variants():
    a = ConceptGraph.from_edges([("computer vision", "image classification")], KB)
    b = ConceptGraph.from_edges([("computer vision", "image classifications")], HYPERNYM)
    assert len(merge_graphs(a, b).nodes) == 2


def test_merge_near_duplicates_by_ratio():
    a = ConceptGraph.from_edges([("x", "named entity recognizer")], KB)
    b = ConceptGraph.from_edges([("x", "named entity recognition")], HYPERNYM)
    assert len(merge_graphs(a, b).nodes) == 2


def test_merge_disjoint_is_union():
    a = ConceptGraph.from_edges([("parsing", "dependency parsing")], KB)
    b = ConceptGraph.from_edges([("vision", "object detection")], HYPERNYM)
    m = merge_graphs(a, b)
    assert set(m.nodes) == set(a.nodes) | set(b.nodes)
    assert m.edges == a.edges | b.edges


def test_merge_threshold_matches_exhaustive_single_link():
    rng = random.Random(4)
    alphabet = "abcde"
    for _ in range(30):
        surfaces = {"".join(rng.choice(alphabet) for _ in range(rng.randint(3, 6)))
                    for _ in range(8)}
        g = ConceptGraph({s: {KB} for s in surfaces})
        m = merge_graphs(g, ConceptGraph({}))
        # exhaustive single-link closure over normalized forms
        groups = {s: {s} for s in surfaces}
        changed = True
        while changed:
            changed = False
            for s in surfaces:
                for t in surfaces:
                    if groups[s] is not groups[t] and oracles.levenshtein(
                            normalize_surface(s), normalize_surface(t)) <= 0.2 * max(
                            len(normalize_surface(s)), len(normalize_surface(t))) + 1e-12:
                        merged = groups[s] | groups[t]
                        for u in merged:
                            groups[u] = merged
                        changed = True
        want = {min(gr) for gr in map(frozenset, groups.values())}
        assert set(m.nodes) == want


def test_stoplist():
    g = ConceptGraph.from_edges([("method", "CRF"), ("NLP", "CRF")], KB)
    assert set(remove_stoplisted(g, ["Methods"]).nodes) == {"NLP", "CRF"}


def test_groups():
    g = ConceptGraph.from_edges([("p", "c2"), ("p", "c1")], KB)
    assert form_groups(g) == [["p", "c1", "c2"]]
    leaves = ConceptGraph({"a": {KB}, "b": {KB}})
    assert form_groups(leaves, [["x", "y"]]) == [["x", "y"]]


def test_concept_graph_rejects_unknown_node():
    with pytest.raises(ValueError):
        ConceptGraph({"a": {CURATED}}, {("a", "b")})


def _corpus():
    vecs = {"crf": [1.0, 0.0, 0.0], "crfs": [0.95, 0.1, 0.0], "lstm": [0.0, 1.0, 0.0],
            "cnn": [0.7, 0.7, 0.0], "svm": [0.9, 0.0, 0.3]}
    emb = EmbeddingTable.from_mapping(vecs)
    corpus = [CorpusMention(s, "pwc" if i % 2 else "s2orc") for i, s in enumerate(vecs)]
    return emb, corpus, vecs


def test_retrieve_identical_first():
    emb, corpus, _ = _corpus()
    topic = retrieve_mentions(["crf"], corpus, emb, 2)
    hits = topic.retrievals[0].hits
    assert hits[0][0].surface == "crf"
    assert hits[0][1] == pytest.approx(1.0)


def test_retrieve_vs_brute_force():
    emb, corpus, vecs = _corpus()
    surfaces, vectors = list(vecs), list(vecs.values())
    for q in vecs:
        for k in (1, 2, 3):
            got = [(m.surface, s) for m, s in retrieve_mentions([q], corpus, emb, k)
                   .retrievals[0].hits]
            want = oracles.cosine_top_k(vecs[q], surfaces, vectors, k, 0.8)
            assert [g[0] for g in got] == [w[0] for w in want]
            assert [g[1] for g in got] == pytest.approx([w[1] for w in want], abs=1e-9)


def test_retrieve_threshold_filters():
    emb, corpus, _ = _corpus()
    emb2 = EmbeddingTable.from_mapping({**{s: emb.vector(s) for s in emb.surfaces},
                                        "q": [0.0, 0.0, 1.0]})
    assert retrieve_mentions(["q"], corpus, emb2, 5).mentions == []


def test_missing_concepts_reported():
    emb, corpus, _ = _corpus()
    t = retrieve_mentions(["crf", "unknown"], corpus, emb, 2)
    assert t.missing == ["unknown"]


def test_candidate_size_bound_and_determinism():
    rng = np.random.default_rng(5)
    surfaces = [f"s{i}" for i in range(60)]
    base = rng.normal(size=4)
    vecs = {s: base + 0.2 * rng.normal(size=4) for s in surfaces}
    emb = EmbeddingTable.from_mapping(vecs)
    corpus = [CorpusMention(s, ["a", "b", "c"][i % 3]) for i, s in enumerate(surfaces)]
    group = surfaces[:4]
    for prop in (False, True):
        t1 = retrieve_mentions(group, corpus, emb, 5, proportional=prop, seed=9)
        t2 = retrieve_mentions(group, corpus, emb, 5, proportional=prop, seed=9)
        assert len(t1.mentions) <= 5 * len(group)
        assert all(len(r.hits) <= 5 for r in t1.retrievals)
        assert [m for m, _, _ in t1.mentions] == [m for m, _, _ in t2.mentions]


def test_proportional_quota():
    # source a has 8 passing mentions and b has 2; k=5 should take 4 and 1
    vecs = {f"a{i}": [1.0, 0.01 * i] for i in range(8)}
    vecs.update({f"b{i}": [1.0, 0.02 * i] for i in range(2)})
    emb = EmbeddingTable.from_mapping({**vecs, "q": [1.0, 0.0]})
    corpus = [CorpusMention(s, s[0]) for s in vecs]
    index = MentionIndex(corpus, emb)
    hits = index.proportional(emb.vector("q"), 5, random.Random(0))
    sources = [m.source for m, _ in hits]
    assert sources.count("a") == 4 and sources.count("b") == 1
