import json
import random

import pytest

from hcdcr.cli import main
from hcdcr.io import load_corpus, write_corpus, write_embeddings, write_score_tables
from hcdcr.model import ClusterGraph
from hcdcr.tables import EmbeddingTable

from helpers import make_topic, random_graph, synthetic_table


def corpus(n_topics=4, seed=0, **meta):
    rng = random.Random(seed)
    out = []
    for i in range(n_topics):
        n = rng.randint(2, 9)
        gold = random_graph(rng, [f"m{j}" for j in range(n)], 4, 0.4)
        out.append(make_topic(n, f"t{i}", gold=gold, metadata=dict(meta) or None))
    return out


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


@pytest.fixture
def gold_file(tmp_path):
    p = tmp_path / "gold.jsonl"
    write_corpus(corpus(), p)
    return p


def test_evaluate_gold_vs_itself(gold_file, tmp_path, capsys):
    out = tmp_path / "report.jsonl"
    assert main(["evaluate", "--gold", str(gold_file), "--system", str(gold_file),
                 "--output", str(out), "--macro"]) == 0
    recs = read_jsonl(out)
    assert [r["scope"] for r in recs] == ["topic"] * 4 + ["micro", "macro"]
    for r in recs:
        assert r["conll"] == 1.0 and r["path_ratio"] == 1.0
        assert r["hierarchy"]["any_pair"]["f1"] == 1.0
        assert r["hierarchy"]["half"]["f1"] == 1.0
        for m in ("muc", "b3", "ceafe", "lea"):
            assert r[m]["f1"] == 1.0
    assert "MICRO" in capsys.readouterr().out


def test_evaluate_report_is_byte_stable(gold_file, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for p, jobs in ((a, "1"), (b, "2")):
        main(["evaluate", "--gold", str(gold_file), "--system", str(gold_file),
              "--output", str(p), "--jobs", jobs])
    assert a.read_bytes() == b.read_bytes()


def test_evaluate_missing_topic(gold_file, tmp_path, capsys):
    sys_file = tmp_path / "sys.jsonl"
    write_corpus(corpus()[:3], sys_file)
    assert main(["evaluate", "--gold", str(gold_file), "--system", str(sys_file)]) == 2
    assert "'t3'" in capsys.readouterr().err


def test_evaluate_missing_file(tmp_path):
    assert main(["evaluate", "--gold", str(tmp_path / "no"), "--system", str(tmp_path / "no")]) == 2


def test_infer_then_evaluate_round_trip(tmp_path):
    topics = corpus(6, seed=3)
    write_corpus(topics, tmp_path / "gold.jsonl")
    write_score_tables([synthetic_table(t, t.gold) for t in topics], tmp_path / "scores.jsonl")
    assert main(["infer", "--input", str(tmp_path / "gold.jsonl"), "--scores",
                 str(tmp_path / "scores.jsonl"), "--output", str(tmp_path / "sys.jsonl")]) == 0
    for g, s in zip(topics, load_corpus(tmp_path / "sys.jsonl")):
        assert s.gold.canonical() == g.gold.canonical()
    assert main(["evaluate", "--gold", str(tmp_path / "gold.jsonl"), "--system",
                 str(tmp_path / "sys.jsonl"), "--output", str(tmp_path / "r.jsonl")]) == 0
    micro = read_jsonl(tmp_path / "r.jsonl")[-1]
    assert micro["conll"] == 1.0 and micro["hierarchy"]["any_pair"]["f1"] == 1.0


def test_infer_missing_table(gold_file, tmp_path):
    (tmp_path / "s.jsonl").write_text("")
    assert main(["infer", "--input", str(gold_file), "--scores", str(tmp_path / "s.jsonl"),
                 "--output", str(tmp_path / "o.jsonl")]) == 2


def test_baseline_and_slice(tmp_path):
    surf = [["crf", "crfs", "lstm", "lstms"], ["svm", "svms", "tree", "trees", "forest"]]
    topics = []
    for i, s in enumerate(surf * 3):
        gold = ClusterGraph(tuple((f"m{j}", f"m{j + 1}") for j in range(0, len(s) - 1, 2))
                            + (((f"m{len(s) - 1}",),) if len(s) % 2 else ()))
        topics.append(make_topic(len(s), f"t{i}", surfaces=s, gold=gold,
                                 metadata={"curated": i == 0}))
    write_corpus(topics, tmp_path / "test.jsonl")
    out = tmp_path / "b.jsonl"
    assert main(["baseline", "--dev", str(tmp_path / "test.jsonl"), "--test",
                 str(tmp_path / "test.jsonl"), "--output", str(out), "--fractions", "0.5"]) == 0
    rec = read_jsonl(out)[0]
    assert rec["test"]["conll"] == 1.0
    assert rec["threshold"] == 0.5
    assert rec["slices"]["bottom_0.5"]["topics"] == 3
    assert rec["slices"]["curated"]["topics"] == 1

    sl = tmp_path / "slice.jsonl"
    assert main(["slice", "--scores", str(out), "--fractions", "0.5", "--topics",
                 str(tmp_path / "test.jsonl"), "--output", str(sl)]) == 0
    recs = read_jsonl(sl)
    assert recs[0] == {"fraction": 0.5, "topics": ["t0", "t1", "t2"]}
    assert recs[1] == {"flag": "curated", "topics": ["t0"]}


def test_baseline_needs_dev_or_threshold(gold_file):
    assert main(["baseline", "--test", str(gold_file)]) == 2


def test_stats(tmp_path, capsys):
    g = ClusterGraph((("m0",), ("m1",), ("m2",), ("m3",)), ((0, 1), (1, 2)))
    write_corpus([make_topic(4, "a", gold=g)], tmp_path / "train.jsonl")
    out = tmp_path / "s.jsonl"
    assert main(["stats", str(tmp_path / "train.jsonl"), "--output", str(out)]) == 0
    rec = read_jsonl(out)[0]
    assert rec["splits"]["train"]["relations"] == 2
    assert rec["mean_components"] == 2 and rec["mean_max_component_depth"] == 3


def test_agree(tmp_path, capsys):
    d = tmp_path / "ann"
    d.mkdir()
    base = corpus(3, seed=5)
    write_corpus(base, d / "alice.jsonl")
    write_corpus(base, d / "bob.jsonl")
    out = tmp_path / "a.jsonl"
    assert main(["agree", "--annotations", str(d), "--metric", "path", "--output", str(out)]) == 0
    rec = read_jsonl(out)[0]
    assert rec["avg"] == rec["max_micro"] == rec["max_macro"] == 1.0
    assert rec["topics"] == 3


def test_prep(tmp_path):
    (tmp_path / "kb.tsv").write_text("sequence labeling\tCRF\nsequence labeling\tHMM\n")
    (tmp_path / "hyp.tsv").write_text("Sequence Labelling\tcrfs\n")
    (tmp_path / "curated.tsv").write_text("transformer\tattention\n")
    (tmp_path / "corpus.tsv").write_text("CRF\tpwc\nconditional random field\ts2orc\nHMM\tpwc\n")
    emb = EmbeddingTable.from_mapping({
        "sequence labeling": [1, 1, 0], "CRF": [1, 0, 0], "crfs": [1, 0, 0], "HMM": [0.9, 0.1, 0],
        "conditional random field": [0.95, 0.05, 0], "transformer": [0, 0, 1]})
    write_embeddings(emb, tmp_path / "emb.bin")
    out = tmp_path / "cand.jsonl"
    args = ["prep", "--kb", str(tmp_path / "kb.tsv"), "--hypernyms", str(tmp_path / "hyp.tsv"),
            "--curated", str(tmp_path / "curated.tsv"), "--corpus", str(tmp_path / "corpus.tsv"),
            "--embeddings", str(tmp_path / "emb.bin"), "--k", "2", "--output", str(out)]
    assert main(args) == 0
    recs = read_jsonl(out)
    assert [r["origin"] for r in recs] == ["graph", "curated"]
    assert recs[0]["group"] == ["Sequence Labelling", "CRF", "HMM"]
    assert recs[1]["missing"] == ["attention"]
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first


def test_import_scico(tmp_path):
    rec = {"id": 1, "tokens": [["a", "b", "c"]], "mentions": [[0, 0, 0, 1], [0, 2, 2, 2]],
           "relations": [[1, 2]]}
    (tmp_path / "test.jsonl").write_text(json.dumps(rec) + "\n")
    assert main(["import-scico", str(tmp_path / "test.jsonl"), "--output-dir",
                 str(tmp_path / "out")]) == 0
    (t,) = load_corpus(tmp_path / "out" / "test.jsonl")
    assert t.gold.edges == ((0, 1),) and t.metadata == {"split": "test"}
