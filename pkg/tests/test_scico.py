import json

import pytest

from hcdcr.model import ValidationError
from hcdcr.scico import convert_topic, import_file, import_release


def scico_record(**over):
    rec = {
        "id": 7,
        "tokens": [["We", "use", "a", "CRF", "tagger", "."], ["Sequence", "labeling", "models"]],
        "doc_ids": [111, 222],
        "metadata": [{"title": "A"}, {"title": "B"}],
        "mentions": [[0, 3, 4, 5], [1, 0, 1, 9], [0, 3, 3, 2]],
        "relations": [[9, 5], [5, 2], [9, 2]],
        "source": "pwc",
        "hard_10": True,
        "hard_20": True,
        "curated": False,
    }
    rec.update(over)
    return rec


def test_convert_inclusive_spans_and_clusters():
    t = convert_topic(scico_record(), "test", reduce=True)
    assert t.topic_id == "7"
    assert [m.surface for m in t.mentions] == ["CRF tagger", "Sequence labeling", "CRF"]
    # clusters ordered by release cluster id: 2, 5, 9
    assert t.gold.clusters == (("2",), ("0",), ("1",))
    # 9 -> 2 is implied by 9 -> 5 -> 2
    assert set(t.gold.edges) == {(2, 1), (1, 0)}
    assert t.metadata == {"hard_10": True, "hard_20": True, "curated": False, "source": "pwc",
                          "split": "test"}
    assert t.documents[1].metadata == {"title": "B", "paper_id": 222}


def test_relations_kept_by_default_and_exclusive_ends():
    rec = scico_record(mentions=[[0, 3, 5, 5], [1, 0, 2, 9], [0, 3, 4, 2]])
    t = convert_topic(rec, end_inclusive=False)
    assert len(t.gold.edges) == 3
    assert [m.surface for m in t.mentions] == ["CRF tagger", "Sequence labeling", "CRF"]


def test_unknown_relation_cluster():
    with pytest.raises(ValidationError, match="unknown cluster"):
        convert_topic(scico_record(relations=[[1, 5]]))


def test_import_release(tmp_path):
    for name in ("train.jsonl", "dev.jsonl", "test.jsonl"):
        (tmp_path / name).write_text(json.dumps(scico_record()) + "\n")
    splits = import_release(tmp_path)
    assert set(splits) == {"train", "validation", "test"}
    assert splits["validation"][0].metadata["split"] == "validation"


def test_import_errors_carry_line(tmp_path):
    p = tmp_path / "test.jsonl"
    p.write_text(json.dumps(scico_record()) + "\n" + json.dumps(scico_record(mentions=[[0, 5, 9, 1]])) + "\n")
    with pytest.raises(ValidationError, match=":2:"):
        import_file(p)


def test_empty_release_dir(tmp_path):
    with pytest.raises(FileNotFoundError):
        import_release(tmp_path)
