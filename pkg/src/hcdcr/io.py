"""Reading and writing topics, score tables and embedding tables.

Topics are stored one JSON record per line::

    {"topic_id": ..., "documents": [{"doc_id", "tokens", "metadata"?}],
     "mentions": [{"mention_id", "doc_id", "start", "end"}],
     "clusters": [[mention_id, ...], ...], "relations": [[parent, child], ...],
     "metadata": {...}?}

``clusters``/``relations`` are absent for topics without a graph.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np

from .model import ClusterGraph, Document, Mention, Topic, ValidationError
from .tables import EmbeddingTable, ScoreTable


class ParseError(ValidationError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


def _require(record: dict, key: str, kind, where: str):
    if key not in record:
        raise ValidationError(f"{where} is missing field {key!r}")
    value = record[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ValidationError(f"{where} field {key!r} has type {type(value).__name__}")
    return value


def topic_from_record(record: dict) -> Topic:
    if not isinstance(record, dict):
        raise ValidationError("topic record is not an object")
    tid = _require(record, "topic_id", str, "topic")
    try:
        docs = []
        for i, d in enumerate(_require(record, "documents", list, "topic")):
            where = f"documents[{i}]"
            tokens = _require(d, "tokens", list, where)
            meta = d.get("metadata")
            if meta is not None and not isinstance(meta, dict):
                raise ValidationError(f"{where} metadata is not an object")
            docs.append(Document(_require(d, "doc_id", str, where), tuple(tokens), meta))
        mentions = []
        for i, m in enumerate(_require(record, "mentions", list, "topic")):
            where = f"mentions[{i}]"
            mentions.append(Mention(_require(m, "mention_id", str, where),
                                    _require(m, "doc_id", str, where),
                                    _require(m, "start", int, where),
                                    _require(m, "end", int, where)))
        gold = None
        if "clusters" in record or "relations" in record:
            clusters = _require(record, "clusters", list, "topic")
            relations = record.get("relations", [])
            for r in relations:
                if not (isinstance(r, list) and len(r) == 2
                        and all(isinstance(x, int) for x in r)):
                    raise ValidationError(f"malformed relation {r!r}")
            gold = ClusterGraph(tuple(tuple(c) for c in clusters),
                                tuple(tuple(r) for r in relations))
        meta = record.get("metadata")
        return Topic(tid, tuple(docs), tuple(mentions), gold, meta)
    except ValidationError as exc:
        if exc.topic_id is not None:
            raise
        raise ValidationError(str(exc), tid) from exc


def topic_to_record(topic: Topic) -> dict:
    docs = []
    for d in topic.documents:
        rec = {"doc_id": d.doc_id, "tokens": list(d.tokens)}
        if d.metadata is not None:
            rec["metadata"] = dict(d.metadata)
        docs.append(rec)
    record: dict[str, Any] = {
        "topic_id": topic.topic_id,
        "documents": docs,
        "mentions": [{"mention_id": m.mention_id, "doc_id": m.doc_id,
                      "start": m.start, "end": m.end} for m in topic.mentions],
    }
    if topic.gold is not None:
        record["clusters"] = [list(c) for c in topic.gold.clusters]
        record["relations"] = [list(e) for e in topic.gold.edges]
    if topic.metadata is not None:
        record["metadata"] = dict(topic.metadata)
    return record


def _read_jsonl(path) -> Iterator[tuple[int, Any]]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"malformed JSON ({exc.msg})") from None


def load_corpus(path, format: str = "canonical-jsonl") -> list[Topic]:
    if format != "canonical-jsonl":
        raise ValueError(f"unsupported topic format {format!r}")
    topics, seen = [], set()
    for lineno, record in _read_jsonl(path):
        try:
            topic = topic_from_record(record)
        except ValidationError as exc:
            raise ParseError(path, lineno, str(exc)) from exc
        if topic.topic_id in seen:
            raise ParseError(path, lineno, f"duplicate topic_id {topic.topic_id!r}")
        seen.add(topic.topic_id)
        topics.append(topic)
    return topics


def dumps_record(record: Any) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def write_corpus(topics: Iterable[Topic], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in topics:
            f.write(dumps_record(topic_to_record(t)) + "\n")


def score_table_from_record(record: dict) -> ScoreTable:
    tid = _require(record, "topic_id", str, "score table")
    kind = _require(record, "kind", str, "score table")
    pairs = []
    for i, p in enumerate(_require(record, "pairs", list, "score table")):
        where = f"score table {tid!r} pairs[{i}]"
        scores = _require(p, "scores", list, where)
        pairs.append((_require(p, "m1", str, where), _require(p, "m2", str, where), scores))
    return ScoreTable.from_pairs(tid, kind, pairs)


def score_table_to_record(table: ScoreTable) -> dict:
    return {"topic_id": table.topic_id, "kind": table.kind,
            "pairs": [{"m1": a, "m2": b, "scores": list(v)}
                      for (a, b), v in sorted(table.entries.items())]}


def load_score_tables(path) -> dict[str, ScoreTable]:
    tables = {}
    for lineno, record in _read_jsonl(path):
        try:
            table = score_table_from_record(record)
        except ValidationError as exc:
            raise ParseError(path, lineno, str(exc)) from exc
        if table.topic_id in tables:
            raise ParseError(path, lineno, f"duplicate score table for {table.topic_id!r}")
        tables[table.topic_id] = table
    return tables


def write_score_tables(tables: Iterable[ScoreTable], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in tables:
            f.write(dumps_record(score_table_to_record(t)) + "\n")


# Binary embeddings: little-endian uint32 dim, uint32 count, then `count`
# strings as (uint32 byte length, utf-8 bytes), then a count x dim float32
# matrix in row-major order.
_HEADER = struct.Struct("<II")
_LEN = struct.Struct("<I")


def load_embeddings(path) -> EmbeddingTable:
    path = Path(path)
    if path.suffix in (".json", ".jsonl"):
        with open(path, encoding="utf-8") as f:
            record = json.load(f)
        dim = _require(record, "dim", int, "embedding table")
        entries = {}
        for e in _require(record, "entries", list, "embedding table"):
            if e["surface"] in entries:
                raise ValidationError(f"duplicate surface {e['surface']!r} in embeddings")
            entries[e["surface"]] = e["vector"]
        return EmbeddingTable.from_mapping(entries, dim)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise ValidationError(f"{path}: truncated embedding header")
    dim, count = _HEADER.unpack_from(data, 0)
    offset = _HEADER.size
    surfaces = []
    for _ in range(count):
        (n,) = _LEN.unpack_from(data, offset)
        offset += _LEN.size
        surfaces.append(data[offset:offset + n].decode("utf-8"))
        offset += n
    matrix = np.frombuffer(data, dtype="<f4", count=count * dim, offset=offset)
    return EmbeddingTable(tuple(surfaces), matrix.reshape(count, dim))


def write_embeddings(table: EmbeddingTable, path, binary: bool | None = None) -> None:
    path = Path(path)
    if binary is None:
        binary = path.suffix not in (".json", ".jsonl")
    if not binary:
        record = {"dim": table.dim,
                  "entries": [{"surface": s, "vector": table.vector(s).tolist()}
                              for s in table.surfaces]}
        path.write_text(json.dumps(record), encoding="utf-8")
        return
    parts = [_HEADER.pack(table.dim, len(table))]
    for s in table.surfaces:
        raw = s.encode("utf-8")
        parts.append(_LEN.pack(len(raw)))
        parts.append(raw)
    parts.append(np.ascontiguousarray(table.vectors, dtype="<f4").tobytes())
    path.write_bytes(b"".join(parts))
