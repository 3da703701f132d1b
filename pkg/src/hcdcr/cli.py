"""Command-line entry point: ``hcdcr <command> ...``.

Exit codes: 0 success, 1 internal error, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Iterable, Sequence

from . import agreement, candidates, inference, io, scico, stats
from ._parallel import ordered_map
from .baseline import DEFAULT_GRID, run_baseline
from .evaluation import MetricReport, TopicCounts, macro_report, micro_report, pair_topics, score_topic
from .model import Topic, ValidationError
from .tables import ScoreTable

log = logging.getLogger("hcdcr")


def _write_records(records: Iterable[dict], path: str | None) -> None:
    lines = "".join(io.dumps_record(r) + "\n" for r in records)
    if path is None or path == "-":
        sys.stdout.write(lines)
    else:
        Path(path).write_text(lines, encoding="utf-8")


def _fmt(x: float) -> str:
    return f"{100 * x:6.2f}"


def format_table(rows: list[tuple[str, MetricReport]]) -> str:
    head = (f"{'topic':<14} {'MUC':>6} {'B3':>6} {'CEAFe':>6} {'LEA':>6} {'CoNLL':>6} "
            f"{'Hier':>6} {'Hier50':>6} {'Path':>6} {'|W|':>8}")
    lines = [head, "-" * len(head)]
    for name, r in rows:
        lines.append(f"{name:<14} {_fmt(r.muc.f1)} {_fmt(r.b3.f1)} {_fmt(r.ceafe.f1)} "
                     f"{_fmt(r.lea.f1)} {_fmt(r.conll)} {_fmt(r.hierarchy.f1)} "
                     f"{_fmt(r.hierarchy_half.f1)} {_fmt(r.path_ratio)} {r.pairs_in_w:>8.0f}")
    return "\n".join(lines)


def _report_records(ids: list[str], counts: list[TopicCounts], macro: bool) -> list[dict]:
    records = [{"topic_id": tid, "scope": "topic", **MetricReport.from_counts(c).as_dict()}
               for tid, c in zip(ids, counts)]
    if counts:
        records.append({"topic_id": None, "scope": "micro", **micro_report(counts).as_dict()})
        if macro:
            records.append({"topic_id": None, "scope": "macro", **macro_report(counts).as_dict()})
    return records


# evaluate ------------------------------------------------------------------

def _score_pair(args):
    gold, sys_topic, singletons, closed = args
    return score_topic(gold, sys_topic, singletons, closed)


def cmd_evaluate(args) -> int:
    gold = io.load_corpus(args.gold)
    system = io.load_corpus(args.system)
    pairs = pair_topics(gold, system)
    jobs = [(g, s, args.keep_singletons, args.closed_paths) for g, s in pairs]
    counts = ordered_map(_score_pair, jobs, args.jobs)
    ids = [g.topic_id for g, _ in pairs]
    records = _report_records(ids, counts, args.macro)
    if args.output:
        _write_records(records, args.output)
    rows = [(tid, MetricReport.from_counts(c)) for tid, c in zip(ids, counts)]
    if counts:
        rows.append(("MICRO", micro_report(counts)))
        if args.macro:
            rows.append(("MACRO", macro_report(counts)))
    print(format_table(rows))
    return 0


# infer ---------------------------------------------------------------------

def _infer_one(args):
    topic, cfg, table = args
    return topic.with_graph(inference.run_pipeline(topic, cfg, table))


def cmd_infer(args) -> int:
    topics = io.load_corpus(args.input)
    source = inference.EDIT_DISTANCE if args.scores == "edit" else inference.SCORE_TABLE
    cfg = inference.ScorerConfig(source, args.cluster_threshold, args.hierarchy_threshold,
                                 args.single_parent, args.halt_on_cycle)
    tables: dict[str, ScoreTable] = {}
    if source == inference.SCORE_TABLE:
        tables = io.load_score_tables(args.scores)
        for t in topics:
            if t.topic_id not in tables:
                raise ValidationError("no score table for topic", t.topic_id)
    stripped = [t.with_graph(None) for t in topics]
    jobs = [(t, cfg, tables.get(t.topic_id)) for t in sorted(stripped, key=lambda t: t.topic_id)]
    out = ordered_map(_infer_one, jobs, args.jobs)
    io.write_corpus(out, args.output)
    log.info("wrote %d system topics to %s", len(out), args.output)
    return 0


# baseline ------------------------------------------------------------------

def cmd_baseline(args) -> int:
    dev = io.load_corpus(args.dev) if args.dev else []
    test = io.load_corpus(args.test)
    if args.threshold is None and not dev:
        raise ValidationError("either --dev (for tuning) or --threshold is required")
    grid = [float(x) for x in args.grid.split(",")] if args.grid else DEFAULT_GRID
    fractions = [float(x) for x in args.fractions.split(",")]
    result = run_baseline(dev, test, grid, fractions, args.threshold, args.jobs)
    if args.output:
        _write_records([result], args.output)
    print(f"clustering threshold {result['threshold']:.2f}")
    print(f"test CoNLL F1 {_fmt(result['test']['conll'])}")
    for name, s in result["slices"].items():
        print(f"{name:<12} topics {s['topics']:>4}  CoNLL F1 {_fmt(s['conll'])}")
    return 0


# agree ---------------------------------------------------------------------

def cmd_agree(args) -> int:
    files = sorted(Path(args.annotations).glob("*.jsonl"))
    if len(files) < 2:
        raise ValidationError(f"need at least two annotator files in {args.annotations}")
    by_topic: dict[str, list[tuple[str, Topic]]] = {}
    for f in files:
        for t in io.load_corpus(f):
            by_topic.setdefault(t.topic_id, []).append((f.stem, t))
    per_topic = {}
    for tid, anns in sorted(by_topic.items()):
        if len(anns) < 2:
            continue
        ref = anns[0][1]
        key_to_id = {m.key: m.mention_id for m in ref.mentions}
        graphs = []
        for name, t in anns:
            if t.gold is None:
                raise ValidationError(f"annotator {name!r} has no clusters", tid)
            if {m.key for m in t.mentions} != set(key_to_id):
                raise ValidationError(f"annotator {name!r} has a different mention set", tid)
            keyed = t.keyed(t.gold)
            graphs.append((name, keyed.relabel(key_to_id)))
        per_topic[tid] = agreement.pairwise_iaa(graphs, ref, args.metric)
    if not per_topic:
        raise ValidationError("no topic is shared by two annotators")
    summary = agreement.iaa_summary(per_topic, args.max_micro)
    record = {"metric": args.metric, "topics": len(per_topic), "avg": summary.avg,
              "max_micro": summary.max_micro, "max_macro": summary.max_macro,
              "pair_std": summary.pair_std, "max_micro_mode": args.max_micro}
    if args.output:
        _write_records([record], args.output)
    print(f"{args.metric} over {len(per_topic)} topics: AVG {_fmt(summary.avg)} "
          f"(±{100 * summary.pair_std:.1f})  MAX-micro {_fmt(summary.max_micro)}  "
          f"MAX-macro {_fmt(summary.max_macro)}")
    return 0


# slice ---------------------------------------------------------------------

def _load_topic_scores(path, field: str) -> dict[str, float]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [json.loads(line) for line in text.splitlines() if line.strip()]
    if isinstance(data, dict):
        if "per_topic_conll" in data:
            data = data["per_topic_conll"]
        return {str(k): float(v) for k, v in data.items()}
    out = {}
    for rec in data:
        if rec.get("topic_id") is None:
            continue
        value = rec[field]
        out[str(rec["topic_id"])] = float(value["f1"] if isinstance(value, dict) else value)
    return out


def cmd_slice(args) -> int:
    scores = _load_topic_scores(args.scores, args.field)
    fractions = [float(x) for x in args.fractions.split(",")]
    slices = agreement.diversity_slices(sorted(scores), scores, fractions)
    records = [{"fraction": f, "topics": ids} for f, ids in slices.items()]
    if args.topics:
        curated = agreement.flagged_topics(io.load_corpus(args.topics), args.flag)
        records.append({"flag": args.flag, "topics": sorted(curated)})
    _write_records(records, args.output)
    return 0


# prep ----------------------------------------------------------------------

def _read_graph(path, source: str) -> candidates.ConceptGraph:
    edges, nodes = [], []
    with open(path, encoding="utf-8") as f:
        for line in f:
            parts = [p for p in line.rstrip("\n").split("\t") if p.strip()]
            if len(parts) == 1:
                nodes.append(parts[0])
            elif len(parts) == 2:
                edges.append((parts[0], parts[1]))
            elif parts:
                raise ValidationError(f"{path}: expected 'parent<TAB>child', got {line!r}")
    return candidates.ConceptGraph.from_edges(edges, source, nodes)


def _read_lines_or_json(path) -> list:
    text = Path(path).read_text(encoding="utf-8")
    if Path(path).suffix == ".json":
        return json.loads(text)
    return [line.rstrip("\n") for line in text.splitlines() if line.strip()]


def _read_corpus(path) -> list[candidates.CorpusMention]:
    out = []
    for line in _read_lines_or_json(path):
        if isinstance(line, dict):
            out.append(candidates.CorpusMention(line["surface"], line.get("source", ""),
                                                line.get("context", "")))
        elif line.lstrip().startswith("{"):
            rec = json.loads(line)
            out.append(candidates.CorpusMention(rec["surface"], rec.get("source", ""),
                                                rec.get("context", "")))
        else:
            parts = line.split("\t") + ["", ""]
            out.append(candidates.CorpusMention(parts[0], parts[1], parts[2]))
    return out


def cmd_prep(args) -> int:
    graph = candidates.ConceptGraph({})
    if args.kb:
        graph = candidates.merge_graphs(graph, _read_graph(args.kb, candidates.KB))
    if args.hypernyms:
        graph = candidates.merge_graphs(graph, _read_graph(args.hypernyms, candidates.HYPERNYM))
    if args.stoplist:
        graph = candidates.remove_stoplisted(graph, _read_lines_or_json(args.stoplist))
    curated = []
    if args.curated:
        for g in _read_lines_or_json(args.curated):
            curated.append(g if isinstance(g, list) else [c for c in g.split("\t") if c.strip()])
    groups = candidates.form_groups(graph, curated)
    emb = io.load_embeddings(args.embeddings)
    index = candidates.MentionIndex(_read_corpus(args.corpus), emb)
    n_graph = len(groups) - len(curated)
    records = []
    for i, group in enumerate(groups):
        cand = candidates.retrieve_mentions(group, index, emb, args.k,
                                            proportional=args.proportional, seed=args.seed + i)
        records.append({
            "topic_id": f"cand-{i:05d}",
            "origin": "graph" if i < n_graph else candidates.CURATED,
            "group": cand.group,
            "missing": cand.missing,
            "mentions": [{"surface": m.surface, "source": m.source, "context": m.context,
                          "concept": concept, "similarity": round(sim, 6)}
                         for m, sim, concept in cand.mentions],
        })
    _write_records(records, args.output)
    log.info("wrote %d candidate topics", len(records))
    return 0


# stats / import ------------------------------------------------------------

def cmd_stats(args) -> int:
    topics = []
    for path in args.input:
        loaded = io.load_corpus(path)
        split = Path(path).stem
        topics.extend(t if (t.metadata or {}).get("split") else
                      Topic(t.topic_id, t.documents, t.mentions, t.gold,
                            {**(t.metadata or {}), "split": split})
                      for t in loaded)
    result = stats.dataset_stats(topics)
    if args.output:
        _write_records([result], args.output)
    print(f"{'split':<12} {'topics':>7} {'docs':>7} {'mentions':>9} {'clusters':>9} {'relations':>9}")
    for name, c in [*result["splits"].items(), ("total", result["total"])]:
        print(f"{name:<12} {c['topics']:>7} {c['documents']:>7} {c['mentions']:>9} "
              f"{c['clusters']:>9} {c['relations']:>9}")
    print(f"mean components per topic {result['mean_components']:.2f}")
    print(f"mean depth of largest component {result['mean_max_component_depth']:.2f}")
    return 0


def cmd_import(args) -> int:
    src = Path(args.release)
    kwargs = {"end_inclusive": not args.end_exclusive, "reduce": args.reduce_transitive}
    if src.is_dir():
        splits = scico.import_release(src, **kwargs)
    else:
        splits = {src.stem: scico.import_file(src, src.stem, **kwargs)}
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for split, topics in splits.items():
        io.write_corpus(topics, out / f"{split}.jsonl")
        print(f"{split}: {len(topics)} topics -> {out / f'{split}.jsonl'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hcdcr", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evaluate", help="score system topics against gold topics")
    e.add_argument("--gold", required=True)
    e.add_argument("--system", required=True)
    e.add_argument("--output", help="JSONL report path")
    e.add_argument("--macro", action="store_true", help="also report per-topic means")
    e.add_argument("--keep-singletons", action="store_true",
                   help="score coreference metrics with singleton clusters")
    e.add_argument("--closed-paths", action="store_true",
                   help="measure path distances on the transitive closure")
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=cmd_evaluate)

    i = sub.add_parser("infer", help="build system cluster graphs")
    i.add_argument("--input", required=True)
    i.add_argument("--scores", required=True, help="score table JSONL, or 'edit'")
    i.add_argument("--cluster-threshold", type=float, default=inference.DEFAULT_CLUSTER_THRESHOLD)
    i.add_argument("--hierarchy-threshold", type=float,
                   default=inference.DEFAULT_HIERARCHY_THRESHOLD)
    i.add_argument("--single-parent", action="store_true")
    i.add_argument("--halt-on-cycle", action="store_true")
    i.add_argument("--output", required=True)
    i.add_argument("--jobs", type=int, default=1)
    i.set_defaults(func=cmd_infer)

    b = sub.add_parser("baseline", help="edit-distance clustering baseline")
    b.add_argument("--dev", help="validation topics for threshold tuning")
    b.add_argument("--test", required=True)
    b.add_argument("--threshold", type=float, help="skip tuning and use this threshold")
    b.add_argument("--grid", help="comma-separated thresholds (default 0.50..0.95)")
    b.add_argument("--fractions", default="0.1,0.2")
    b.add_argument("--output")
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_baseline)

    a = sub.add_parser("agree", help="inter-annotator agreement")
    a.add_argument("--annotations", required=True, help="directory of <annotator>.jsonl files")
    a.add_argument("--metric", default="conll", choices=sorted(agreement.IAA_METRICS))
    a.add_argument("--max-micro", default=agreement.PER_TOPIC,
                   choices=[agreement.PER_TOPIC, agreement.GLOBAL_PAIR])
    a.add_argument("--output")
    a.set_defaults(func=cmd_agree)

    s = sub.add_parser("slice", help="bottom-k%% topics by a per-topic score")
    s.add_argument("--scores", required=True)
    s.add_argument("--field", default="conll")
    s.add_argument("--fractions", default="0.1,0.2")
    s.add_argument("--topics", help="topics file to select flagged topics from")
    s.add_argument("--flag", default="curated")
    s.add_argument("--output")
    s.set_defaults(func=cmd_slice)

    r = sub.add_parser("prep", help="generate candidate topics")
    r.add_argument("--kb")
    r.add_argument("--hypernyms")
    r.add_argument("--curated")
    r.add_argument("--stoplist")
    r.add_argument("--corpus", required=True)
    r.add_argument("--embeddings", required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--proportional", action="store_true",
                   help="sample every corpus source at the same rate")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--output")
    r.set_defaults(func=cmd_prep)

    t = sub.add_parser("stats", help="dataset statistics")
    t.add_argument("input", nargs="+")
    t.add_argument("--output")
    t.set_defaults(func=cmd_stats)

    m = sub.add_parser("import-scico", help="convert the public SCICO release")
    m.add_argument("release", help="release directory or a single split file")
    m.add_argument("--output-dir", required=True)
    m.add_argument("--end-exclusive", action="store_true",
                   help="mention ends in the release are exclusive")
    m.add_argument("--reduce-transitive", action="store_true",
                   help="drop relations implied by longer paths")
    m.set_defaults(func=cmd_import)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
