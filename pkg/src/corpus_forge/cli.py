"""Batch command line: ``corpus-forge <command> [options]``.

Exit status is 0 on success, 1 on a usage or configuration error and 2 when
more malformed input records were seen than ``--max-record-errors`` allows.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Iterable

from . import corpus, languages, lid, metrics, pretrain, sampling, scripts, vocab
from .config import PipelineConfig
from .corpus import CleanDocument, CorpusError, RecordError
from .filters import Blacklist, CleanConfig, ConfigError, DEFAULT_STAGES, dedup, run_pipeline

logger = logging.getLogger("corpus_forge")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _dump(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def _write_json(path: Path | None, obj: Any) -> None:
    if path is None:
        sys.stdout.write(_dump(obj))
    else:
        path.write_text(_dump(obj), encoding="utf-8")


class Run:
    """State shared by a single command invocation: settings, counters, record errors."""

    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        self.cfg = PipelineConfig.load(args.command, args.config)
        self.errors: list[RecordError] = []
        self.counters: dict[str, Any] = {}
        self.parameters: dict[str, Any] = {}
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self.seed = int(self.cfg.resolve("seed", args.seed, 0))
        self.workers = int(self.cfg.resolve("workers", args.workers, 1))
        self.budget = int(self.cfg.resolve("max_record_errors", args.max_record_errors, 0))

    def get(self, key: str, flag: Any = None, default: Any = None) -> Any:
        value = self.cfg.resolve(key, flag, default)
        self.parameters[key] = value
        return value

    def input_path(self, key: str = "input", flag: Any = None) -> Path:
        p = self.cfg.path_value(key, flag if flag is not None else getattr(self.args, key, None))
        if p is None:
            raise ConfigError(f"missing required setting {key!r}")
        self.inputs.append(str(p))
        return p

    def output_path(self, key: str = "output", required: bool = False) -> Path | None:
        p = self.cfg.path_value(key, getattr(self.args, key, None), must_exist=False)
        if p is None and required:
            raise ConfigError(f"missing required setting {key!r}")
        if p is not None:
            self.outputs.append(str(p))
        return p

    def report(self, started: float) -> dict:
        return {
            "command": self.args.command,
            "config": str(self.cfg.path) if self.cfg.path else None,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "parameters": {k: (str(v) if isinstance(v, Path) else v) for k, v in self.parameters.items()},
            "seed": self.seed,
            "counters": self.counters,
            "record_errors": [{"line": e.line, "message": e.message} for e in self.errors[:100]],
            "record_error_count": len(self.errors),
            "wall_time_s": round(time.perf_counter() - started, 3),
        }


def _read_clean(run: Run, path: Path, default_lang: str | None = None) -> Iterable[CleanDocument]:
    for raw in corpus.read_corpus(path, "jsonl", run.errors):
        lang = raw.lang_hint or default_lang
        if not lang:
            run.errors.append(RecordError(0, f"document {raw.id!r} has no language"))
            continue
        yield corpus.to_clean(raw, lang)


def _lines(paths: Iterable[Path]) -> Iterable[str]:
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield line.rstrip("\n")


def _strip_lang_token(line: str) -> str:
    head, _, rest = line.partition(" ")
    return rest if head in vocab.LANG_TOKENS else line


# -- commands -----------------------------------------------------------------


def cmd_clean(run: Run) -> None:
    a = run.args
    src = run.input_path()
    out = run.output_path(required=True)
    fmt = run.get("format", a.format, "jsonl")
    stages = run.get("stages", a.stages.split(",") if a.stages else None, list(DEFAULT_STAGES))
    stages = [s.strip() for s in stages if s.strip()]
    model = None
    if "lid" in stages or run.cfg.resolve("lid_model", a.lid_model) is not None:
        mp = run.cfg.path_value("lid_model", a.lid_model)
        if mp is not None:
            model = lid.LidModel.load(mp)
            run.inputs.append(str(mp))
    blacklist_specs = dict(run.cfg.values.get("blacklists") or {})
    for entry in a.blacklist or []:
        lang, sep, path = entry.partition("=")
        if not sep:
            raise ConfigError(f"--blacklist expects LANG=PATH, got {entry!r}")
        blacklist_specs[lang] = path
    blacklists = {}
    for lang, path in blacklist_specs.items():
        p = Path(path) if a.blacklist and any(s.startswith(lang + "=") for s in a.blacklist) else run.cfg.relative(path)
        if not p.exists():
            raise ConfigError(f"blacklist for {lang}: {p} does not exist")
        if not languages.is_known(lang):
            raise ConfigError(f"blacklist for unknown language {lang!r}")
        blacklists[lang] = Blacklist.load(lang, p)
        run.inputs.append(str(p))
    config = CleanConfig(
        stages=tuple(stages),
        threshold=float(run.get("threshold", a.threshold, 0.75)),
        min_words=int(run.get("min_words", a.min_words, 10)),
        lid_model=model,
        blacklists=blacklists,
        offensive_drop_document=bool(run.get("offensive_drop_document", a.offensive_drop_document or None, False)),
    )
    config.validate()
    default_lang = run.get("lang", a.lang)

    def docs():
        for raw in corpus.read_corpus(src, fmt, run.errors):
            lang = raw.lang_hint or default_lang
            if not lang and model is not None:
                pred = model.predict(raw.text)
                lang = None if pred.is_unknown else pred.lang
            if not lang or not languages.is_known(lang):
                run.errors.append(RecordError(0, f"document {raw.id!r}: unresolved language {lang!r}"))
                continue
            yield corpus.to_clean(raw, lang)

    stream, report = run_pipeline(docs(), config, workers=run.workers)
    run.counters["documents_written"] = corpus.write_clean_corpus(stream, out)
    run.counters["filter"] = report.to_json(config.stages)


def cmd_stats(run: Run) -> None:
    src = run.input_path()
    out = run.output_path()
    stats = corpus.compute_stats(_read_clean(run, src, run.get("lang", run.args.lang)))
    run.counters["documents"] = stats.documents
    _write_json(out, stats.to_json())


def cmd_queries(run: Run) -> None:
    a = run.args
    src = run.input_path()
    out = run.output_path()
    lang = run.get("lang", a.lang)
    if not lang:
        raise ConfigError("--lang is required")
    k = int(run.get("k", a.k, 100))
    result = corpus.generate_search_queries(_read_clean(run, src, lang), lang, k)
    run.counters.update(queries=len(result.words), short=result.short)
    text = "".join(w + "\n" for w in result.words)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _labeled(run: Run, path: Path) -> Iterable[tuple[str, str]]:
    for raw in corpus.read_corpus(path, "jsonl", run.errors):
        if not raw.lang_hint:
            run.errors.append(RecordError(0, f"sample {raw.id!r} has no lang"))
            continue
        yield raw.lang_hint, raw.text


def cmd_lid_train(run: Run) -> None:
    a = run.args
    src = run.input_path()
    out = run.output_path(required=True)
    model = lid.train_lid(
        _labeled(run, src),
        n=int(run.get("order", a.order, 3)),
        smoothing=float(run.get("smoothing", a.smoothing, 0.5)),
        min_letters=int(run.get("min_letters", a.min_letters, 20)),
        min_margin=float(run.get("min_margin", a.min_margin, 0.0)),
    )
    model.save(out)
    run.counters["languages"] = sorted(model.supported)


def cmd_lid_eval(run: Run) -> None:
    mp = run.input_path("model")
    src = run.input_path()
    out = run.output_path()
    report = lid.evaluate_lid(lid.LidModel.load(mp), _labeled(run, src))
    run.counters["languages"] = len(report.accuracy)
    _write_json(out, report.to_json())


def cmd_lid_filter(run: Run) -> None:
    mp = run.input_path("model")
    src = run.input_path()
    out = run.output_path(required=True)
    model = lid.LidModel.load(mp)
    kept = dropped = 0

    def docs():
        nonlocal kept, dropped
        for doc in _read_clean(run, src):
            filtered = lid.filter_paragraphs(model, doc)
            if filtered.paragraphs:
                kept += 1
                yield filtered
            else:
                dropped += 1

    corpus.write_clean_corpus(docs(), out)
    run.counters.update(documents_written=kept, documents_emptied=dropped)


def cmd_dedup(run: Run) -> None:
    src = run.input_path()
    out = run.output_path(required=True)
    n_in = 0

    def counted():
        nonlocal n_in
        for d in _read_clean(run, src):
            n_in += 1
            yield d

    n_out = corpus.write_clean_corpus(dedup(counted()), out)
    run.counters.update(documents_in=n_in, documents_written=n_out, documents_removed=n_in - n_out)


def _token_counts(run: Run, path: Path) -> dict[str, int]:
    stats = corpus.compute_stats(_read_clean(run, path))
    return {lang: s.tokens for lang, s in stats.per_language.items()}


def cmd_plan(run: Run) -> None:
    a = run.args
    alpha = float(run.get("alpha", a.alpha, 0.3))
    if a.counts:
        counts_path = run.input_path("counts", a.counts)
        counts = json.loads(counts_path.read_text(encoding="utf-8"))
    else:
        counts = _token_counts(run, run.input_path())
    out = run.output_path()
    try:
        plan = sampling.temperature_plan(counts, alpha)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    run.counters["languages"] = len(plan.shares)
    _write_json(out, plan.to_json())


def cmd_sample(run: Run) -> None:
    a = run.args
    src = run.input_path()
    out = run.output_path(required=True)
    docs_by_lang: dict[str, list[CleanDocument]] = {}
    for doc in _read_clean(run, src):
        docs_by_lang.setdefault(doc.lang, []).append(doc)
    plan_path = run.cfg.path_value("plan", a.plan)
    if plan_path is not None:
        run.inputs.append(str(plan_path))
        plan = sampling.SamplingPlan.from_json(json.loads(plan_path.read_text(encoding="utf-8")))
    else:
        counts = {lang: sum(corpus.count_tokens(p) for d in ds for p in d.paragraphs) for lang, ds in docs_by_lang.items()}
        plan = sampling.temperature_plan(counts, float(run.get("alpha", a.alpha, 0.3)))
    target = run.get("target_tokens", a.target_tokens)
    if target is None:
        raise ConfigError("--target-tokens is required")
    lang_token = not run.get("no_lang_token", a.no_lang_token or None, False)
    result = sampling.materialize(
        docs_by_lang,
        plan,
        seed=run.seed,
        target_tokens=int(target),
        out_dir=out,
        docs_per_shard=int(run.get("docs_per_shard", a.docs_per_shard, 100_000)),
        lang_token=lang_token,
    )
    run.counters.update(result)


def cmd_to_deva(run: Run) -> None:
    a = run.args
    src = run.input_path()
    out = run.output_path()
    script = run.get("script", a.script)
    lang = run.get("lang", a.lang)
    if script is None:
        if lang is None:
            raise ConfigError("give --script or --lang")
        script = languages.script_of(lang)
    try:
        converted, passed = scripts.convert_to_devanagari(src.read_text(encoding="utf-8"), script)
    except scripts.UnsupportedScriptError as exc:
        raise ConfigError(str(exc)) from exc
    run.counters["passed_through"] = {f"U+{ord(ch):04X}": n for ch, n in sorted(passed.items())}
    if out is None:
        sys.stdout.write(converted)
    else:
        out.write_text(converted, encoding="utf-8")


def cmd_vocab_train(run: Run) -> None:
    a = run.args
    paths = [run.input_path("input", p) for p in a.input] if a.input else [run.input_path()]
    out = run.output_path(required=True)
    fraction = float(run.get("fraction", a.fraction, 1.0))
    lines = (_strip_lang_token(l) for l in _lines(paths))
    try:
        model = vocab.train_wordpiece(
            vocab.sample_training_text(lines, fraction, run.seed),
            vocab_size=int(run.get("vocab_size", a.vocab_size, 8000)),
            min_pair_freq=int(run.get("min_pair_freq", a.min_pair_freq, 2)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    model.save(out)
    run.counters.update(pieces=len(model), base_alphabet=model.n_base)


def cmd_tokenize(run: Run) -> None:
    model = vocab.VocabModel.load(run.input_path("vocab"))
    src = run.input_path()
    out = run.output_path()
    n = 0
    chunks = []
    for line in _lines([src]):
        chunks.append(" ".join(model.tokenize(line)) + "\n")
        n += 1
    text = "".join(chunks)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
    run.counters["lines"] = n


def cmd_fertility(run: Run) -> None:
    model = vocab.VocabModel.load(run.input_path("vocab"))
    src = run.input_path()
    out = run.output_path()
    by_lang: dict[str, list[str]] = {}
    for doc in _read_clean(run, src, run.get("lang", run.args.lang)):
        by_lang.setdefault(doc.lang, []).extend(doc.paragraphs)
    report = vocab.fertility(model, by_lang)
    run.counters["languages"] = len(report.words)
    _write_json(out, report.to_json())


def cmd_mlm_build(run: Run) -> None:
    a = run.args
    model = vocab.VocabModel.load(run.input_path("vocab"))
    paths = [run.input_path("input", p) for p in a.input] if a.input else [run.input_path()]
    out = run.output_path(required=True)
    max_len = int(run.get("max_len", a.max_len, 512))
    mask_prob = float(run.get("mask_prob", a.mask_prob, 0.15))
    cls_id = None if run.get("no_cls", a.no_cls or None, False) else model.id_of(vocab.CLS)
    pack = not run.get("no_pack", a.no_pack or None, False)
    docs = (model.encode(line) for line in _lines(paths))
    seqs = pretrain.pack_sequences(docs, max_len, cls_id=cls_id, pack=pack)
    examples = (pretrain.build_mlm(s, model, mask_prob, seed=[run.seed, i]) for i, s in enumerate(seqs))
    n = pretrain.write_examples(examples, out)
    run.counters["examples"] = n


def cmd_tlm_build(run: Run) -> None:
    a = run.args
    model = vocab.VocabModel.load(run.input_path("vocab"))
    src = run.input_path()
    out = run.output_path(required=True)
    max_len = int(run.get("max_len", a.max_len, 512))
    mask_prob = float(run.get("mask_prob", a.mask_prob, 0.15))
    add_cls = not run.get("no_cls", a.no_cls or None, False)

    def examples():
        with open(src, encoding="utf-8") as fh:
            for i, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    pair = pretrain.ParallelPair(str(obj.get("id", i)), obj["src"], obj["tgt"])
                    yield pretrain.build_tlm(pair, model, max_len, mask_prob, seed=[run.seed, i], add_cls=add_cls)
                except (ValueError, KeyError, TypeError) as exc:
                    run.errors.append(RecordError(i, str(exc)))

    run.counters["examples"] = pretrain.write_examples(examples(), out)


def _prediction_records(run: Run, path: Path) -> list[dict]:
    records = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if "gold" not in obj or "pred" not in obj:
                    raise ValueError("record needs 'gold' and 'pred'")
            except ValueError as exc:
                run.errors.append(RecordError(i, str(exc)))
                continue
            rid = obj.get("id", i)
            if rid in seen:
                run.errors.append(RecordError(i, f"duplicate id {rid!r}"))
                continue
            seen.add(rid)
            records.append(obj)
    return records


_METRIC_ALIASES = {"accuracy": "accuracy", "chunk-f1": "chunk_f1", "span-f1": "span_f1", "retrieval": "retrieval_accuracy"}


def cmd_score(run: Run) -> None:
    a = run.args
    task = a.task
    metric = metrics.TASK_METRICS.get(task) or _METRIC_ALIASES.get(task)
    if metric is None:
        raise ConfigError(f"unknown task {task!r}; choose from {sorted(metrics.TASK_METRICS) + sorted(_METRIC_ALIASES)}")
    out = run.output_path()
    result: dict[str, Any] = {"task": task, "metric": metric}
    if metric == "retrieval_accuracy":
        src = metrics.read_embeddings(run.input_path("src", a.src))
        tgt = metrics.read_embeddings(run.input_path("tgt", a.tgt))
        try:
            r = metrics.retrieve(src, tgt)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        result.update(score=100 * r.accuracy, zero_norm_src=r.zero_norm_src, zero_norm_tgt=r.zero_norm_tgt, n=len(src))
    else:
        records = _prediction_records(run, run.input_path())
        if not records:
            raise ConfigError("no prediction records")
        if metric == "accuracy":
            result["score"] = 100 * metrics.accuracy((r["gold"], r["pred"]) for r in records)
        elif metric == "chunk_f1":
            cs = metrics.chunk_f1([r["gold"] for r in records], [r["pred"] for r in records])
            for idx in cs.errors:
                run.errors.append(RecordError(0, f"record {records[idx].get('id', idx)!r}: tag length mismatch"))
            result.update(cs.to_json())
            result["score"] = 100 * cs.f1
        else:
            normalize = not run.get("no_normalize", a.no_normalize or None, False)
            result["score"] = metrics.qa_score(((r["gold"], r["pred"]) for r in records), normalize)
        result["n"] = len(records)
    run.counters["score"] = result["score"]
    _write_json(out, result)


def _is_score_map(obj: Any) -> bool:
    return isinstance(obj, dict) and all(isinstance(v, (int, float)) or v is None for v in obj.values())


def cmd_aggregate(run: Run) -> None:
    src = run.input_path()
    out = run.output_path()
    data = json.loads(src.read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not data:
        raise ConfigError("aggregate input must be a non-empty JSON object")
    if all(_is_score_map(v) for v in data.values()):
        reports = {"": metrics.aggregate(data)}
    elif all(isinstance(v, dict) and all(_is_score_map(t) for t in v.values()) for v in data.values()):
        reports = {model: metrics.aggregate(tasks) for model, tasks in data.items()}
    else:
        raise ConfigError("aggregate input must map task -> lang -> score, or model -> task -> lang -> score")
    payload = {name: r.to_json() for name, r in reports.items()} if "" not in reports else reports[""].to_json()
    _write_json(out, payload)
    for name, r in reports.items():
        if name:
            sys.stderr.write(f"== {name}\n")
        sys.stderr.write(r.render() + "\n")
    run.counters["models"] = len(reports)


COMMANDS: dict[str, Callable[[Run], None]] = {
    "clean": cmd_clean,
    "stats": cmd_stats,
    "queries": cmd_queries,
    "lid-train": cmd_lid_train,
    "lid-eval": cmd_lid_eval,
    "lid-filter": cmd_lid_filter,
    "dedup": cmd_dedup,
    "plan": cmd_plan,
    "sample": cmd_sample,
    "to-deva": cmd_to_deva,
    "vocab-train": cmd_vocab_train,
    "tokenize": cmd_tokenize,
    "fertility": cmd_fertility,
    "mlm-build": cmd_mlm_build,
    "tlm-build": cmd_tlm_build,
    "score": cmd_score,
    "aggregate": cmd_aggregate,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML config file (default: $CORPUS_FORGE_CONFIG)")
    common.add_argument("--workers", type=int, help="worker processes for per-document stages")
    common.add_argument("--seed", type=int)
    common.add_argument("--report", help="run report path (default: <output>.report.json)")
    common.add_argument("--max-record-errors", type=int, help="malformed records tolerated before exit 2")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="corpus-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help)

    p = add("clean", "run the cleaning pipeline")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=["jsonl", "text"])
    p.add_argument("--stages", help="comma-separated subset of " + ",".join(DEFAULT_STAGES))
    p.add_argument("--threshold", type=float)
    p.add_argument("--min-words", type=int)
    p.add_argument("--lid-model")
    p.add_argument("--blacklist", action="append", metavar="LANG=PATH")
    p.add_argument("--offensive-drop-document", action="store_true")
    p.add_argument("--lang", help="language for documents without one")

    p = add("stats", "corpus statistics")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    p.add_argument("--lang")

    p = add("queries", "most frequent words of a language")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    p.add_argument("--lang")
    p.add_argument("-k", type=int)

    p = add("lid-train", "train a language identifier")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    p.add_argument("--order", type=int)
    p.add_argument("--smoothing", type=float)
    p.add_argument("--min-letters", type=int)
    p.add_argument("--min-margin", type=float)

    p = add("lid-eval", "evaluate a language identifier")
    p.add_argument("--model")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")

    p = add("lid-filter", "paragraph-level language filtering")
    p.add_argument("--model")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")

    p = add("dedup", "exact normalized-text deduplication")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")

    p = add("plan", "temperature sampling plan")
    p.add_argument("-i", "--input")
    p.add_argument("--counts", help="JSON object of per-language token counts")
    p.add_argument("-o", "--output")
    p.add_argument("--alpha", type=float)

    p = add("sample", "materialize upsampled shards")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output", help="shard directory")
    p.add_argument("--plan")
    p.add_argument("--alpha", type=float)
    p.add_argument("--target-tokens", type=int)
    p.add_argument("--docs-per-shard", type=int)
    p.add_argument("--no-lang-token", action="store_true")

    p = add("to-deva", "convert Brahmi-script text to Devanagari")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    p.add_argument("--script")
    p.add_argument("--lang")

    p = add("vocab-train", "train a WordPiece vocabulary")
    p.add_argument("-i", "--input", action="append")
    p.add_argument("-o", "--output")
    p.add_argument("--vocab-size", type=int)
    p.add_argument("--min-pair-freq", type=int)
    p.add_argument("--fraction", type=float)

    p = add("tokenize", "WordPiece-tokenize text lines")
    p.add_argument("--vocab")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")

    p = add("fertility", "pieces per word by language")
    p.add_argument("--vocab")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    p.add_argument("--lang")

    p = add("mlm-build", "masked-LM examples from text shards")
    p.add_argument("--vocab")
    p.add_argument("-i", "--input", action="append")
    p.add_argument("-o", "--output")
    p.add_argument("--max-len", type=int)
    p.add_argument("--mask-prob", type=float)
    p.add_argument("--no-cls", action="store_true")
    p.add_argument("--no-pack", action="store_true")

    p = add("tlm-build", "translation-LM examples from parallel pairs")
    p.add_argument("--vocab")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    p.add_argument("--max-len", type=int)
    p.add_argument("--mask-prob", type=float)
    p.add_argument("--no-cls", action="store_true")

    p = add("score", "score a prediction file")
    p.add_argument("task", help="task id (" + ", ".join(sorted(metrics.TASK_METRICS)) + ") or metric name")
    p.add_argument("-i", "--input")
    p.add_argument("--src")
    p.add_argument("--tgt")
    p.add_argument("-o", "--output")
    p.add_argument("--no-normalize", action="store_true")

    p = add("aggregate", "average scores across languages and tasks")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a command is required")
    except UsageError as exc:
        sys.stderr.write(f"corpus-forge: error: {exc}\n")
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    started = time.perf_counter()
    try:
        run = Run(args)
        COMMANDS[args.command](run)
    except (ConfigError, CorpusError, languages.UnknownLanguageError, lid.LidTrainingError) as exc:
        sys.stderr.write(f"corpus-forge {args.command}: {exc}\n")
        return EXIT_CONFIG
    report = run.report(started)
    report_path = args.report or (run.outputs[0] + ".report.json" if run.outputs else None)
    if report_path:
        Path(report_path).write_text(_dump(report), encoding="utf-8")
    if args.verbose or not report_path:
        sys.stderr.write(_dump({"counters": report["counters"], "record_error_count": len(run.errors)}))
    if len(run.errors) > run.budget:
        sys.stderr.write(
            f"corpus-forge {args.command}: {len(run.errors)} record errors exceed the budget of {run.budget}\n"
        )
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
