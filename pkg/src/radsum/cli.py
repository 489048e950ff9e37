"""Command-line front end.

Subcommands: parse, filter, split, augment, collate, stats, score, stratify,
baseline, loss. Global flags: --config, --seed, --strict, --threads,
--output. Record streams are JSON Lines; every run prints a single-line JSON
summary embedding the resolved config and toolkit version, so identical
configs and inputs reproduce byte-identical outputs.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from . import augment as aug
from . import dataset, evaluation, reports, rouge
from .config import DEFAULT_SEED, Resolver, RunConfig, derive_seed, load_config_file
from .errors import RadsumError
from .loss import EmbeddingTable, PredictedDistribution, cross_entropy_loss, embedding_distance_loss
from .reports import LabelValue, SectionName
from .textnorm import DEFAULT_ABBREVIATIONS, NormalizationConfig

logger = logging.getLogger("radsum")


def _emit_summary(run: RunConfig, **counts) -> None:
    doc = run.to_dict()
    doc.update(counts)
    print(json.dumps(doc, ensure_ascii=False))


def _write_json(doc: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, ensure_ascii=False, indent=2) + "\n")


def _parse_fields(spec: str | list) -> list[SectionName]:
    if isinstance(spec, str):
        names = [s for s in spec.split(",") if s.strip()]
    else:
        names = list(spec)
    return [SectionName(n) for n in names]


def _norm_config(cased: bool | None, keep_censoring: bool | None) -> NormalizationConfig:
    return NormalizationConfig(
        lowercase=not bool(cased),
        strip_censoring=not bool(keep_censoring),
    )


# --- subcommands ----------------------------------------------------------------


def _cmd_parse(args, file_cfg) -> int:
    r = Resolver(file_cfg, "parse")
    strict = bool(r.get("strict", args.strict, False))
    aliases = r.get("aliases", None, {})
    pattern = r.get("pattern", args.pattern, "*.txt")
    input_path = Path(args.input)
    if input_path.is_dir():
        raw = reports.iter_raw_dir(input_path, pattern)
    else:
        raw = reports.iter_raw_jsonl(input_path)
    labels_by_id = reports.read_labels_csv(args.labels) if args.labels else {}
    n_input = n_parsed = n_failed = 0
    parsed = []
    for rid, text in raw:
        n_input += 1
        try:
            report = reports.parse_report(rid, text, aliases=aliases)
            if labels_by_id:
                report = reports.extract_labels(report, labels_by_id.get(rid, {}))
            parsed.append(report)
            n_parsed += 1
        except RadsumError as exc:
            n_failed += 1
            if strict:
                print(f"error: {exc}", file=sys.stderr)
                return 1
            logger.warning("skipping %s: %s", rid, exc)
    reports.write_reports_jsonl(parsed, args.output)
    run = RunConfig("parse", __version__, {
        "input": str(args.input), "labels": args.labels, "output": str(args.output),
        "strict": strict, "pattern": pattern, "aliases": dict(aliases),
    })
    _emit_summary(run, n_input=n_input, n_parsed=n_parsed, n_failed=n_failed)
    return 0


def _cmd_filter(args, file_cfg) -> int:
    r = Resolver(file_cfg, "filter")
    required = _parse_fields(r.get("required_fields", args.required_fields, ""))
    corpus = reports.read_reports_jsonl(args.input)
    kept, drops = dataset.filter_complete(corpus, required)
    reports.write_reports_jsonl(kept, args.output)
    run = RunConfig("filter", __version__, {
        "input": str(args.input), "output": str(args.output),
        "required_fields": [f.text for f in required],
    })
    _emit_summary(
        run,
        n_input=len(corpus),
        n_kept=len(kept),
        n_dropped=len(corpus) - len(kept),
        drops={name.text: n for name, n in drops.items()},
    )
    return 0


def _cmd_split(args, file_cfg) -> int:
    r = Resolver(file_cfg, "split")
    ratio = float(r.get("ratio", args.ratio, 0.8))
    seed = derive_seed(args.root_seed, "split")
    corpus = reports.read_reports_jsonl(args.input)
    result = dataset.split(corpus, ratio, seed)
    dataset.write_split_manifest(result, args.output)
    run = RunConfig("split", __version__, {
        "input": str(args.input), "output": str(args.output),
        "ratio": ratio, "seed": seed, "root_seed": args.root_seed,
    })
    _emit_summary(run, n=len(corpus), n_train=len(result.train_ids), n_test=len(result.test_ids))
    return 0


def _cmd_augment(args, file_cfg) -> int:
    r = Resolver(file_cfg, "augment")
    epochs = int(r.get("epochs", args.epochs, aug.DEFAULT_EPOCHS))
    shuffle_start = r.get("shuffle_start", args.shuffle_start, None)
    if shuffle_start is None:
        shuffle_start = max(0, epochs - 3)
    shuffle_start = int(shuffle_start)
    mode = aug.ShuffleMode(r.get("mode", args.mode, "per-epoch"))
    fields = _parse_fields(r.get("fields", args.fields, [f.text for f in aug.DEFAULT_INPUT_FIELDS]))
    separator = r.get("separator", args.separator, aug.DEFAULT_SEPARATOR)
    strict = bool(r.get("strict", args.strict, False))
    seed = derive_seed(args.root_seed, "augment")
    corpus = reports.read_reports_jsonl(args.input)
    schedule = aug.make_schedule(fields, epochs, shuffle_start, seed, mode)
    if args.schedule_out:
        _write_json(schedule.to_dict(), args.schedule_out)
    expanded = aug.expand_corpus(
        corpus, schedule, fields, separator=separator, strict=strict, fail_fast=strict,
    )
    try:
        n_pairs = aug.write_pairs_jsonl(expanded, args.output)
    except RadsumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    run = RunConfig("augment", __version__, {
        "input": str(args.input), "output": str(args.output),
        "epochs": epochs, "shuffle_start": shuffle_start, "mode": mode.value,
        "fields": [f.text for f in fields], "separator": separator,
        "seed": seed, "root_seed": args.root_seed, "strict": strict,
    })
    _emit_summary(
        run,
        n_reports=len(corpus),
        n_pairs=n_pairs,
        n_skipped=len(corpus) * epochs - n_pairs,
    )
    return 0


def _cmd_collate(args, file_cfg) -> int:
    r = Resolver(file_cfg, "collate")
    batch_size = int(r.get("batch_size", args.batch_size, 8))
    max_input_len = int(r.get("max_input_len", args.max_input_len, 512))
    max_target_len = int(r.get("max_target_len", args.max_target_len, 128))
    start = r.get("start_marker", None, dataset.START_MARKER)
    end = r.get("end_marker", None, dataset.END_MARKER)
    pad = r.get("pad_marker", None, dataset.PAD_MARKER)
    cfg = _norm_config(args.cased, args.keep_censoring)
    pairs = []
    with open(args.input, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                pairs.append(aug.ExamplePair(str(rec["pair_id"]), rec["input"], rec["target"]))
    n_batches = 0
    trunc_in = trunc_tgt = 0
    with open(args.output, "w", encoding="utf-8") as out:
        for i in range(0, len(pairs), batch_size):
            batch = dataset.collate(
                pairs[i:i + batch_size], max_input_len, max_target_len, cfg,
                start_marker=start, end_marker=end, pad_marker=pad,
            )
            out.write(json.dumps(batch.to_dict(), ensure_ascii=False) + "\n")
            n_batches += 1
            trunc_in += batch.n_truncated_inputs
            trunc_tgt += batch.n_truncated_targets
    run = RunConfig("collate", __version__, {
        "input": str(args.input), "output": str(args.output),
        "batch_size": batch_size, "max_input_len": max_input_len,
        "max_target_len": max_target_len,
        "markers": [start, end, pad],
    })
    _emit_summary(
        run, n_pairs=len(pairs), n_batches=n_batches,
        n_truncated_inputs=trunc_in, n_truncated_targets=trunc_tgt,
    )
    return 0


def _cmd_stats(args, file_cfg) -> int:
    r = Resolver(file_cfg, "stats")
    fields = _parse_fields(r.get("fields", args.fields, [f.text for f in aug.DEFAULT_INPUT_FIELDS]))
    cfg = _norm_config(args.cased, args.keep_censoring)
    corpus = reports.read_reports_jsonl(args.input)
    stats = dataset.corpus_stats(corpus, fields, cfg)
    _write_json(stats.to_dict(), args.output)
    if args.csv:
        from collections import Counter
        hist = Counter(stats.combined_counts)
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("tokens,n_reports\n")
            for value in sorted(hist):
                fh.write(f"{value},{hist[value]}\n")
    run = RunConfig("stats", __version__, {
        "input": str(args.input), "output": str(args.output),
        "fields": [f.text for f in fields],
    })
    _emit_summary(run, n_reports=len(corpus))
    return 0


def _cmd_score(args, file_cfg) -> int:
    r = Resolver(file_cfg, "score")
    bootstrap = bool(r.get("bootstrap", args.bootstrap, False))
    resamples = int(r.get("resamples", args.resamples, 1000))
    cased = bool(r.get("cased", args.cased, False))
    abbreviations = r.get("abbreviations", None, None)
    abbreviations = (
        frozenset(a.lower() for a in abbreviations)
        if abbreviations is not None
        else DEFAULT_ABBREVIATIONS
    )
    cfg = NormalizationConfig(lowercase=not cased, strip_censoring=not bool(args.keep_censoring))
    workers = max(1, args.threads)
    seed = derive_seed(args.root_seed, "bootstrap")
    pairs = rouge.read_pairs_jsonl(args.predictions)
    try:
        report = rouge.score_pairs(
            pairs, cfg, workers=workers,
            bootstrap=bootstrap, resamples=resamples, seed=seed,
            abbreviations=abbreviations,
        )
    except RadsumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_json(report.to_dict(), args.output)
    if args.csv:
        rouge.write_pair_csv(report, args.csv)
    print(rouge.format_display_table(report))
    run = RunConfig("score", __version__, {
        "predictions": str(args.predictions), "output": str(args.output),
        "bootstrap": bootstrap, "resamples": resamples, "cased": cased,
        "threads": workers, "seed": seed, "root_seed": args.root_seed,
    })
    _emit_summary(run, n_pairs=len(pairs))
    return 0


def _cmd_stratify(args, file_cfg) -> int:
    r = Resolver(file_cfg, "stratify")
    metric = r.get("metric", args.metric, "rougeLsum")
    polarity_name = r.get("polarity", args.polarity, "indicated")
    polarity = None if polarity_name == "any" else LabelValue(polarity_name)
    nf_key = r.get("no_findings_key", args.no_findings_key, "No Finding")
    corpus = {rep.report_id: rep for rep in reports.read_reports_jsonl(args.reports)}
    with open(args.scores, "r", encoding="utf-8") as fh:
        score_doc = json.load(fh)
    scored = []
    n_unmatched = 0
    for rec in score_doc["pairs"]:
        report = corpus.get(rec["pair_id"])
        if report is None:
            n_unmatched += 1
            continue
        scores = {
            m: rouge.RougeScore(**{c: rec[m][c] for c in rouge.COMPONENTS})
            for m in rouge.METRICS
            if m in rec
        }
        scored.append((report, scores))
    strata = evaluation.stratify(scored, polarity=polarity, no_findings_key=nf_key)
    try:
        correlation = evaluation.count_score_correlation(strata, metric=metric)
    except RadsumError:
        correlation = None
    doc = {
        "strata": [s.to_dict() for s in strata],
        "correlation": {"metric": metric, "component": "f1", "pearson_r": correlation},
    }
    _write_json(doc, args.output)
    if args.csv:
        evaluation.write_strata_csv(strata, args.csv, metric=metric)
    run = RunConfig("stratify", __version__, {
        "reports": str(args.reports), "scores": str(args.scores),
        "output": str(args.output), "metric": metric,
        "polarity": polarity_name, "no_findings_key": nf_key,
    })
    _emit_summary(
        run, n_scored=len(scored), n_unmatched=n_unmatched, n_strata=len(strata),
    )
    return 0


def _cmd_baseline(args, file_cfg) -> int:
    r = Resolver(file_cfg, "baseline")
    mode = r.get("mode", args.mode, "canonical")
    phrase = r.get("phrase", args.phrase, evaluation.CANONICAL_PHRASE)
    k = int(r.get("k", args.k, 1))
    strict = bool(r.get("strict", args.strict, False))
    corpus = reports.read_reports_jsonl(args.input)
    n_pairs = n_skipped = 0
    with open(args.output, "w", encoding="utf-8") as fh:
        for report in corpus:
            try:
                if not report.has_section(reports.IMPRESSION):
                    raise RadsumError(f"report {report.report_id!r} has no impression")
                if mode == "canonical":
                    candidate = evaluation.canonical_baseline(report, phrase)
                else:
                    candidate = evaluation.extractive_baseline(report, k)
            except RadsumError as exc:
                if strict:
                    print(f"error: {exc}", file=sys.stderr)
                    return 1
                n_skipped += 1
                logger.warning("skipping %s: %s", report.report_id, exc)
                continue
            fh.write(json.dumps({
                "pair_id": report.report_id,
                "candidate": candidate,
                "reference": report.sections[reports.IMPRESSION],
            }, ensure_ascii=False) + "\n")
            n_pairs += 1
    run = RunConfig("baseline", __version__, {
        "input": str(args.input), "output": str(args.output),
        "mode": mode, "phrase": phrase, "k": k, "strict": strict,
    })
    _emit_summary(run, n_reports=len(corpus), n_pairs=n_pairs, n_skipped=n_skipped)
    return 0


def _cmd_loss(args, file_cfg) -> int:
    table = EmbeddingTable.from_text(args.embeddings)
    with open(args.input, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    reference = list(doc["reference"])
    dists = [PredictedDistribution(tuple(p)) for p in doc["distributions"]]
    result = {
        "embedding_distance": embedding_distance_loss(dists, reference, table),
        "cross_entropy": cross_entropy_loss(
            dists, reference, table, per_step_mean=bool(args.mean_per_step)
        ),
        "n_steps": len(reference),
    }
    if args.output:
        _write_json(result, args.output)
    run = RunConfig("loss", __version__, {
        "embeddings": str(args.embeddings), "input": str(args.input),
        "output": str(args.output) if args.output else None,
        "mean_per_step": bool(args.mean_per_step),
    })
    _emit_summary(run, **result)
    return 0


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file; flags override it")
    common.add_argument("--seed", dest="root_seed", type=int, default=DEFAULT_SEED,
                        help="root seed; subsystems derive child seeds from it")
    common.add_argument("--strict", action=argparse.BooleanOptionalAction, default=None,
                        help="fail the run on the first record error")
    common.add_argument("--threads", type=int, default=1,
                        help="worker processes for scoring")
    common.add_argument("--cased", action=argparse.BooleanOptionalAction, default=None,
                        help="keep case when normalizing (default: lowercase)")
    common.add_argument("--keep-censoring", action=argparse.BooleanOptionalAction,
                        default=None, help="keep ____ censoring markers when normalizing")

    parser = argparse.ArgumentParser(
        prog="radsum",
        description="Radiology-report summarization corpus and evaluation toolkit",
    )
    parser.add_argument("--version", action="version", version=f"radsum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse raw reports into sections")
    p.add_argument("--input", required=True, help="directory of .txt files or raw JSONL")
    p.add_argument("--labels", help="disease metadata CSV (report_id + disease columns)")
    p.add_argument("--pattern", default=None, help="glob for directory input")
    p.add_argument("--output", required=True, help="parsed reports JSONL")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("filter", parents=[common], help="keep reports with all input fields")
    p.add_argument("--input", required=True)
    p.add_argument("--required-fields", default=None,
                   help="comma-separated section names that must be present")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("split", parents=[common], help="seeded train/test split manifest")
    p.add_argument("--input", required=True)
    p.add_argument("--ratio", type=float, default=None)
    p.add_argument("--output", required=True, help="split manifest JSON")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("augment", parents=[common], help="render permuted training pairs")
    p.add_argument("--input", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--shuffle-start", type=int, default=None,
                   help="first epoch with shuffled fields (default: epochs - 3)")
    p.add_argument("--mode", choices=["per-epoch", "per-example"], default=None)
    p.add_argument("--fields", default=None, help="comma-separated input fields")
    p.add_argument("--separator", default=None)
    p.add_argument("--schedule-out", help="write the permutation schedule JSON here")
    p.add_argument("--output", required=True, help="pairs JSONL")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("collate", parents=[common], help="batch pairs for a trainer")
    p.add_argument("--input", required=True, help="pairs JSONL")
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--max-input-len", type=int, default=None)
    p.add_argument("--max-target-len", type=int, default=None)
    p.add_argument("--output", required=True, help="batches JSONL")
    p.set_defaults(func=_cmd_collate)

    p = sub.add_parser("stats", parents=[common], help="token-count statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--fields", default=None)
    p.add_argument("--csv", help="optional combined-count histogram CSV")
    p.add_argument("--output", required=True, help="stats JSON")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("score", parents=[common], help="ROUGE-score prediction pairs")
    p.add_argument("--predictions", required=True,
                   help='JSONL of {"pair_id", "candidate", "reference"}')
    p.add_argument("--bootstrap", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--resamples", type=int, default=None)
    p.add_argument("--csv", help="optional per-pair CSV export")
    p.add_argument("--output", required=True, help="score report JSON")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("stratify", parents=[common], help="per-disease score analysis")
    p.add_argument("--reports", required=True, help="labeled reports JSONL")
    p.add_argument("--scores", required=True, help="score report JSON")
    p.add_argument("--metric", default=None,
                   choices=list(rouge.METRICS), help="metric for CSV and correlation")
    p.add_argument("--polarity", default=None,
                   choices=["indicated", "negated", "uncertain", "any"])
    p.add_argument("--no-findings-key", default=None)
    p.add_argument("--csv", help="optional strata CSV export")
    p.add_argument("--output", required=True, help="stratification JSON")
    p.set_defaults(func=_cmd_stratify)

    p = sub.add_parser("baseline", parents=[common], help="generate baseline candidates")
    p.add_argument("--input", required=True, help="reports JSONL")
    p.add_argument("--mode", choices=["canonical", "extractive"], default=None)
    p.add_argument("--phrase", default=None, help="canonical phrase override")
    p.add_argument("-k", type=int, default=None, help="sentences for the extractive mode")
    p.add_argument("--output", required=True, help="predictions JSONL")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("loss", parents=[common], help="evaluate objective values")
    p.add_argument("--embeddings", required=True, help='"word v1 v2 ..." text file')
    p.add_argument("--input", required=True,
                   help='JSON with "reference" words and per-step "distributions"')
    p.add_argument("--mean-per-step", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--output", help="result JSON (summary always goes to stdout)")
    p.set_defaults(func=_cmd_loss)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_cfg = load_config_file(args.config)
        return args.func(args, file_cfg)
    except RadsumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
