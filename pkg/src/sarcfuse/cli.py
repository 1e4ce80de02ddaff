"""Command-line entry point.

Subcommands cover the full experiment lifecycle: `ingest` raw corpora
into the canonical layout, `stats` for corpus length summaries,
`pretrain` for masked-LM domain adaptation, `train` / `eval` / `predict`
for the fused model, `baseline` for the comparison models, and `report`
to merge per-run metrics into one comparison table.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation problem.
"""

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .baselines import (
    cnn_baseline_train_eval,
    cnn_lstm_dnn_train_eval,
    default_cnn_lstm_dnn_spec,
    default_nbow_spec,
    import_external_predictions,
    nbow_train_eval,
)
from .config import RunConfig, load_run_config
from .corpus import (
    BENCHMARK_COUNTS,
    DatasetBundle,
    compute_length_stats,
    load_dataset,
    load_manifest,
    merge_training_corpora,
    write_bundle,
)
from .errors import (
    ConfigError,
    CoverageError,
    EmptyCorpusError,
    LabelError,
    ManifestMismatchError,
    ParseError,
    SarcfuseError,
    VectorFormatError,
)
from .evalkit import MetricsReport, render_results_table, score
from .extractors import EmotionExtractor, FeatureCache, SentimentExtractor
from .fusion import load_pipeline, train_fused
from .lexical import build_vocabulary, load_embeddings
from .sarc_encoder import mlm_pretrain
from .utils import write_json

CACHE_ENV_VAR = "SARCFUSE_CACHE_DIR"

# Errors that mean the inputs were bad rather than the run failing.
_VALIDATION_ERRORS = (
    ConfigError,
    CoverageError,
    EmptyCorpusError,
    LabelError,
    ManifestMismatchError,
    ParseError,
    VectorFormatError,
)


@dataclass
class RunManifest:
    """Audit record written into every run's output directory."""

    command: str
    config_path: str
    seed: int
    started_at: str
    finished_at: str
    version: str
    out_dir: str

    def write(self, out_dir):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "run_manifest.json"
        write_json(path, dataclasses.asdict(self))
        return path


def _utc_now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class _Run:
    """Collects the fields of the run manifest around a command body."""

    def __init__(self, command, config_path=None, seed=0):
        self.command = command
        self.config_path = str(config_path) if config_path else None
        self.seed = seed
        self.started_at = _utc_now()

    def finish(self, out_dir) -> RunManifest:
        manifest = RunManifest(
            command=self.command,
            config_path=self.config_path,
            seed=self.seed,
            started_at=self.started_at,
            finished_at=_utc_now(),
            version=__version__,
            out_dir=str(out_dir),
        )
        manifest.write(out_dir)
        return manifest


def _load_config(args) -> RunConfig:
    cfg = load_run_config(args.config, getattr(args, "set", None) or ())
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    return cfg


def _load_bundle(cfg: RunConfig) -> DatasetBundle:
    if not cfg.data_path:
        raise ConfigError("a dataset path is required", key_path="data_path")
    return load_dataset(cfg.data_path, format=cfg.data_format, name=cfg.dataset)


def _feature_cache(cfg: RunConfig):
    directory = os.environ.get(CACHE_ENV_VAR) or cfg.assets.cache_dir
    return FeatureCache(directory) if directory else None


def _require_asset(value, key):
    if not value:
        raise ConfigError("this command needs that asset configured", key_path=key)
    return value


def _forbid_test_reads(bundle, command):
    if bundle.test_reads:
        raise SarcfuseError(
            f"{command} read the test split {bundle.test_reads} times; "
            "training-phase commands must never touch it"
        )


def _print_report(report: MetricsReport, heading):
    print(heading)
    for line in json.dumps(report.to_dict(), indent=2, sort_keys=True).splitlines():
        print(line)


def _write_metrics(out_dir, dataset, model, report):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "report.json"
    write_json(path, {"dataset": dataset, "model": model, "metrics": report.to_dict()})
    return path


def cmd_ingest(args):
    manifest = load_manifest(args.manifest) if args.manifest else None
    bundle = load_dataset(
        args.input,
        format=args.format,
        name=args.dataset,
        manifest=manifest,
        split=args.split,
    )
    if args.check_benchmark:
        if args.dataset not in BENCHMARK_COUNTS:
            raise ConfigError(
                f"no published counts for dataset {args.dataset!r}", key_path="dataset"
            )
        bundle.validate_manifest(BENCHMARK_COUNTS[args.dataset])
    run = _Run("ingest", seed=0)
    paths = write_bundle(bundle, args.out)
    run.finish(args.out)
    counts = bundle.split_counts()
    print(f"ingested {args.dataset} -> {args.out}")
    for split in ("train", "test"):
        by_label = counts[split]
        print(f"  {split}: sarcastic={by_label[1]} literal={by_label[0]}")
    print(f"  files: {', '.join(str(p) for p in paths.values())}")


def cmd_stats(args):
    bundle = load_dataset(args.data, format=args.format, name=args.dataset)
    if args.split == "train":
        examples = bundle.train
    elif args.split == "test":
        examples = bundle.test
    else:
        examples = bundle.train + bundle.test
    stats = compute_length_stats(examples)
    payload = {"dataset": args.dataset, "split": args.split, **stats.to_dict()}
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out:
        run = _Run("stats", seed=0)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(out_dir / "stats.json", payload)
        run.finish(out_dir)


def cmd_pretrain(args):
    cfg = _load_config(args)
    run = _Run("pretrain", config_path=args.config, seed=cfg.seed)
    bundles = [_load_bundle(cfg)]
    for extra in args.extra_data or ():
        bundles.append(load_dataset(extra, format=cfg.data_format, name=Path(extra).name))
    texts = [e.text for e in merge_training_corpora(bundles)]
    out_dir = Path(cfg.out_dir)
    result = mlm_pretrain(texts, cfg.assets.sarc_base, out_dir / "mlm", cfg.mlm)
    for bundle in bundles:
        _forbid_test_reads(bundle, "pretrain")
    run.finish(out_dir)
    print(f"adapted encoder written to {result.checkpoint_dir}")
    for epoch, loss in enumerate(result.epoch_losses):
        print(f"  epoch {epoch}: mean loss {loss:.4f}")


def cmd_train(args):
    cfg = _load_config(args)
    run = _Run("train", config_path=args.config, seed=cfg.seed)
    bundle = _load_bundle(cfg)
    vocab = build_vocabulary(bundle.train)
    table = load_embeddings(
        vocab,
        _require_asset(cfg.assets.vector_file, "assets.vector_file"),
        dim=cfg.assets.vector_dim,
        seed=cfg.seed,
    )
    emotion = EmotionExtractor(cfg.assets.emotion_model)
    sentiment = SentimentExtractor(cfg.assets.sentiment_model)
    out_dir = Path(cfg.out_dir)
    result = train_fused(
        bundle,
        cfg.assets.sarc_base,
        emotion,
        sentiment,
        table,
        vocab,
        cfg.train,
        cfg.fusion,
        cfg.cnn,
        out_dir,
        cache=_feature_cache(cfg),
    )
    _forbid_test_reads(bundle, "train")
    run.finish(out_dir)
    print(f"checkpoint: {result.checkpoint_dir}")
    print(f"best epoch: {result.best_epoch}")
    last = result.history[-1]
    print(f"final epoch loss: {last['train_loss']:.4f}")


def cmd_eval(args):
    cfg = _load_config(args)
    run = _Run("eval", config_path=args.config, seed=cfg.seed)
    bundle = _load_bundle(cfg)
    pipeline = load_pipeline(args.checkpoint, cache=_feature_cache(cfg))
    test = bundle.test
    predictions = pipeline.predicted_labels([e.text for e in test])
    report = score(predictions, [e.label for e in test])
    out_dir = Path(cfg.out_dir)
    _write_metrics(out_dir, cfg.dataset, args.model_name, report)
    run.finish(out_dir)
    _print_report(report, f"{cfg.dataset} / {args.model_name}")


def cmd_predict(args):
    emotion = EmotionExtractor(args.emotion) if args.emotion else None
    sentiment = SentimentExtractor(args.sentiment) if args.sentiment else None
    pipeline = load_pipeline(args.checkpoint, emotion=emotion, sentiment=sentiment)
    texts = list(args.text or ())
    if args.file:
        with open(args.file, encoding="utf-8") as f:
            texts.extend(line.rstrip("\n") for line in f if line.strip())
    if not texts:
        raise ConfigError("nothing to predict: pass --text or --file")
    records = []
    for text, prediction in zip(texts, pipeline.predict(texts)):
        record = {
            "text": text,
            "label": prediction.predicted_label,
            "probs": [float(p) for p in prediction.probs],
        }
        records.append(record)
        print(json.dumps(record))
    if args.out:
        run = _Run("predict", seed=0)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "predictions.jsonl", "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record) + "\n")
        run.finish(out_dir)


def cmd_baseline(args):
    cfg = _load_config(args)
    run = _Run(f"baseline:{args.kind}", config_path=args.config, seed=cfg.seed)
    bundle = _load_bundle(cfg)

    if args.kind == "external":
        if not args.predictions:
            raise ConfigError("external baselines need --predictions")
        report = import_external_predictions(args.predictions, bundle)
        model_name = args.model_name or "external"
    else:
        # Embedding lookup may cover the evaluation texts too: vectors are
        # pretrained, so no label information leaks.
        all_examples = bundle.train + bundle.test
        vocab = build_vocabulary(all_examples)
        if args.kind == "nbow":
            table = load_embeddings(
                vocab,
                _require_asset(cfg.assets.nbow_vector_file, "assets.nbow_vector_file"),
                dim=cfg.assets.nbow_vector_dim,
                seed=cfg.seed,
            )
            report = nbow_train_eval(bundle, vocab, table, default_nbow_spec(seed=cfg.seed))
        else:
            table = load_embeddings(
                vocab,
                _require_asset(cfg.assets.vector_file, "assets.vector_file"),
                dim=cfg.assets.vector_dim,
                seed=cfg.seed,
            )
            if args.kind == "cnn":
                report = cnn_baseline_train_eval(bundle, vocab, table, cfg.cnn, cfg.train)
            else:
                report = cnn_lstm_dnn_train_eval(
                    bundle,
                    vocab,
                    table,
                    default_cnn_lstm_dnn_spec(seed=cfg.seed),
                    cfg.train,
                    max_words=cfg.cnn.max_words,
                )
        model_name = args.model_name or args.kind
    out_dir = Path(cfg.out_dir)
    _write_metrics(out_dir, cfg.dataset, model_name, report)
    run.finish(out_dir)
    _print_report(report, f"{cfg.dataset} / {model_name}")


def cmd_report(args):
    reports = {}
    for path in args.runs:
        with open(path, encoding="utf-8") as f:
            record = json.load(f)
        key = (record["dataset"], record["model"])
        reports[key] = MetricsReport.from_dict(record["metrics"])
    if not reports:
        raise ConfigError("no report files given")
    table = render_results_table(reports)
    print(table.to_text())
    if args.out:
        run = _Run("report", seed=0)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "comparison.csv").write_text(table.to_csv(), encoding="utf-8")
        (out_dir / "comparison.txt").write_text(table.to_text() + "\n", encoding="utf-8")
        run.finish(out_dir)


def _add_config_arguments(sub):
    sub.add_argument("--config", required=True, help="run configuration file (YAML or JSON)")
    sub.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config key by dotted path, e.g. train.lr=2e-5",
    )
    sub.add_argument("--out", help="output directory (overrides the config's out_dir)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarcfuse",
        description="Train and evaluate the fused sarcasm classifier and its baselines.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("ingest", help="convert a raw corpus into the canonical layout")
    sub.add_argument("--in", dest="input", required=True, help="source file or directory")
    sub.add_argument("--out", required=True, help="destination dataset directory")
    sub.add_argument("--dataset", required=True, help="dataset name")
    sub.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
    sub.add_argument("--split", choices=("train", "test"), default="train",
                     help="split to assign when --in is a single file")
    sub.add_argument("--manifest", help="expected-count manifest to validate against")
    sub.add_argument("--check-benchmark", action="store_true",
                     help="validate against the published benchmark counts")
    sub.set_defaults(func=cmd_ingest)

    sub = commands.add_parser("stats", help="corpus word-length statistics")
    sub.add_argument("--data", required=True, help="dataset directory or file")
    sub.add_argument("--dataset", default="sarc_movies")
    sub.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
    sub.add_argument("--split", choices=("train", "test", "both"), default="both")
    sub.add_argument("--out", help="also write stats.json under this directory")
    sub.set_defaults(func=cmd_stats)

    sub = commands.add_parser("pretrain", help="masked-LM adaptation of the base encoder")
    _add_config_arguments(sub)
    sub.add_argument("--extra-data", action="append",
                     help="additional dataset directory whose train split joins the corpus")
    sub.set_defaults(func=cmd_pretrain)

    sub = commands.add_parser("train", help="train the fused classifier")
    _add_config_arguments(sub)
    sub.set_defaults(func=cmd_train)

    sub = commands.add_parser("eval", help="score a checkpoint on the test split")
    _add_config_arguments(sub)
    sub.add_argument("--checkpoint", required=True)
    sub.add_argument("--model-name", default="fused")
    sub.set_defaults(func=cmd_eval)

    sub = commands.add_parser("predict", help="classify texts with a checkpoint")
    sub.add_argument("--checkpoint", required=True)
    sub.add_argument("--text", action="append", help="text to classify (repeatable)")
    sub.add_argument("--file", help="file of texts, one per line")
    sub.add_argument("--emotion", help="override the emotion extractor checkpoint")
    sub.add_argument("--sentiment", help="override the sentiment extractor checkpoint")
    sub.add_argument("--out", help="also write predictions.jsonl under this directory")
    sub.set_defaults(func=cmd_predict)

    sub = commands.add_parser("baseline", help="train and score a baseline")
    _add_config_arguments(sub)
    sub.add_argument("--kind", required=True, choices=("nbow", "cnn", "cnn_lstm_dnn", "external"))
    sub.add_argument("--predictions", help="JSONL prediction file for --kind external")
    sub.add_argument("--model-name", help="name recorded in report.json")
    sub.set_defaults(func=cmd_baseline)

    sub = commands.add_parser("report", help="merge run reports into a comparison table")
    sub.add_argument("--runs", nargs="+", required=True, help="report.json files")
    sub.add_argument("--out", help="also write comparison.csv/.txt under this directory")
    sub.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return 2
    except SarcfuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
