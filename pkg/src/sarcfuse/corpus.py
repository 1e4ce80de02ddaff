"""Dataset ingestion, split/label accounting, and corpus length statistics.

Canonical on-disk layout per dataset: a directory holding `train.jsonl`
and `test.jsonl` (records `{"id": str, "text": str, "label": 0|1}`) plus a
sidecar `manifest.json` with expected per-split/per-label counts.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyCorpusError,
    LabelError,
    ManifestMismatchError,
    ParseError,
)
from .lexical import word_tokenize
from .utils import write_json, write_jsonl

SARCASTIC = 1
NON_SARCASTIC = 0

DATASETS = ("sarc_movies", "sarc_technology", "iac_v2", "twitter")
SPLITS = ("train", "test")

# Published per-split/per-label sizes of the four benchmark corpora,
# keyed dataset -> split -> label.
BENCHMARK_COUNTS = {
    "sarc_movies": {"train": {1: 2533, 0: 2707}, "test": {1: 641, 0: 669}},
    "sarc_technology": {"train": {1: 2738, 0: 1815}, "test": {1: 677, 0: 462}},
    "iac_v2": {"train": {1: 2616, 0: 2600}, "test": {1: 644, 0: 660}},
    "twitter": {"train": {1: 22323, 0: 25785}, "test": {1: 5648, 0: 6379}},
}


@dataclass(frozen=True)
class Example:
    """One labeled text instance."""

    id: str
    text: str
    label: int
    dataset: str
    split: str

    def __post_init__(self):
        if not self.text.strip():
            raise ParseError(f"example {self.id!r} has empty text")
        if self.label not in (0, 1):
            raise LabelError(f"example {self.id!r}: label must be 0 or 1, got {self.label!r}")
        if self.split not in SPLITS:
            raise ParseError(f"example {self.id!r}: unknown split {self.split!r}")

    def to_record(self):
        return {"id": self.id, "text": self.text, "label": self.label}


class DatasetBundle:
    """Train/test examples for one dataset, with manifest accounting.

    Reads of the test split are counted (`test_reads`) so that
    training-phase commands can prove they never touched it.
    """

    def __init__(self, name, train, test, manifest_counts=None):
        self.name = name
        self.train = list(train)
        self._test = list(test)
        self.manifest_counts = manifest_counts
        self.test_reads = 0
        train_ids = {e.id for e in self.train}
        clash = train_ids.intersection(e.id for e in self._test)
        if clash:
            raise ParseError(f"ids present in both splits: {sorted(clash)[:5]}")
        if manifest_counts is not None:
            self.validate_manifest(manifest_counts)

    @property
    def test(self):
        self.test_reads += 1
        return self._test

    def peek_test_size(self) -> int:
        """Size of the test split without counting as a content read."""
        return len(self._test)

    def split_counts(self):
        counts = {}
        for split, examples in (("train", self.train), ("test", self._test)):
            by_label = {0: 0, 1: 0}
            for example in examples:
                by_label[example.label] += 1
            counts[split] = by_label
        return counts

    def validate_manifest(self, manifest_counts):
        actual = self.split_counts()
        for split, by_label in manifest_counts.items():
            for label, expected in by_label.items():
                got = actual.get(split, {}).get(int(label), 0)
                if got != expected:
                    raise ManifestMismatchError(
                        f"{self.name}: split {split!r} label {label}: "
                        f"expected {expected} examples, found {got}"
                    )

    def __repr__(self):
        return (
            f"DatasetBundle({self.name!r}, train={len(self.train)}, "
            f"test={len(self._test)})"
        )


def _parse_jsonl(path, name, split):
    examples = []
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line_number=line_number) from exc
            if "text" not in record or "label" not in record:
                raise ParseError("record needs 'text' and 'label' fields", line_number=line_number)
            label = record["label"]
            if label not in (0, 1):
                raise LabelError(f"line {line_number}: label must be 0 or 1, got {label!r}")
            example_id = str(record.get("id", f"{name}-{split}-{line_number:06d}"))
            try:
                examples.append(Example(example_id, record["text"], label, name, split))
            except ParseError as exc:
                raise ParseError(str(exc), line_number=line_number) from exc
    return examples


def _parse_tsv(path, name, split):
    examples = []
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ParseError("expected text<TAB>label", line_number=line_number)
            text, _, label_field = line.rpartition("\t")
            if label_field not in ("0", "1"):
                raise LabelError(f"line {line_number}: label must be 0 or 1, got {label_field!r}")
            example_id = f"{name}-{split}-{line_number:06d}"
            try:
                examples.append(Example(example_id, text, int(label_field), name, split))
            except ParseError as exc:
                raise ParseError(str(exc), line_number=line_number) from exc
    return examples


_PARSERS = {"jsonl": _parse_jsonl, "tsv": _parse_tsv}


def load_manifest(path):
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    return {
        split: {int(label): int(count) for label, count in by_label.items()}
        for split, by_label in raw.items()
    }


def load_dataset(path, format="jsonl", name="sarc_movies", manifest=None, split="train"):
    """Load a DatasetBundle from a directory or a single split file.

    A directory is expected to hold `train.<format>` and/or `test.<format>`
    (a missing file yields an empty split) and optionally `manifest.json`.
    A single file is loaded into the split named by `split`. An explicit
    `manifest` argument wins over any sidecar file.
    """
    if format not in _PARSERS:
        raise ValueError(f"unknown format {format!r}")
    parse = _PARSERS[format]
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)

    per_split = {"train": [], "test": []}
    if path.is_dir():
        for split_name in SPLITS:
            split_file = path / f"{split_name}.{format}"
            if split_file.exists():
                per_split[split_name] = parse(split_file, name, split_name)
        sidecar = path / "manifest.json"
        if manifest is None and sidecar.exists():
            manifest = load_manifest(sidecar)
    else:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        per_split[split] = parse(path, name, split)

    return DatasetBundle(name, per_split["train"], per_split["test"], manifest)


def write_bundle(bundle: DatasetBundle, out_dir) -> dict:
    """Write the canonical JSONL layout plus manifest; returns the paths.

    Deterministic: rewriting an unchanged bundle produces byte-identical
    files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for split_name, examples in (("train", bundle.train), ("test", bundle._test)):
        target = out_dir / f"{split_name}.jsonl"
        write_jsonl(target, [e.to_record() for e in examples])
        paths[split_name] = target
    manifest_path = out_dir / "manifest.json"
    counts = bundle.split_counts()
    write_json(manifest_path, {s: {str(l): n for l, n in by.items()} for s, by in counts.items()})
    paths["manifest"] = manifest_path
    return paths


@dataclass
class LengthStats:
    """Word-count statistics over a corpus.

    `std` and `variance` are both reported because dispersion summaries in
    the wild are frequently one mislabeled as the other; `std` uses ddof=0.
    Median takes the lower middle element for even-sized corpora.
    """

    median: float
    mean: float
    std: float
    variance: float
    max: int
    min: int

    def to_dict(self):
        return {
            "median": self.median,
            "mean": self.mean,
            "std": self.std,
            "variance": self.variance,
            "max": self.max,
            "min": self.min,
        }


def compute_length_stats(examples, tokenizer=word_tokenize) -> LengthStats:
    """Statistics over per-example word counts from the shared tokenizer."""
    if not examples:
        raise EmptyCorpusError("no examples to compute length statistics over")
    lengths = np.array([len(tokenizer(e.text)) for e in examples], dtype=np.int64)
    ordered = np.sort(lengths)
    median = float(ordered[(len(ordered) - 1) // 2])
    return LengthStats(
        median=median,
        mean=float(lengths.mean()),
        std=float(lengths.std()),
        variance=float(lengths.var()),
        max=int(lengths.max()),
        min=int(lengths.min()),
    )


def merge_training_corpora(bundles) -> list:
    """Concatenate the train splits of all bundles, order preserved.

    Test examples are never included.
    """
    bundles = list(bundles)
    if not bundles:
        raise EmptyCorpusError("no bundles to merge")
    merged = []
    for bundle in bundles:
        merged.extend(bundle.train)
    return merged
